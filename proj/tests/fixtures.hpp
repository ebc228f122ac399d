// Shared fixture helpers for the test suites.
#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lfokit/lexdist.hpp"
#include "lfokit/trajectory.hpp"

namespace fixtures {

inline lfokit::EmbeddingTable make_table(const std::vector<std::string>& words,
                                         const std::vector<Eigen::VectorXd>& vectors) {
  lfokit::EmbeddingTable table;
  table.dim = static_cast<int>(vectors.front().size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    table.index[words[i]] = i;
    table.vectors.push_back(vectors[i]);
  }
  return table;
}

inline lfokit::EmbeddingTable random_table(const std::vector<std::string>& words, int dim,
                                           std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Eigen::VectorXd> vectors;
  for (std::size_t i = 0; i < words.size(); ++i) {
    Eigen::VectorXd v(dim);
    for (int k = 0; k < dim; ++k) v[k] = u(rng);
    vectors.push_back(v);
  }
  return make_table(words, vectors);
}

inline lfokit::PoseTrack make_track(const std::vector<Eigen::Vector3d>& positions,
                                    double rate_hz = 30.0) {
  lfokit::PoseTrack track;
  track.nominal_rate_hz = rate_hz;
  for (std::size_t i = 0; i < positions.size(); ++i)
    track.samples.push_back({static_cast<double>(i) / rate_hz, positions[i], std::nullopt});
  return track;
}

inline lfokit::PoseTrack linear_track(const Eigen::Vector3d& velocity, double duration_s,
                                      double rate_hz = 30.0) {
  std::vector<Eigen::Vector3d> positions;
  auto n = static_cast<std::size_t>(duration_s * rate_hz) + 1;
  for (std::size_t i = 0; i < n; ++i)
    positions.push_back(velocity * (static_cast<double>(i) / rate_hz));
  return make_track(positions, rate_hz);
}

// Scoped temporary directory under the system temp root.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    auto base = std::filesystem::temp_directory_path();
    path_ = base / ("lfokit_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace fixtures
