#include "lfokit/trajectory.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lfokit/errors.hpp"

namespace lfokit {
namespace {

// One parsed input row; position may be absent (tracker dropped the frame).
struct RawRow {
  double t = 0.0;
  std::optional<Eigen::Vector3d> p;
  std::optional<double> confidence;
};

constexpr int kMaxGapSamples = 3;

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::optional<double> parse_double_field(const std::string& field, std::size_t line_no) {
  std::string f = trim(field);
  if (f.empty()) return std::nullopt;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), value);
  if (ec != std::errc() || ptr != f.data() + f.size())
    throw MalformedInput("pose line " + std::to_string(line_no) + ": bad number '" + f + "'");
  return value;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

RawRow parse_csv_row(const std::string& line, std::size_t line_no, bool has_confidence) {
  auto fields = split_csv(line);
  std::size_t expected = has_confidence ? 5 : 4;
  if (fields.size() != expected && fields.size() != 4)
    throw MalformedInput("pose line " + std::to_string(line_no) + ": expected " +
                         std::to_string(expected) + " fields, got " + std::to_string(fields.size()));
  RawRow row;
  auto t = parse_double_field(fields[0], line_no);
  if (!t) throw MalformedInput("pose line " + std::to_string(line_no) + ": missing timestamp");
  row.t = *t;
  auto x = parse_double_field(fields[1], line_no);
  auto y = parse_double_field(fields[2], line_no);
  auto z = parse_double_field(fields[3], line_no);
  if (x && y && z) row.p = Eigen::Vector3d(*x, *y, *z);
  if (fields.size() == 5) row.confidence = parse_double_field(fields[4], line_no);
  return row;
}

RawRow parse_json_row(const std::string& line, std::size_t line_no) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw MalformedInput("pose line " + std::to_string(line_no) + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("t"))
    throw MalformedInput("pose line " + std::to_string(line_no) + ": expected object with 't'");
  RawRow row;
  row.t = j.at("t").get<double>();
  if (j.contains("x") && j.contains("y") && j.contains("z") &&
      !j["x"].is_null() && !j["y"].is_null() && !j["z"].is_null()) {
    row.p = Eigen::Vector3d(j["x"].get<double>(), j["y"].get<double>(), j["z"].get<double>());
  }
  if (j.contains("confidence") && !j["confidence"].is_null())
    row.confidence = j["confidence"].get<double>();
  return row;
}

// Linear interpolation across runs of position-less rows. A run longer than
// kMaxGapSamples (or touching either end of the track) cannot be filled.
void fill_gaps(std::vector<RawRow>& rows) {
  std::size_t i = 0;
  while (i < rows.size()) {
    if (rows[i].p) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < rows.size() && !rows[j].p) ++j;
    std::size_t gap = j - i;
    if (i == 0 || j == rows.size() || gap > kMaxGapSamples)
      throw MalformedInput("unfillable gap of " + std::to_string(gap) + " samples around t=" +
                           std::to_string(rows[i].t) + "; split the track");
    const RawRow& a = rows[i - 1];
    const RawRow& b = rows[j];
    for (std::size_t k = i; k < j; ++k) {
      double u = (rows[k].t - a.t) / (b.t - a.t);
      rows[k].p = (1.0 - u) * (*a.p) + u * (*b.p);
    }
    i = j;
  }
}

double infer_rate(const std::vector<PoseSample>& samples) {
  if (samples.size() < 2) return 30.0;
  std::vector<double> dts;
  dts.reserve(samples.size() - 1);
  for (std::size_t i = 1; i < samples.size(); ++i) dts.push_back(samples[i].t - samples[i - 1].t);
  std::nth_element(dts.begin(), dts.begin() + dts.size() / 2, dts.end());
  double median = dts[dts.size() / 2];
  return median > 0.0 ? 1.0 / median : 30.0;
}

void format_g9(std::string& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  out += buf;
}

}  // namespace

double PoseTrack::start_time() const {
  if (samples.empty()) throw InsufficientData("empty track");
  return samples.front().t;
}

double PoseTrack::end_time() const {
  if (samples.empty()) throw InsufficientData("empty track");
  return samples.back().t;
}

void PoseTrack::validate() const {
  if (samples.size() < 3)
    throw InsufficientData("track has " + std::to_string(samples.size()) +
                           " samples, need at least 3");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!samples[i].p.allFinite())
      throw MalformedInput("non-finite position at t=" + std::to_string(samples[i].t));
    if (i > 0 && !(samples[i].t > samples[i - 1].t))
      throw MalformedInput("timestamps not strictly increasing at t=" +
                           std::to_string(samples[i].t));
  }
}

PoseTrack load_pose_track(std::istream& in) {
  std::vector<RawRow> rows;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  bool json_lines = false;
  bool has_confidence = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty()) continue;
    if (!header_seen) {
      header_seen = true;
      if (t.front() == '{') {
        json_lines = true;
      } else {
        auto fields = split_csv(t);
        for (auto& f : fields) f = trim(f);
        if (fields.size() < 4 || fields[0] != "t" || fields[1] != "x" || fields[2] != "y" ||
            fields[3] != "z" || (fields.size() == 5 && fields[4] != "confidence") ||
            fields.size() > 5)
          throw MalformedInput("pose CSV must start with header t,x,y,z[,confidence]");
        has_confidence = fields.size() == 5;
        continue;
      }
    }
    rows.push_back(json_lines ? parse_json_row(t, line_no) : parse_csv_row(t, line_no, has_confidence));
  }
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (!(rows[i].t > rows[i - 1].t))
      throw MalformedInput("timestamps not strictly increasing at t=" + std::to_string(rows[i].t));
  fill_gaps(rows);
  PoseTrack track;
  track.samples.reserve(rows.size());
  for (const auto& r : rows) track.samples.push_back({r.t, *r.p, r.confidence});
  if (track.samples.size() < 3)
    throw InsufficientData("pose stream has " + std::to_string(track.samples.size()) +
                           " usable samples, need at least 3");
  track.nominal_rate_hz = infer_rate(track.samples);
  track.validate();
  return track;
}

PoseTrack load_pose_track_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open pose file: " + path);
  return load_pose_track(in);
}

void save_pose_track(const PoseTrack& track, std::ostream& out) {
  bool has_confidence =
      std::any_of(track.samples.begin(), track.samples.end(),
                  [](const PoseSample& s) { return s.confidence.has_value(); });
  std::string buf;
  buf += has_confidence ? "t,x,y,z,confidence\n" : "t,x,y,z\n";
  for (const auto& s : track.samples) {
    format_g9(buf, s.t);
    for (int k = 0; k < 3; ++k) {
      buf += ',';
      format_g9(buf, s.p[k]);
    }
    if (has_confidence) {
      buf += ',';
      if (s.confidence) format_g9(buf, *s.confidence);
    }
    buf += '\n';
  }
  out << buf;
}

void save_pose_track_file(const PoseTrack& track, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open for write: " + path);
  save_pose_track(track, out);
}

PoseTrack smooth(const PoseTrack& track, int window) {
  track.validate();
  int n = static_cast<int>(track.size());
  if (window < 1 || window % 2 == 0 || window > n)
    throw InvalidParameter("smoothing window must be odd and in [1, " + std::to_string(n) +
                           "], got " + std::to_string(window));
  PoseTrack out = track;
  int half = window / 2;
  for (int i = 0; i < n; ++i) {
    int h = std::min({half, i, n - 1 - i});  // shrink symmetrically near the edges
    Eigen::Vector3d acc = Eigen::Vector3d::Zero();
    for (int k = i - h; k <= i + h; ++k) acc += track.samples[k].p;
    out.samples[i].p = acc / static_cast<double>(2 * h + 1);
  }
  return out;
}

VelocityProfile speed_profile(const PoseTrack& track) {
  track.validate();
  std::size_t n = track.size();
  VelocityProfile profile;
  profile.samples.reserve(n);
  auto speed_between = [&](std::size_t a, std::size_t b) {
    return (track.samples[b].p - track.samples[a].p).norm() /
           (track.samples[b].t - track.samples[a].t);
  };
  for (std::size_t i = 0; i < n; ++i) {
    double v;
    if (i == 0)
      v = speed_between(0, 1);
    else if (i == n - 1)
      v = speed_between(n - 2, n - 1);
    else
      v = speed_between(i - 1, i + 1);
    profile.samples.push_back({track.samples[i].t, v});
  }
  return profile;
}

}  // namespace lfokit
