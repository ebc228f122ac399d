#include "lfokit/splitter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "lfokit/errors.hpp"

namespace lfokit {
namespace {

struct Minimum {
  double t;
  double speed;
};

// Scans maximal runs of equal speed. A run is a local-minimum plateau when
// one of its edge samples is an interior sample with a strictly larger
// neighbor outside the run and no smaller neighbor on the other side.
std::vector<Minimum> minima_with_depth(const VelocityProfile& profile) {
  const auto& s = profile.samples;
  if (s.size() < 3)
    throw InsufficientData("speed profile has " + std::to_string(s.size()) +
                           " samples, need at least 3");
  std::vector<Minimum> out;
  std::size_t n = s.size();
  std::size_t a = 0;
  while (a < n) {
    std::size_t b = a;
    while (b + 1 < n && s[b + 1].speed == s[a].speed) ++b;
    double v = s[a].speed;
    bool qualifies = false;
    if (a == b) {
      qualifies = a > 0 && a < n - 1 && s[a - 1].speed > v && s[a + 1].speed > v;
    } else {
      bool left_edge = a > 0 && a < n - 1 && s[a - 1].speed > v;
      bool right_edge = b > 0 && b < n - 1 && s[b + 1].speed > v;
      qualifies = left_edge || right_edge;
    }
    if (qualifies) out.push_back({(s[a].t + s[b].t) / 2.0, v});
    a = b + 1;
  }
  return out;
}

// Keeps the deeper of any two minima closer than min_separation_s,
// repeating until all survivors are separated.
void enforce_separation(std::vector<Minimum>& minima, double min_separation_s) {
  if (min_separation_s <= 0.0) return;
  bool changed = true;
  while (changed && minima.size() > 1) {
    changed = false;
    for (std::size_t i = 0; i + 1 < minima.size(); ++i) {
      if (minima[i + 1].t - minima[i].t < min_separation_s) {
        std::size_t victim = minima[i].speed <= minima[i + 1].speed ? i + 1 : i;
        minima.erase(minima.begin() + static_cast<std::ptrdiff_t>(victim));
        changed = true;
        break;
      }
    }
  }
}

SegmentList segments_from_boundaries(const std::vector<double>& boundaries) {
  SegmentList list;
  list.segments.reserve(boundaries.size() - 1);
  for (std::size_t i = 0; i + 1 < boundaries.size(); ++i)
    list.segments.push_back({boundaries[i], boundaries[i + 1]});
  list.validate();
  return list;
}

}  // namespace

void SegmentList::validate() const {
  if (segments.empty()) throw InvalidInput("segment list is empty");
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (!(segments[i].start_s < segments[i].end_s))
      throw InvalidInput("segment " + std::to_string(i) + " has start >= end");
    if (i > 0 && segments[i].start_s != segments[i - 1].end_s)
      throw InvalidInput("segments " + std::to_string(i - 1) + " and " + std::to_string(i) +
                         " are not contiguous");
  }
}

ChangePointSet find_velocity_minima(const VelocityProfile& profile) {
  ChangePointSet set;
  for (const auto& m : minima_with_depth(profile)) set.times.push_back(m.t);
  return set;
}

SegmentList split(const PoseTrack& track, int window, double min_separation_s) {
  PoseTrack smoothed = smooth(track, window);
  VelocityProfile profile = speed_profile(smoothed);
  profile.window = window;
  auto minima = minima_with_depth(profile);
  enforce_separation(minima, min_separation_s);
  std::vector<double> boundaries;
  boundaries.reserve(minima.size() + 2);
  boundaries.push_back(track.start_time());
  for (const auto& m : minima) boundaries.push_back(m.t);
  boundaries.push_back(track.end_time());
  return segments_from_boundaries(boundaries);
}

SegmentList uniform_split(const PoseTrack& track, double period_s) {
  track.validate();
  if (!(period_s > 0.0)) throw InvalidParameter("period must be positive");
  double start = track.start_time();
  double end = track.end_time();
  double eps = 1e-9 * std::max(1.0, end - start);
  std::vector<double> boundaries{start};
  for (std::size_t k = 1;; ++k) {
    double b = start + static_cast<double>(k) * period_s;
    if (b >= end - eps) break;
    boundaries.push_back(b);
  }
  boundaries.push_back(end);
  return segments_from_boundaries(boundaries);
}

std::string segments_to_json(const SegmentList& list) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : list.segments) arr.push_back({{"start_s", s.start_s}, {"end_s", s.end_s}});
  return arr.dump(2) + "\n";
}

SegmentList segments_from_json(const std::string& text) {
  nlohmann::json arr;
  try {
    arr = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw MalformedInput(std::string("segment JSON: ") + e.what());
  }
  if (!arr.is_array()) throw MalformedInput("segment JSON must be an array");
  SegmentList list;
  for (const auto& item : arr) {
    if (!item.is_object() || !item.contains("start_s") || !item.contains("end_s"))
      throw MalformedInput("segment JSON entries need start_s and end_s");
    list.segments.push_back({item.at("start_s").get<double>(), item.at("end_s").get<double>()});
  }
  list.validate();
  return list;
}

}  // namespace lfokit
