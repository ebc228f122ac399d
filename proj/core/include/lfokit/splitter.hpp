#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "lfokit/trajectory.hpp"

namespace lfokit {

/// Detected change-point times, strictly increasing, all inside the track.
struct ChangePointSet {
  std::vector<double> times;

  std::size_t size() const { return times.size(); }
};

struct Segment {
  double start_s = 0.0;
  double end_s = 0.0;

  double length() const { return end_s - start_s; }
};

/// Ordered, contiguous, non-overlapping cover of the track's time span.
struct SegmentList {
  std::vector<Segment> segments;

  std::size_t size() const { return segments.size(); }
  void validate() const;
};

/// Interior local minima of the speed signal. A flat run of equal minimal
/// values yields exactly one change point at the run's temporal midpoint;
/// the profile endpoints are never reported.
ChangePointSet find_velocity_minima(const VelocityProfile& profile);

/// smooth -> speed_profile -> find_velocity_minima, then segments between
/// consecutive change points with the track endpoints as outer boundaries.
/// `min_separation_s` > 0 drops the shallower of any two change points
/// closer than that separation (off by default; over-division is the
/// expected behavior and gets resolved downstream by matching).
SegmentList split(const PoseTrack& track, int window, double min_separation_s = 0.0);

/// Baseline splitter: boundaries every `period_s` from the track start;
/// the final partial segment is kept.
SegmentList uniform_split(const PoseTrack& track, double period_s);

// Segment JSON array [{"start_s": ..., "end_s": ...}, ...]
std::string segments_to_json(const SegmentList& list);
SegmentList segments_from_json(const std::string& text);

}  // namespace lfokit
