#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "lfokit/matcher.hpp"
#include "lfokit/splitter.hpp"
#include "lfokit/trajectory.hpp"

namespace lfokit {

/// Change-point detection quality against annotated truth.
struct ChangePointScore {
  double recall = 0.0;               // n_cr / n_cp
  double false_positive_rate = 0.0;  // (n_al - n_cr) / n_al, 0 when n_al == 0
  int n_cr = 0;                      // correctly detected change points
  int n_cp = 0;                      // annotated change points
  int n_al = 0;                      // detection alarms
};

/// Greedy one-to-one matching: repeatedly pair the globally closest
/// (detected, true) pair within the margin, removing both.
ChangePointScore score_change_points(const ChangePointSet& detected, const ChangePointSet& truth,
                                     double margin_s);

/// Temporal IoU per instruction plus AP at each threshold (the fraction of
/// instructions whose interval reaches the threshold).
struct MatchScore {
  std::map<double, double> ap_at;
  std::vector<double> per_instruction_iou;
};

MatchScore score_matching(const MatchAssignment& predicted, const std::vector<Segment>& truth,
                          const std::vector<double>& thresholds = {0.5, 0.75, 0.95});

std::string change_point_score_to_json(const ChangePointScore& score);
std::string match_score_to_json(const MatchScore& score);

/// Scripted synthetic demonstration: minimum-jerk reaches between waypoints
/// with optional dwell ("nothing") sections inserted after chosen reaches.
struct DwellSpec {
  int after_reach = 0;      // dwell starts when this reach ends
  double duration_s = 0.5;
};

struct SynthPlan {
  std::vector<Eigen::Vector3d> waypoints;
  std::vector<std::string> captions;      // one per reach
  std::vector<double> reach_durations_s;  // empty: every reach takes default_reach_duration_s
  double default_reach_duration_s = 1.0;
  std::vector<DwellSpec> dwells;
  double rate_hz = 30.0;

  std::size_t reach_count() const { return waypoints.empty() ? 0 : waypoints.size() - 1; }
  void validate() const;
};

struct SyntheticDemo {
  PoseTrack track;
  ChangePointSet true_change_points;
  DescribedSegments true_segments;  // dwell sections carry the "nothing" label
  InstructionScript script;         // ordered non-noise captions
  std::vector<int> noise_sections;  // indices into true_segments
};

/// Deterministic for a fixed seed. Reaches are minimum-jerk (speed zero at
/// the waypoints); dwells hold the waypoint with a small Brownian jitter of
/// sigma/3 per step; i.i.d. Gaussian noise of `noise_sigma_m` is added to
/// every sample.
SyntheticDemo synthesize(const SynthPlan& plan, double noise_sigma_m, std::uint64_t seed);

/// Stand-in captioner: each segment receives the caption of the true section
/// with maximal temporal overlap, replaced with probability `error_rate` by
/// a uniformly random different caption from the demo vocabulary (which
/// always includes "nothing"). Deterministic per seed.
DescribedSegments mock_caption(const SyntheticDemo& demo, const SegmentList& segments,
                               double error_rate, std::uint64_t seed);

// Caption files: JSON array of {"start_s", "end_s", "text"}.
struct TimedCaption {
  double start_s = 0.0;
  double end_s = 0.0;
  std::string text;
};

std::string captions_to_json(const std::vector<TimedCaption>& captions);
std::vector<TimedCaption> captions_from_json(const std::string& text);

/// Maximal-overlap assignment of timed captions onto detected segments.
/// Every segment must overlap at least one caption.
DescribedSegments assign_captions(const std::vector<TimedCaption>& captions,
                                  const SegmentList& segments);

// Ground-truth files:
// {"change_points_s": [...], "instructions": [{"text", "start_s", "end_s"}]}
struct GroundTruth {
  std::vector<double> change_points_s;
  std::vector<TimedCaption> instructions;  // non-noise sections only
};

std::string ground_truth_to_json(const GroundTruth& truth);
GroundTruth ground_truth_from_json(const std::string& text);
GroundTruth ground_truth_of(const SyntheticDemo& demo);

/// Reconstructs the full section tiling of [start_s, end_s] from a ground
/// truth: instruction intervals plus "nothing" gaps.
std::vector<TimedCaption> ground_truth_sections(const GroundTruth& truth, double start_s,
                                                double end_s);

}  // namespace lfokit
