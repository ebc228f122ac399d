#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace lfokit {

struct PoseSample {
  double t = 0.0;                                // seconds
  Eigen::Vector3d p = Eigen::Vector3d::Zero();   // meters, camera frame
  std::optional<double> confidence;              // unitless, in [0,1]
};

/// Timestamped 3-D hand positions, the raw demonstration signal.
/// Timestamps are strictly increasing and all coordinates finite.
struct PoseTrack {
  std::vector<PoseSample> samples;
  double nominal_rate_hz = 30.0;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double start_time() const;
  double end_time() const;
  double duration() const { return end_time() - start_time(); }

  /// Throws MalformedInput / InsufficientData when an invariant is broken.
  void validate() const;
};

struct SpeedSample {
  double t = 0.0;      // seconds
  double speed = 0.0;  // m/s, >= 0
};

struct VelocityProfile {
  std::vector<SpeedSample> samples;
  int window = 1;  // smoothing window applied upstream, in samples

  std::size_t size() const { return samples.size(); }
};

// Pose stream I/O. Accepts UTF-8 CSV with the header `t,x,y,z[,confidence]`
// or JSON-lines with the same keys. Rows with missing coordinates are
// gap-filled by linear interpolation when the gap spans at most 3 samples;
// longer gaps fail the load.
PoseTrack load_pose_track(std::istream& in);
PoseTrack load_pose_track_file(const std::string& path);

// Writes CSV with 9 significant digits. A loaded file survives a
// load/save cycle byte for byte.
void save_pose_track(const PoseTrack& track, std::ostream& out);
void save_pose_track_file(const PoseTrack& track, const std::string& path);

/// Centered moving average over positions. `window` must be odd and at most
/// the track length; edges use a shrunken symmetric window, so window 1 is
/// the identity. Timestamps and confidences pass through untouched.
PoseTrack smooth(const PoseTrack& track, int window);

/// Scalar speed profile: central differences at interior samples, one-sided
/// at the ends. Output has the same timestamps as the input.
VelocityProfile speed_profile(const PoseTrack& track);

}  // namespace lfokit
