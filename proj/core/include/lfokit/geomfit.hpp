#pragma once

#include <Eigen/Core>
#include <span>
#include <string>
#include <vector>

namespace lfokit {

/// Total-least-squares line through a point cloud. The direction follows
/// the traversal order (first point to last point).
struct LineFit {
  Eigen::Vector3d direction = Eigen::Vector3d::UnitX();  // unit
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  double range_m = 0.0;         // extent of projections along the direction
  double rms_residual_m = 0.0;  // RMS perpendicular distance
};

/// Least-squares circle in the best-fit plane (Kasa's algebraic fit; it is
/// slightly biased toward small radii on short noisy arcs). The axis is
/// oriented so the traversal sweeps counterclockwise around it.
struct CircleFit {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double radius_m = 0.0;
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();  // unit plane normal
  double swept_angle_rad = 0.0;  // accumulated through intermediate points, may exceed pi
  double rms_residual_m = 0.0;   // RMS 3-D distance to the fitted circle
};

enum class ArticulationKind { kPrismatic, kRevolute };

/// Joint model selected for a trajectory, with both candidate fits kept for
/// the report. Normalized residuals are RMS residual over the cloud extent.
struct ArticulationModel {
  ArticulationKind kind = ArticulationKind::kPrismatic;
  LineFit line;
  bool has_circle = false;  // false when the points are (near) collinear
  CircleFit circle;
  double line_normalized_residual = 0.0;
  double circle_normalized_residual = 0.0;
};

LineFit fit_line(std::span<const Eigen::Vector3d> points);
CircleFit fit_circle(std::span<const Eigen::Vector3d> points);

/// Fits both models and keeps the one with the lower normalized residual;
/// prismatic wins unless the circle is better by at least 5 %.
ArticulationModel classify_articulation(std::span<const Eigen::Vector3d> points);

std::string articulation_to_json(const ArticulationModel& model);

}  // namespace lfokit
