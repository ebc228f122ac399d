#include "lfokit/geomfit.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>

#include <json.hpp>

#include "lfokit/errors.hpp"

namespace lfokit {
namespace {

Eigen::Vector3d centroid_of(std::span<const Eigen::Vector3d> points) {
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (const auto& p : points) c += p;
  return c / static_cast<double>(points.size());
}

Eigen::Matrix3d covariance_of(std::span<const Eigen::Vector3d> points,
                              const Eigen::Vector3d& center) {
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : points) {
    Eigen::Vector3d d = p - center;
    cov += d * d.transpose();
  }
  return cov / static_cast<double>(points.size());
}

double cloud_extent(std::span<const Eigen::Vector3d> points) {
  Eigen::Vector3d lo = points.front(), hi = points.front();
  for (const auto& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return (hi - lo).norm();
}

// Deterministic sign for vectors whose orientation is otherwise free.
Eigen::Vector3d canonical_sign(Eigen::Vector3d v) {
  int k = 0;
  v.cwiseAbs().maxCoeff(&k);
  return v[k] < 0.0 ? Eigen::Vector3d(-v) : v;
}

}  // namespace

LineFit fit_line(std::span<const Eigen::Vector3d> points) {
  if (points.size() < 2)
    throw InsufficientData("line fit needs at least 2 points, got " +
                           std::to_string(points.size()));
  if (cloud_extent(points) == 0.0) throw DegenerateGeometry("all points coincide");

  LineFit fit;
  fit.centroid = centroid_of(points);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(covariance_of(points, fit.centroid));
  fit.direction = eig.eigenvectors().col(2).normalized();  // largest variance
  if (fit.direction.dot(points.back() - points.front()) < 0.0) fit.direction = -fit.direction;

  double lo = 0.0, hi = 0.0, sq = 0.0;
  bool first = true;
  for (const auto& p : points) {
    Eigen::Vector3d d = p - fit.centroid;
    double s = d.dot(fit.direction);
    if (first) lo = hi = s, first = false;
    lo = std::min(lo, s);
    hi = std::max(hi, s);
    sq += (d - s * fit.direction).squaredNorm();
  }
  fit.range_m = hi - lo;
  fit.rms_residual_m = std::sqrt(sq / static_cast<double>(points.size()));
  return fit;
}

CircleFit fit_circle(std::span<const Eigen::Vector3d> points) {
  const auto n = points.size();
  if (n < 3)
    throw InsufficientData("circle fit needs at least 3 points, got " + std::to_string(n));

  Eigen::Vector3d c0 = centroid_of(points);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(covariance_of(points, c0));
  // eigenvalues ascending: col 0 is the plane normal, cols 2/1 span the plane
  // The eigensolver floor is ~1e-16 * lambda_max; anything below 1e-12 is
  // numerical residue of exactly collinear input, far below real noise.
  double lambda_mid = eig.eigenvalues()(1);
  double lambda_max = eig.eigenvalues()(2);
  if (lambda_max <= 0.0 || lambda_mid <= 1e-12 * lambda_max)
    throw DegenerateGeometry("points are collinear, no circle is determined");
  Eigen::Vector3d normal = eig.eigenvectors().col(0).normalized();
  Eigen::Vector3d e1 = eig.eigenvectors().col(2).normalized();
  Eigen::Vector3d e2 = normal.cross(e1);

  // Kasa fit in plane coordinates: u^2 + w^2 = 2*a*u + 2*b*w + c.
  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::Vector3d d = points[i] - c0;
    double u = d.dot(e1), w = d.dot(e2);
    design(static_cast<Eigen::Index>(i), 0) = 2.0 * u;
    design(static_cast<Eigen::Index>(i), 1) = 2.0 * w;
    design(static_cast<Eigen::Index>(i), 2) = 1.0;
    rhs(static_cast<Eigen::Index>(i)) = u * u + w * w;
  }
  Eigen::Vector3d sol = design.colPivHouseholderQr().solve(rhs);
  double r2 = sol[2] + sol[0] * sol[0] + sol[1] * sol[1];
  if (!(r2 > 0.0)) throw DegenerateGeometry("circle fit collapsed to zero radius");

  CircleFit fit;
  fit.radius_m = std::sqrt(r2);
  fit.center = c0 + sol[0] * e1 + sol[1] * e2;
  fit.axis = normal;

  // Swept angle: accumulate signed steps between consecutive points as seen
  // from the center, so sweeps beyond pi are preserved.
  double total = 0.0;
  double prev = 0.0;
  bool first = true;
  for (const auto& p : points) {
    Eigen::Vector3d d = p - fit.center;
    double phi = std::atan2(d.dot(e2), d.dot(e1));
    if (!first) {
      double step = phi - prev;
      while (step > M_PI) step -= 2.0 * M_PI;
      while (step < -M_PI) step += 2.0 * M_PI;
      total += step;
    }
    prev = phi;
    first = false;
  }
  fit.swept_angle_rad = std::abs(total);
  if (total < -1e-12)
    fit.axis = -fit.axis;  // orient so the traversal is counterclockwise
  else if (std::abs(total) <= 1e-12)
    fit.axis = canonical_sign(fit.axis);

  double sq = 0.0;
  for (const auto& p : points) {
    Eigen::Vector3d d = p - fit.center;
    double h = d.dot(fit.axis);
    double rho = (d - h * fit.axis).norm();
    sq += (rho - fit.radius_m) * (rho - fit.radius_m) + h * h;
  }
  fit.rms_residual_m = std::sqrt(sq / static_cast<double>(n));
  return fit;
}

ArticulationModel classify_articulation(std::span<const Eigen::Vector3d> points) {
  if (points.size() < 3)
    throw InsufficientData("articulation fit needs at least 3 points, got " +
                           std::to_string(points.size()));
  ArticulationModel model;
  model.line = fit_line(points);
  double extent = cloud_extent(points);
  model.line_normalized_residual = model.line.rms_residual_m / extent;
  try {
    model.circle = fit_circle(points);
    model.has_circle = true;
    model.circle_normalized_residual = model.circle.rms_residual_m / extent;
  } catch (const DegenerateGeometry&) {
    model.has_circle = false;  // collinear: prismatic by default
  }
  // Prismatic preference: the circle must win by at least 5 %.
  model.kind = model.has_circle &&
                       model.circle_normalized_residual < 0.95 * model.line_normalized_residual
                   ? ArticulationKind::kRevolute
                   : ArticulationKind::kPrismatic;
  return model;
}

std::string articulation_to_json(const ArticulationModel& model) {
  nlohmann::json j;
  auto vec = [](const Eigen::Vector3d& v) { return nlohmann::json::array({v[0], v[1], v[2]}); };
  if (model.kind == ArticulationKind::kPrismatic) {
    j["kind"] = "prismatic";
    j["direction"] = vec(model.line.direction);
    j["range_m"] = model.line.range_m;
    j["rms_residual_m"] = model.line.rms_residual_m;
  } else {
    j["kind"] = "revolute";
    j["axis"] = vec(model.circle.axis);
    j["center"] = vec(model.circle.center);
    j["radius"] = model.circle.radius_m;
    j["swept_angle_rad"] = model.circle.swept_angle_rad;
    j["rms_residual_m"] = model.circle.rms_residual_m;
  }
  j["line_rms_residual_m"] = model.line.rms_residual_m;
  if (model.has_circle) j["circle_rms_residual_m"] = model.circle.rms_residual_m;
  return j.dump(2) + "\n";
}

}  // namespace lfokit
