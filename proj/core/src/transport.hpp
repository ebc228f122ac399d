#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace lfokit::detail {

// Exact balanced transportation solve on integer masses: minimize
// sum f_ij * cost(i, j) over integer flows with row sums `supply` and
// column sums `demand` (sums must agree). Successive shortest augmenting
// paths with node potentials; all costs must be non-negative and finite.
double solve_transport(const std::vector<std::int64_t>& supply,
                       const std::vector<std::int64_t>& demand,
                       const Eigen::MatrixXd& cost);

}  // namespace lfokit::detail
