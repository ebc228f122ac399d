#include "transport.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "lfokit/errors.hpp"

namespace lfokit::detail {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double solve_transport(const std::vector<std::int64_t>& supply,
                       const std::vector<std::int64_t>& demand,
                       const Eigen::MatrixXd& cost) {
  const int m = static_cast<int>(supply.size());
  const int n = static_cast<int>(demand.size());
  if (cost.rows() != m || cost.cols() != n)
    throw InvalidInput("transport cost matrix shape mismatch");
  std::int64_t total = std::accumulate(supply.begin(), supply.end(), std::int64_t{0});
  if (total != std::accumulate(demand.begin(), demand.end(), std::int64_t{0}))
    throw InvalidInput("transport supplies and demands are unbalanced");

  std::vector<std::int64_t> row_left = supply;
  std::vector<std::int64_t> col_left = demand;
  // flow[i][j], dense; problems here are at most a few dozen per side
  std::vector<std::vector<std::int64_t>> flow(m, std::vector<std::int64_t>(n, 0));
  std::vector<double> pot_row(m, 0.0), pot_col(n, 0.0);

  std::int64_t shipped = 0;
  while (shipped < total) {
    // Multi-source Dijkstra from rows with remaining supply over the
    // residual graph: forward arcs row->col (always open), backward arcs
    // col->row where flow > 0. Potentials keep reduced costs non-negative.
    std::vector<double> dist_row(m, kInf), dist_col(n, kInf);
    std::vector<int> col_reached_via(n, -1);  // row that relaxed each col
    std::vector<int> row_reached_via(m, -1);  // col that relaxed each row
    std::vector<bool> done_row(m, false), done_col(n, false);
    for (int i = 0; i < m; ++i)
      if (row_left[i] > 0) dist_row[i] = 0.0;

    int target_col = -1;
    while (true) {
      int best_row = -1, best_col = -1;
      double best = kInf;
      for (int i = 0; i < m; ++i)
        if (!done_row[i] && dist_row[i] < best) best = dist_row[i], best_row = i, best_col = -1;
      for (int j = 0; j < n; ++j)
        if (!done_col[j] && dist_col[j] < best) best = dist_col[j], best_col = j, best_row = -1;
      if (best == kInf) break;
      if (best_col >= 0) {
        done_col[best_col] = true;
        if (col_left[best_col] > 0) {
          target_col = best_col;
          break;
        }
        for (int i = 0; i < m; ++i) {
          if (done_row[i] || flow[i][best_col] <= 0) continue;
          double nd = dist_col[best_col] + (-cost(i, best_col) + pot_col[best_col] - pot_row[i]);
          if (nd < dist_row[i]) {
            dist_row[i] = nd;
            row_reached_via[i] = best_col;
          }
        }
      } else {
        done_row[best_row] = true;
        for (int j = 0; j < n; ++j) {
          if (done_col[j]) continue;
          double nd = dist_row[best_row] + (cost(best_row, j) + pot_row[best_row] - pot_col[j]);
          if (nd < dist_col[j]) {
            dist_col[j] = nd;
            col_reached_via[j] = best_row;
          }
        }
      }
    }
    if (target_col < 0) throw Error("transport solve failed to route remaining mass");

    double dist_t = dist_col[target_col];
    for (int i = 0; i < m; ++i) pot_row[i] += std::min(dist_row[i], dist_t);
    for (int j = 0; j < n; ++j) pot_col[j] += std::min(dist_col[j], dist_t);

    // Trace the alternating path back to a source row, find the bottleneck.
    std::vector<std::pair<int, int>> forward_arcs;   // (row, col) flow increases
    std::vector<std::pair<int, int>> backward_arcs;  // (row, col) flow decreases
    std::int64_t bottleneck = col_left[target_col];
    int col = target_col;
    while (true) {
      int row = col_reached_via[col];
      forward_arcs.emplace_back(row, col);
      int prev_col = row_reached_via[row];
      if (prev_col < 0) {
        bottleneck = std::min(bottleneck, row_left[row]);
        for (auto [bi, bj] : backward_arcs) bottleneck = std::min(bottleneck, flow[bi][bj]);
        for (auto [fi, fj] : forward_arcs) flow[fi][fj] += bottleneck;
        for (auto [bi, bj] : backward_arcs) flow[bi][bj] -= bottleneck;
        row_left[row] -= bottleneck;
        col_left[target_col] -= bottleneck;
        shipped += bottleneck;
        break;
      }
      backward_arcs.emplace_back(row, prev_col);
      col = prev_col;
    }
  }

  double result = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      if (flow[i][j] > 0) result += static_cast<double>(flow[i][j]) * cost(i, j);
  return result;
}

}  // namespace lfokit::detail
