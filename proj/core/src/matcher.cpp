#include "lfokit/matcher.hpp"

#include <limits>

#include <json.hpp>

#include "lfokit/errors.hpp"

namespace lfokit {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void DescribedSegments::validate() const {
  if (items.empty()) throw InvalidInput("described segments are empty");
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& s = items[i].segment;
    if (!(s.start_s < s.end_s))
      throw InvalidInput("described segment " + std::to_string(i) + " has start >= end");
    if (i > 0 && s.start_s != items[i - 1].segment.end_s)
      throw InvalidInput("described segments " + std::to_string(i - 1) + " and " +
                         std::to_string(i) + " are not contiguous");
    if (items[i].description.tokens.empty())
      throw InvalidInput("described segment " + std::to_string(i) + " has an empty description");
  }
}

void InstructionScript::validate() const {
  if (instructions.empty()) throw InvalidInput("instruction script is empty");
  for (std::size_t j = 0; j < instructions.size(); ++j) {
    if (instructions[j].tokens.empty())
      throw InvalidInput("instruction " + std::to_string(j) + " is empty");
    if (instructions[j].is_nothing())
      throw InvalidInput("instruction " + std::to_string(j) + " is the reserved nothing label");
  }
}

Eigen::MatrixXd build_distance_matrix(const DescribedSegments& segs,
                                      const InstructionScript& script,
                                      const EmbeddingTable& table, const DistanceConfig& cfg) {
  segs.validate();
  script.validate();
  Eigen::MatrixXd matrix(segs.size(), script.size());
  for (std::size_t i = 0; i < segs.size(); ++i)
    for (std::size_t j = 0; j < script.size(); ++j)
      matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          instruction_distance(segs.items[i].description, script.instructions[j], table, cfg);
  return matrix;
}

std::vector<double> caption_chain_distances(const DescribedSegments& segs,
                                            const EmbeddingTable& table,
                                            const DistanceConfig& cfg) {
  std::vector<double> chain;
  if (segs.size() < 2) return chain;
  chain.reserve(segs.size() - 1);
  for (std::size_t i = 0; i + 1 < segs.size(); ++i) {
    const auto& a = segs.items[i].description;
    const auto& b = segs.items[i + 1].description;
    chain.push_back(a.is_nothing() || b.is_nothing() ? cfg.c_nothing : wmd(a, b, table, cfg));
  }
  return chain;
}

MatchAssignment match(const DescribedSegments& segs, const InstructionScript& script,
                      const Eigen::MatrixXd& distance, const MatchOptions& opts,
                      std::span<const double> chain) {
  segs.validate();
  script.validate();
  const int m = static_cast<int>(segs.size());
  const int n = static_cast<int>(script.size());
  if (distance.rows() != m || distance.cols() != n)
    throw InvalidInput("distance matrix is " + std::to_string(distance.rows()) + "x" +
                       std::to_string(distance.cols()) + ", expected " + std::to_string(m) + "x" +
                       std::to_string(n));
  if (m < n)
    throw Infeasible("cannot match " + std::to_string(n) + " instructions to " +
                     std::to_string(m) + " segments (M=" + std::to_string(m) +
                     " < N=" + std::to_string(n) + ")");
  if (opts.group_cost == GroupCost::kChain && m > 1 &&
      chain.size() != static_cast<std::size_t>(m - 1))
    throw InvalidParameter("chain group cost needs " + std::to_string(m - 1) +
                           " adjacent caption distances, got " + std::to_string(chain.size()));
  const auto& costs = opts.costs;

  // dp[i][j]: minimal cost of serving instructions j.. with segments i..;
  // leftover segments after the last instruction are skipped one by one.
  std::vector<std::vector<double>> dp(static_cast<std::size_t>(m) + 1,
                                      std::vector<double>(static_cast<std::size_t>(n) + 1, kInf));
  std::vector<std::vector<std::pair<int, int>>> choice(
      static_cast<std::size_t>(m) + 1,
      std::vector<std::pair<int, int>>(static_cast<std::size_t>(n) + 1, {-1, -1}));
  for (int i = 0; i <= m; ++i) dp[i][n] = costs.c_skip * (m - i);
  for (int j = n - 1; j >= 0; --j) {
    for (int i = m - 1; i >= 0; --i) {
      double best = kInf;
      std::pair<int, int> best_choice{-1, -1};
      for (int k = 0; i + k < m; ++k) {
        for (int g = 1; i + k + g <= m; ++g) {
          double rest = dp[i + k + g][j + 1];
          if (rest == kInf) continue;
          double c = match_step_cost(costs, distance, opts.group_cost, chain, i + k, g, k, j) + rest;
          if (c < best) {
            best = c;
            best_choice = {k, g};
          }
        }
      }
      dp[i][j] = best;
      choice[i][j] = best_choice;
    }
  }
  if (dp[0][0] == kInf)
    throw Infeasible("no feasible assignment");  // unreachable once m >= n

  MatchAssignment result;
  result.total_cost = dp[0][0];
  result.per_instruction.reserve(static_cast<std::size_t>(n));
  int i = 0;
  for (int j = 0; j < n; ++j) {
    auto [k, g] = choice[i][j];
    for (int u = i; u < i + k; ++u) result.skipped.push_back(u);
    InstructionMatch im;
    im.instruction = j;
    im.first_segment = i + k;
    im.segment_count = g;
    im.start_s = segs.items[static_cast<std::size_t>(i + k)].segment.start_s;
    im.end_s = segs.items[static_cast<std::size_t>(i + k + g - 1)].segment.end_s;
    im.skip_cost = costs.c_skip * k;
    im.dist_cost = costs.c_dist * distance(i + k, j);
    im.group_cost =
        match_step_cost(costs, distance, opts.group_cost, chain, i + k, g, 0, j) - im.dist_cost;
    result.per_instruction.push_back(im);
    i += k + g;
  }
  for (int u = i; u < m; ++u) result.skipped.push_back(u);
  return result;
}

std::string explain(const MatchAssignment& assignment, const InstructionScript& script) {
  if (assignment.per_instruction.size() != script.size())
    throw InvalidInput("assignment covers " + std::to_string(assignment.per_instruction.size()) +
                       " instructions, script has " + std::to_string(script.size()));
  nlohmann::json report;
  report["instructions"] = nlohmann::json::array();
  for (const auto& im : assignment.per_instruction) {
    nlohmann::json entry;
    entry["index"] = im.instruction;
    entry["text"] = script.instructions[static_cast<std::size_t>(im.instruction)].text();
    entry["start_s"] = im.start_s;
    entry["end_s"] = im.end_s;
    auto indices = nlohmann::json::array();
    for (int u = im.first_segment; u < im.end_segment(); ++u) indices.push_back(u);
    entry["segment_indices"] = indices;
    entry["cost"] = im.cost();
    entry["cost_terms"] = {
        {"skip", im.skip_cost}, {"dist", im.dist_cost}, {"group", im.group_cost}};
    report["instructions"].push_back(entry);
  }
  report["skipped_segments"] = assignment.skipped;
  report["total_cost"] = assignment.total_cost;
  return report.dump(2) + "\n";
}

}  // namespace lfokit
