#pragma once

#include <Eigen/Core>
#include <span>
#include <string>
#include <vector>

#include "lfokit/lexdist.hpp"
#include "lfokit/splitter.hpp"

namespace lfokit {

/// Segments paired with their motion-description sentences.
struct DescribedSegment {
  Segment segment;
  Sentence description;
};

struct DescribedSegments {
  std::vector<DescribedSegment> items;

  std::size_t size() const { return items.size(); }
  void validate() const;
};

/// Ordered verbal instructions; none may be the reserved "nothing" label.
struct InstructionScript {
  std::vector<Sentence> instructions;

  std::size_t size() const { return instructions.size(); }
  void validate() const;
};

struct MatchCosts {
  double c_dist = 1.0;
  double c_group = 0.5;
  double c_skip = 0.5;
};

/// How the grouping term accumulates: against the instruction (default) or
/// as a chain of consecutive caption-to-caption distances within the group.
enum class GroupCost { kToInstruction, kChain };

struct MatchOptions {
  MatchCosts costs;
  GroupCost group_cost = GroupCost::kToInstruction;
};

struct InstructionMatch {
  int instruction = 0;    // index j into the script
  int first_segment = 0;  // a_j; the assigned range is [a_j, a_j + segment_count)
  int segment_count = 0;  // g_j >= 1
  double start_s = 0.0;
  double end_s = 0.0;
  double skip_cost = 0.0;   // c_skip * segments skipped before this group
  double dist_cost = 0.0;   // c_dist * D(first member, j)
  double group_cost = 0.0;  // c_group * accumulated group distance

  int end_segment() const { return first_segment + segment_count; }
  double cost() const { return skip_cost + dist_cost + group_cost; }
};

/// Optimal monotone assignment of consecutive segment groups to
/// instructions, with skipped segments.
struct MatchAssignment {
  std::vector<InstructionMatch> per_instruction;
  std::vector<int> skipped;  // segment indices left unassigned
  double total_cost = 0.0;
};

/// Cost of one matching step: skip `k` segments, then assign `g` consecutive
/// segments starting at `first` to instruction `j`. The first group member
/// pays the distance term, the remaining members pay the group term (or, in
/// chain mode, consecutive caption-to-caption distances from `chain`).
/// Shared by the solver and by enumeration-style checks so candidate costs
/// are computed with identical arithmetic.
inline double match_step_cost(const MatchCosts& costs, const Eigen::MatrixXd& distance,
                              GroupCost mode, std::span<const double> chain, int first, int g,
                              int k, int j) {
  double gd = 0.0;
  if (mode == GroupCost::kToInstruction) {
    for (int u = first + 1; u < first + g; ++u) gd += distance(u, j);
  } else {
    for (int u = first; u < first + g - 1; ++u) gd += chain[static_cast<std::size_t>(u)];
  }
  return costs.c_skip * k + costs.c_dist * distance(first, j) + costs.c_group * gd;
}

/// M x N matrix of instruction_distance(description_i, instruction_j).
Eigen::MatrixXd build_distance_matrix(const DescribedSegments& segs,
                                      const InstructionScript& script,
                                      const EmbeddingTable& table, const DistanceConfig& cfg);

/// Distances between consecutive captions, for GroupCost::kChain. A pair
/// involving the "nothing" label costs cfg.c_nothing.
std::vector<double> caption_chain_distances(const DescribedSegments& segs,
                                            const EmbeddingTable& table,
                                            const DistanceConfig& cfg);

/// Dynamic-programming matcher. Requires at least as many segments as
/// instructions; ties are broken toward fewer skipped segments, then smaller
/// groups, scanning instructions in order. Segments after the last
/// instruction's group are skipped.
MatchAssignment match(const DescribedSegments& segs, const InstructionScript& script,
                      const Eigen::MatrixXd& distance, const MatchOptions& opts = {},
                      std::span<const double> chain = {});

/// Deterministic JSON report for an assignment (documented schema).
std::string explain(const MatchAssignment& assignment, const InstructionScript& script);

}  // namespace lfokit
