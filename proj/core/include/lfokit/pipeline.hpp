#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lfokit/evalkit.hpp"
#include "lfokit/geomfit.hpp"
#include "lfokit/lexdist.hpp"
#include "lfokit/matcher.hpp"
#include "lfokit/splitter.hpp"
#include "lfokit/trajectory.hpp"

namespace lfokit {

enum class CaptionProviderKind { kFile, kMock };

/// Single config surface for the batch pipeline. Every field has a CLI flag
/// of the same name.
struct PipelineConfig {
  int smoothing_window = 5;
  double min_separation_s = 0.0;
  double uniform_period_s = 0.0;  // > 0 replaces the velocity splitter with the baseline
  MatchCosts costs;
  GroupCost group_cost = GroupCost::kToInstruction;
  DistanceConfig distance;
  std::vector<double> iou_thresholds = {0.5, 0.75, 0.95};
  double change_point_margin_s = 0.1;
  std::string embeddings_path;
  CaptionProviderKind caption_provider = CaptionProviderKind::kFile;
  std::string captions_path;  // file provider: JSON [{"start_s","end_s","text"}]
  std::string truth_path;     // mock provider: ground-truth JSON to caption from
  double mock_error_rate = 0.0;
  std::uint64_t mock_seed = 0;
  std::vector<std::string> articulation_keywords = {"open", "close", "pull", "turn"};
  std::vector<double> eval_uniform_periods = {0.25, 0.5, 1.0, 2.0};  // eval-split sweep
  double eval_baseline_period_s = 0.5;  // eval-match baseline period, 0 disables

  void validate() const;
};

/// Applies the fields present in a config JSON object on top of `base`.
PipelineConfig config_from_json(const std::string& text, PipelineConfig base = {});
PipelineConfig config_from_file(const std::string& path, PipelineConfig base = {});

// Instruction scripts are plain text, one instruction per line.
InstructionScript load_instruction_script(const std::string& path);
void save_instruction_script(const InstructionScript& script, const std::string& path);

struct ArticulationEntry {
  int instruction = 0;
  std::string text;
  double start_s = 0.0;
  double end_s = 0.0;
  bool ok = false;
  ArticulationModel model;  // valid when ok
  std::string error;        // set when !ok
};

struct PipelineResult {
  SegmentList segments;
  DescribedSegments captions;
  MatchAssignment assignment;
  std::vector<ArticulationEntry> articulations;
  std::string match_report_json;
  std::string articulation_report_json;  // empty "articulations" array when no keyword matched
};

/// split -> caption -> distance matrix -> match -> articulation fits for
/// instructions that contain an articulation keyword.
PipelineResult run_pipeline(const PoseTrack& track, const InstructionScript& script,
                            const EmbeddingTable& table, const PipelineConfig& cfg);

/// File-level variant: loads pose, instructions and embeddings per config.
PipelineResult run_pipeline_files(const std::string& pose_path,
                                  const std::string& instructions_path,
                                  const PipelineConfig& cfg);

// Batch evaluation over a dataset directory of triples
// NAME.pose.csv / NAME.truth.json / NAME.instructions.txt.
std::string run_eval_split(const std::string& dataset_dir, const PipelineConfig& cfg);
std::string run_eval_match(const std::string& dataset_dir, const PipelineConfig& cfg);

// Synthetic dataset plumbing shared by the synth subcommand and tests.
SynthPlan plan_from_json(const std::string& text);
std::string plan_to_json(const SynthPlan& plan);
SynthPlan default_synth_plan();

/// Re-draws waypoint positions (same counts, captions and durations),
/// deterministic per seed.
SynthPlan randomize_plan(const SynthPlan& base, std::uint64_t seed);

/// Writes NAME.pose.csv, NAME.truth.json, NAME.instructions.txt and
/// NAME.captions.json into `dir`.
void write_synthetic_video(const std::string& dir, const std::string& name,
                           const SyntheticDemo& demo);

}  // namespace lfokit
