// lfokit command line: split demonstrations at hand-speed minima, match
// motion descriptions to verbal instructions, fit articulation models,
// evaluate both stages, and generate synthetic demonstrations.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "lfokit/errors.hpp"
#include "lfokit/pipeline.hpp"

namespace {

using namespace lfokit;

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for write: " + path);
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// The config file is applied before flag parsing, so explicit flags win.
PipelineConfig preparse_config(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--config") return config_from_file(argv[i + 1]);
  return {};
}

const std::map<std::string, GroupCost> kGroupCostNames{
    {"to_instruction", GroupCost::kToInstruction}, {"chain", GroupCost::kChain}};
const std::map<std::string, OovPolicy> kOovPolicyNames{{"drop", OovPolicy::kDrop},
                                                       {"error", OovPolicy::kError}};

void add_split_flags(CLI::App* cmd, PipelineConfig& cfg, std::string& config_path) {
  cmd->add_option("--config", config_path, "pipeline config JSON (applied before flags)");
  cmd->add_option("--smoothing-window,--smoothing_window", cfg.smoothing_window,
                  "odd moving-average window in samples");
  cmd->add_option("--min-separation,--min_separation_s", cfg.min_separation_s,
                  "minimum change-point separation in seconds (0 = off)");
  cmd->add_option("--uniform-period,--uniform_period_s", cfg.uniform_period_s,
                  "replace the velocity splitter with uniform sampling at this period");
}

void add_distance_flags(CLI::App* cmd, PipelineConfig& cfg) {
  cmd->add_option("--c-dist,--c_dist", cfg.costs.c_dist, "distance coefficient");
  cmd->add_option("--c-group,--c_group", cfg.costs.c_group, "grouping coefficient");
  cmd->add_option("--c-skip,--c_skip", cfg.costs.c_skip, "skip coefficient");
  cmd->add_option("--c-nothing,--c_nothing", cfg.distance.c_nothing,
                  "constant distance for the reserved nothing label");
  cmd->add_option("--group-cost,--group_cost", cfg.group_cost,
                  "grouping term: to_instruction or chain")
      ->transform(CLI::CheckedTransformer(kGroupCostNames, CLI::ignore_case));
  cmd->add_option("--oov-policy,--oov_policy", cfg.distance.oov_policy,
                  "out-of-vocabulary handling: drop or error")
      ->transform(CLI::CheckedTransformer(kOovPolicyNames, CLI::ignore_case));
  cmd->add_flag("--remove-stop-words,--remove_stop_words", cfg.distance.remove_stop_words,
                "drop stop words before the distance solve");
  cmd->add_flag("--l2-normalize,--l2_normalize", cfg.distance.l2_normalize,
                "L2-normalize embeddings before the distance solve");
  cmd->add_option("--embeddings,--embeddings_path", cfg.embeddings_path,
                  "word2vec text embeddings");
}

int run_fit(const std::string& pose_path, const std::string& kind, double start_s, double end_s,
            const std::string& out_path) {
  PoseTrack track = load_pose_track_file(pose_path);
  std::vector<Eigen::Vector3d> points;
  for (const auto& s : track.samples)
    if (s.t >= start_s && s.t <= end_s) points.push_back(s.p);
  auto vec = [](const Eigen::Vector3d& v) { return nlohmann::json::array({v[0], v[1], v[2]}); };
  std::string report;
  if (kind == "auto") {
    report = articulation_to_json(classify_articulation(points));
  } else if (kind == "line") {
    LineFit fit = fit_line(points);
    nlohmann::json j{{"kind", "prismatic"},
                     {"direction", vec(fit.direction)},
                     {"range_m", fit.range_m},
                     {"rms_residual_m", fit.rms_residual_m}};
    report = j.dump(2) + "\n";
  } else if (kind == "circle") {
    CircleFit fit = fit_circle(points);
    nlohmann::json j{{"kind", "revolute"},
                     {"axis", vec(fit.axis)},
                     {"center", vec(fit.center)},
                     {"radius", fit.radius_m},
                     {"swept_angle_rad", fit.swept_angle_rad},
                     {"rms_residual_m", fit.rms_residual_m}};
    report = j.dump(2) + "\n";
  } else {
    throw InvalidParameter("--kind must be auto, line, or circle");
  }
  write_output(out_path, report);
  return 0;
}

int run_synth(const std::string& out_dir, const std::string& name, int count,
              const std::string& plan_path, double noise_sigma, std::uint64_t seed,
              bool randomize) {
  SynthPlan base = plan_path.empty() ? default_synth_plan() : plan_from_json(read_file(plan_path));
  for (int i = 0; i < count; ++i) {
    SynthPlan plan = randomize ? randomize_plan(base, seed + static_cast<std::uint64_t>(i)) : base;
    SyntheticDemo demo =
        synthesize(plan, noise_sigma, seed + 100000 + static_cast<std::uint64_t>(i));
    std::string video_name = name;
    if (count > 1) {
      char suffix[16];
      std::snprintf(suffix, sizeof(suffix), "_%03d", i);
      video_name += suffix;
    }
    write_synthetic_video(out_dir, video_name, demo);
  }
  std::cout << "wrote " << count << " video(s) to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  PipelineConfig cfg;
  try {
    cfg = preparse_config(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  CLI::App app{"hand-trajectory demonstration splitting, matching, and evaluation"};
  app.require_subcommand(1);
  std::string config_path;  // consumed by preparse, registered so CLI11 accepts it

  auto* split_cmd = app.add_subcommand("split", "split a pose track at speed minima");
  std::string pose_path, split_out;
  split_cmd->add_option("--pose", pose_path, "pose CSV/JSON-lines file")->required();
  split_cmd->add_option("--out", split_out, "segment JSON output (default stdout)");
  add_split_flags(split_cmd, cfg, config_path);

  auto* match_cmd = app.add_subcommand("match", "run split + caption + match (+ optional fits)");
  std::string match_pose, match_instructions, match_out, match_fit_out;
  match_cmd->add_option("--pose", match_pose, "pose CSV/JSON-lines file")->required();
  match_cmd->add_option("--instructions", match_instructions, "verbal instructions, one per line")
      ->required();
  auto* captions_opt = match_cmd->add_option("--captions,--captions_path", cfg.captions_path,
                                             "caption JSON (file provider)");
  auto* truth_opt = match_cmd->add_option("--truth,--truth_path", cfg.truth_path,
                                          "ground-truth JSON (mock provider)");
  match_cmd->add_option("--error-rate,--mock_error_rate", cfg.mock_error_rate,
                        "mock captioner error rate");
  match_cmd->add_option("--seed,--mock_seed", cfg.mock_seed, "mock captioner seed");
  match_cmd->add_option("--out", match_out, "match report output (default stdout)");
  match_cmd->add_option("--fit-out", match_fit_out, "articulation report output");
  add_split_flags(match_cmd, cfg, config_path);
  add_distance_flags(match_cmd, cfg);

  auto* fit_cmd = app.add_subcommand("fit", "fit articulation parameters to a track interval");
  std::string fit_pose, fit_out, fit_kind = "auto";
  double fit_start = -1e300, fit_end = 1e300;
  fit_cmd->add_option("--pose", fit_pose, "pose CSV/JSON-lines file")->required();
  fit_cmd->add_option("--start", fit_start, "interval start in seconds (default: track start)");
  fit_cmd->add_option("--end", fit_end, "interval end in seconds (default: track end)");
  fit_cmd->add_option("--kind", fit_kind, "auto (default), line, or circle");
  fit_cmd->add_option("--out", fit_out, "articulation JSON output (default stdout)");

  auto* eval_split_cmd = app.add_subcommand("eval-split", "change-point metrics over a dataset");
  std::string es_dataset, es_out;
  eval_split_cmd->add_option("--dataset", es_dataset, "directory of video triples")->required();
  eval_split_cmd->add_option("--margin,--change_point_margin_s", cfg.change_point_margin_s,
                             "matching margin in seconds");
  eval_split_cmd->add_option("--uniform-periods,--eval_uniform_periods", cfg.eval_uniform_periods,
                             "baseline sampling periods in seconds");
  eval_split_cmd->add_option("--out", es_out, "report output (default stdout)");
  add_split_flags(eval_split_cmd, cfg, config_path);

  auto* eval_match_cmd = app.add_subcommand("eval-match", "matching AP over a dataset");
  std::string em_dataset, em_out;
  eval_match_cmd->add_option("--dataset", em_dataset, "directory of video triples")->required();
  eval_match_cmd->add_option("--error-rate,--mock_error_rate", cfg.mock_error_rate,
                             "mock captioner error rate");
  eval_match_cmd->add_option("--seed,--mock_seed", cfg.mock_seed, "base mock captioner seed");
  eval_match_cmd->add_option("--baseline-period,--eval_baseline_period_s",
                             cfg.eval_baseline_period_s, "uniform baseline period, 0 disables");
  eval_match_cmd->add_option("--iou-thresholds,--iou_thresholds", cfg.iou_thresholds,
                             "IoU thresholds for AP");
  eval_match_cmd->add_option("--out", em_out, "report output (default stdout)");
  add_split_flags(eval_match_cmd, cfg, config_path);
  add_distance_flags(eval_match_cmd, cfg);

  auto* synth_cmd = app.add_subcommand("synth", "generate synthetic demonstrations");
  std::string synth_dir, synth_name = "demo", synth_plan;
  int synth_count = 1;
  double synth_sigma = 0.0;
  std::uint64_t synth_seed = 0;
  bool synth_randomize = false;
  synth_cmd->add_option("--out-dir", synth_dir, "output directory")->required();
  synth_cmd->add_option("--name", synth_name, "video name stem (default demo)");
  synth_cmd->add_option("--count", synth_count, "number of videos")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--plan", synth_plan, "waypoint/caption plan JSON (default built-in)");
  synth_cmd->add_option("--noise-sigma", synth_sigma, "position noise sigma in meters");
  synth_cmd->add_option("--seed", synth_seed, "base seed");
  synth_cmd->add_flag("--randomize", synth_randomize, "re-draw waypoints per video");

  CLI11_PARSE(app, argc, argv);

  try {
    if (split_cmd->parsed()) {
      cfg.validate();
      PoseTrack track = load_pose_track_file(pose_path);
      SegmentList segments = cfg.uniform_period_s > 0.0
                                 ? uniform_split(track, cfg.uniform_period_s)
                                 : split(track, cfg.smoothing_window, cfg.min_separation_s);
      write_output(split_out, segments_to_json(segments));
      return 0;
    }
    if (match_cmd->parsed()) {
      if (truth_opt->count() > 0)
        cfg.caption_provider = CaptionProviderKind::kMock;
      else if (captions_opt->count() > 0)
        cfg.caption_provider = CaptionProviderKind::kFile;
      cfg.validate();
      PipelineResult result = run_pipeline_files(match_pose, match_instructions, cfg);
      write_output(match_out, result.match_report_json);
      if (!match_fit_out.empty()) write_output(match_fit_out, result.articulation_report_json);
      return 0;
    }
    if (fit_cmd->parsed()) return run_fit(fit_pose, fit_kind, fit_start, fit_end, fit_out);
    if (eval_split_cmd->parsed()) {
      cfg.validate();
      write_output(es_out, run_eval_split(es_dataset, cfg));
      return 0;
    }
    if (eval_match_cmd->parsed()) {
      cfg.validate();
      write_output(em_out, run_eval_match(em_dataset, cfg));
      return 0;
    }
    if (synth_cmd->parsed())
      return run_synth(synth_dir, synth_name, synth_count, synth_plan, synth_sigma, synth_seed,
                       synth_randomize);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
