#include "lfokit/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "lfokit/errors.hpp"

namespace lfokit {
namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for write: " + path);
  out << content;
}

GroupCost parse_group_cost(const std::string& s) {
  if (s == "to_instruction") return GroupCost::kToInstruction;
  if (s == "chain") return GroupCost::kChain;
  throw InvalidParameter("group_cost must be 'to_instruction' or 'chain', got '" + s + "'");
}

OovPolicy parse_oov_policy(const std::string& s) {
  if (s == "drop") return OovPolicy::kDrop;
  if (s == "error") return OovPolicy::kError;
  throw InvalidParameter("oov_policy must be 'drop' or 'error', got '" + s + "'");
}

CaptionProviderKind parse_provider(const std::string& s) {
  if (s == "file") return CaptionProviderKind::kFile;
  if (s == "mock") return CaptionProviderKind::kMock;
  throw InvalidParameter("caption_provider must be 'file' or 'mock', got '" + s + "'");
}

bool keyword_hit(const Sentence& instruction, const std::vector<std::string>& keywords) {
  for (const auto& token : instruction.tokens)
    for (const auto& keyword : keywords)
      if (token.rfind(keyword, 0) == 0) return true;  // keyword is a token prefix
  return false;
}

DescribedSegments provide_captions(const SegmentList& segments, const PipelineConfig& cfg) {
  if (cfg.caption_provider == CaptionProviderKind::kFile) {
    if (cfg.captions_path.empty())
      throw InvalidParameter("file caption provider needs captions_path");
    return assign_captions(captions_from_json(read_file(cfg.captions_path)), segments);
  }
  if (cfg.truth_path.empty()) throw InvalidParameter("mock caption provider needs truth_path");
  GroundTruth truth = ground_truth_from_json(read_file(cfg.truth_path));
  double start = segments.segments.front().start_s;
  double end = segments.segments.back().end_s;
  SyntheticDemo demo;
  for (const auto& section : ground_truth_sections(truth, start, end))
    demo.true_segments.items.push_back(
        {{section.start_s, section.end_s}, Sentence::parse(section.text)});
  return mock_caption(demo, segments, cfg.mock_error_rate, cfg.mock_seed);
}

struct VideoPaths {
  std::string name;
  std::string pose, truth, instructions;
};

std::vector<VideoPaths> discover_dataset(const std::string& dir) {
  if (!fs::is_directory(dir)) throw InvalidInput("dataset directory not found: " + dir);
  std::vector<VideoPaths> videos;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::string file = entry.path().filename().string();
    const std::string suffix = ".pose.csv";
    if (file.size() <= suffix.size() || file.substr(file.size() - suffix.size()) != suffix)
      continue;
    std::string stem = file.substr(0, file.size() - suffix.size());
    VideoPaths v;
    v.name = stem;
    v.pose = (fs::path(dir) / (stem + ".pose.csv")).string();
    v.truth = (fs::path(dir) / (stem + ".truth.json")).string();
    v.instructions = (fs::path(dir) / (stem + ".instructions.txt")).string();
    if (!fs::exists(v.truth) || !fs::exists(v.instructions))
      throw InvalidInput("dataset video '" + stem + "' is missing truth or instructions");
    videos.push_back(std::move(v));
  }
  if (videos.empty()) throw InvalidInput("dataset directory has no *.pose.csv videos: " + dir);
  std::sort(videos.begin(), videos.end(),
            [](const VideoPaths& a, const VideoPaths& b) { return a.name < b.name; });
  return videos;
}

nlohmann::json score_json(const ChangePointScore& s) {
  return nlohmann::json::parse(change_point_score_to_json(s));
}

nlohmann::json score_json(const MatchScore& s) {
  return nlohmann::json::parse(match_score_to_json(s));
}

ChangePointSet interior_boundaries(const SegmentList& segments) {
  ChangePointSet set;
  for (std::size_t i = 0; i + 1 < segments.segments.size(); ++i)
    set.times.push_back(segments.segments[i].end_s);
  return set;
}

MatchScore run_match_once(const PoseTrack& track, const InstructionScript& script,
                          const EmbeddingTable& table, const PipelineConfig& cfg,
                          const std::vector<Segment>& truth_intervals) {
  PipelineResult result = run_pipeline(track, script, table, cfg);
  return score_matching(result.assignment, truth_intervals, cfg.iou_thresholds);
}

}  // namespace

void PipelineConfig::validate() const {
  if (smoothing_window < 1 || smoothing_window % 2 == 0)
    throw InvalidParameter("smoothing_window must be a positive odd sample count");
  if (min_separation_s < 0.0) throw InvalidParameter("min_separation_s must be >= 0");
  if (uniform_period_s < 0.0) throw InvalidParameter("uniform_period_s must be >= 0");
  if (costs.c_dist < 0.0 || costs.c_group < 0.0 || costs.c_skip < 0.0)
    throw InvalidParameter("match coefficients must be >= 0");
  if (!(distance.c_nothing >= 0.0) || !std::isfinite(distance.c_nothing))
    throw InvalidParameter("c_nothing must be finite and >= 0");
  if (!(change_point_margin_s > 0.0)) throw InvalidParameter("change_point_margin_s must be > 0");
  if (mock_error_rate < 0.0 || mock_error_rate > 1.0)
    throw InvalidParameter("mock_error_rate must be in [0, 1]");
  for (double tau : iou_thresholds)
    if (!(tau > 0.0) || tau > 1.0) throw InvalidParameter("IoU thresholds must be in (0, 1]");
  if (iou_thresholds.empty()) throw InvalidParameter("iou_thresholds must not be empty");
}

PipelineConfig config_from_json(const std::string& text, PipelineConfig base) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw MalformedInput(std::string("config JSON: ") + e.what());
  }
  if (!j.is_object()) throw MalformedInput("config JSON must be an object");
  PipelineConfig cfg = std::move(base);
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("smoothing_window", cfg.smoothing_window);
  get("min_separation_s", cfg.min_separation_s);
  get("uniform_period_s", cfg.uniform_period_s);
  get("c_dist", cfg.costs.c_dist);
  get("c_group", cfg.costs.c_group);
  get("c_skip", cfg.costs.c_skip);
  if (j.contains("group_cost")) cfg.group_cost = parse_group_cost(j.at("group_cost"));
  get("c_nothing", cfg.distance.c_nothing);
  if (j.contains("oov_policy")) cfg.distance.oov_policy = parse_oov_policy(j.at("oov_policy"));
  get("remove_stop_words", cfg.distance.remove_stop_words);
  get("l2_normalize", cfg.distance.l2_normalize);
  get("iou_thresholds", cfg.iou_thresholds);
  get("change_point_margin_s", cfg.change_point_margin_s);
  get("embeddings_path", cfg.embeddings_path);
  if (j.contains("caption_provider"))
    cfg.caption_provider = parse_provider(j.at("caption_provider"));
  get("captions_path", cfg.captions_path);
  get("truth_path", cfg.truth_path);
  get("mock_error_rate", cfg.mock_error_rate);
  get("mock_seed", cfg.mock_seed);
  get("articulation_keywords", cfg.articulation_keywords);
  get("eval_uniform_periods", cfg.eval_uniform_periods);
  get("eval_baseline_period_s", cfg.eval_baseline_period_s);
  cfg.validate();
  return cfg;
}

PipelineConfig config_from_file(const std::string& path, PipelineConfig base) {
  return config_from_json(read_file(path), std::move(base));
}

InstructionScript load_instruction_script(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open instructions file: " + path);
  InstructionScript script;
  std::string line;
  while (std::getline(in, line)) {
    std::string stripped = line;
    while (!stripped.empty() && (stripped.back() == '\r' || stripped.back() == ' '))
      stripped.pop_back();
    if (stripped.empty()) continue;
    script.instructions.push_back(Sentence::parse(stripped));
  }
  script.validate();
  return script;
}

void save_instruction_script(const InstructionScript& script, const std::string& path) {
  std::string out;
  for (const auto& instr : script.instructions) out += instr.text() + "\n";
  write_file(path, out);
}

PipelineResult run_pipeline(const PoseTrack& track, const InstructionScript& script,
                            const EmbeddingTable& table, const PipelineConfig& cfg) {
  cfg.validate();
  script.validate();

  PipelineResult result;
  result.segments = cfg.uniform_period_s > 0.0
                        ? uniform_split(track, cfg.uniform_period_s)
                        : split(track, cfg.smoothing_window, cfg.min_separation_s);
  result.captions = provide_captions(result.segments, cfg);

  Eigen::MatrixXd matrix = build_distance_matrix(result.captions, script, table, cfg.distance);
  std::vector<double> chain;
  if (cfg.group_cost == GroupCost::kChain)
    chain = caption_chain_distances(result.captions, table, cfg.distance);
  MatchOptions opts{cfg.costs, cfg.group_cost};
  result.assignment = match(result.captions, script, matrix, opts, chain);
  result.match_report_json = explain(result.assignment, script);

  nlohmann::json articulation_report = nlohmann::json::array();
  for (const auto& im : result.assignment.per_instruction) {
    const Sentence& instruction = script.instructions[static_cast<std::size_t>(im.instruction)];
    if (!keyword_hit(instruction, cfg.articulation_keywords)) continue;
    ArticulationEntry entry;
    entry.instruction = im.instruction;
    entry.text = instruction.text();
    entry.start_s = im.start_s;
    entry.end_s = im.end_s;
    std::vector<Eigen::Vector3d> points;
    for (const auto& sample : track.samples)
      if (sample.t >= im.start_s && sample.t <= im.end_s) points.push_back(sample.p);
    nlohmann::json entry_json{{"instruction", entry.instruction},
                              {"text", entry.text},
                              {"start_s", entry.start_s},
                              {"end_s", entry.end_s}};
    try {
      entry.model = classify_articulation(points);
      entry.ok = true;
      entry_json["model"] = nlohmann::json::parse(articulation_to_json(entry.model));
    } catch (const Error& e) {
      entry.ok = false;
      entry.error = e.what();
      entry_json["error"] = entry.error;
    }
    result.articulations.push_back(entry);
    articulation_report.push_back(entry_json);
  }
  result.articulation_report_json =
      nlohmann::json{{"articulations", articulation_report}}.dump(2) + "\n";
  return result;
}

PipelineResult run_pipeline_files(const std::string& pose_path,
                                  const std::string& instructions_path,
                                  const PipelineConfig& cfg) {
  PoseTrack track = load_pose_track_file(pose_path);
  InstructionScript script = load_instruction_script(instructions_path);
  EmbeddingTable table = load_embeddings_file(cfg.embeddings_path);
  return run_pipeline(track, script, table, cfg);
}

std::string run_eval_split(const std::string& dataset_dir, const PipelineConfig& cfg) {
  cfg.validate();
  auto videos = discover_dataset(dataset_dir);
  nlohmann::json per_video = nlohmann::json::array();
  double recall_sum = 0.0, fpr_sum = 0.0;
  std::map<std::string, std::pair<double, double>> uniform_sums;  // period -> (recall, fpr)
  for (const auto& video : videos) {
    PoseTrack track = load_pose_track_file(video.pose);
    GroundTruth truth = ground_truth_from_json(read_file(video.truth));
    ChangePointSet truth_points{truth.change_points_s};
    SegmentList segments = split(track, cfg.smoothing_window, cfg.min_separation_s);
    ChangePointScore velocity =
        score_change_points(interior_boundaries(segments), truth_points, cfg.change_point_margin_s);
    recall_sum += velocity.recall;
    fpr_sum += velocity.false_positive_rate;
    nlohmann::json entry{{"name", video.name}, {"velocity", score_json(velocity)}};
    nlohmann::json uniform = nlohmann::json::object();
    for (double period : cfg.eval_uniform_periods) {
      char key[32];
      std::snprintf(key, sizeof(key), "%g", period);
      ChangePointScore baseline = score_change_points(
          interior_boundaries(uniform_split(track, period)), truth_points,
          cfg.change_point_margin_s);
      uniform[key] = score_json(baseline);
      uniform_sums[key].first += baseline.recall;
      uniform_sums[key].second += baseline.false_positive_rate;
    }
    if (!cfg.eval_uniform_periods.empty()) entry["uniform"] = uniform;
    per_video.push_back(entry);
  }
  const auto count = static_cast<double>(videos.size());
  nlohmann::json mean{{"velocity",
                       {{"recall", recall_sum / count}, {"false_positive_rate", fpr_sum / count}}}};
  if (!uniform_sums.empty()) {
    nlohmann::json uniform_mean = nlohmann::json::object();
    for (const auto& [key, sums] : uniform_sums)
      uniform_mean[key] = {{"recall", sums.first / count},
                           {"false_positive_rate", sums.second / count}};
    mean["uniform"] = uniform_mean;
  }
  nlohmann::json report{{"margin_s", cfg.change_point_margin_s},
                        {"video_count", videos.size()},
                        {"videos", per_video},
                        {"mean", mean}};
  return report.dump(2) + "\n";
}

std::string run_eval_match(const std::string& dataset_dir, const PipelineConfig& cfg) {
  cfg.validate();
  auto videos = discover_dataset(dataset_dir);
  if (cfg.embeddings_path.empty()) throw InvalidParameter("eval-match needs embeddings_path");
  EmbeddingTable table = load_embeddings_file(cfg.embeddings_path);

  nlohmann::json per_video = nlohmann::json::array();
  std::map<double, double> velocity_ap_sum, uniform_ap_sum;
  std::uint64_t video_index = 0;
  for (const auto& video : videos) {
    PoseTrack track = load_pose_track_file(video.pose);
    InstructionScript script = load_instruction_script(video.instructions);
    GroundTruth truth = ground_truth_from_json(read_file(video.truth));
    if (truth.instructions.size() != script.size())
      throw InvalidInput("video '" + video.name + "': truth has " +
                         std::to_string(truth.instructions.size()) + " instructions, script has " +
                         std::to_string(script.size()));
    std::vector<Segment> truth_intervals;
    for (const auto& instr : truth.instructions)
      truth_intervals.push_back({instr.start_s, instr.end_s});

    PipelineConfig video_cfg = cfg;
    video_cfg.caption_provider = CaptionProviderKind::kMock;
    video_cfg.truth_path = video.truth;
    video_cfg.mock_seed = cfg.mock_seed + video_index;
    video_cfg.uniform_period_s = 0.0;
    MatchScore velocity = run_match_once(track, script, table, video_cfg, truth_intervals);
    for (const auto& [tau, ap] : velocity.ap_at) velocity_ap_sum[tau] += ap;

    nlohmann::json entry{{"name", video.name}, {"velocity", score_json(velocity)}};
    if (cfg.eval_baseline_period_s > 0.0) {
      video_cfg.uniform_period_s = cfg.eval_baseline_period_s;
      MatchScore uniform = run_match_once(track, script, table, video_cfg, truth_intervals);
      for (const auto& [tau, ap] : uniform.ap_at) uniform_ap_sum[tau] += ap;
      entry["uniform"] = score_json(uniform);
    }
    per_video.push_back(entry);
    ++video_index;
  }

  const auto count = static_cast<double>(videos.size());
  auto mean_ap = [&](const std::map<double, double>& sums) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [tau, sum] : sums) {
      char key[32];
      std::snprintf(key, sizeof(key), "%g", tau);
      out[key] = sum / count;
    }
    return out;
  };
  nlohmann::json mean{{"velocity", {{"ap_at", mean_ap(velocity_ap_sum)}}}};
  if (cfg.eval_baseline_period_s > 0.0) {
    mean["uniform"] = {{"ap_at", mean_ap(uniform_ap_sum)}};
    mean["baseline_period_s"] = cfg.eval_baseline_period_s;
  }
  nlohmann::json report{{"thresholds", cfg.iou_thresholds},
                        {"mock_error_rate", cfg.mock_error_rate},
                        {"video_count", videos.size()},
                        {"videos", per_video},
                        {"mean", mean}};
  return report.dump(2) + "\n";
}

SynthPlan plan_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw MalformedInput(std::string("plan JSON: ") + e.what());
  }
  SynthPlan plan;
  if (!j.is_object() || !j.contains("waypoints") || !j.contains("captions"))
    throw MalformedInput("plan JSON needs waypoints and captions");
  for (const auto& w : j.at("waypoints")) {
    if (!w.is_array() || w.size() != 3) throw MalformedInput("waypoints must be [x,y,z] triples");
    plan.waypoints.emplace_back(w[0].get<double>(), w[1].get<double>(), w[2].get<double>());
  }
  plan.captions = j.at("captions").get<std::vector<std::string>>();
  if (j.contains("reach_duration_s")) plan.default_reach_duration_s = j.at("reach_duration_s");
  if (j.contains("reach_durations_s"))
    plan.reach_durations_s = j.at("reach_durations_s").get<std::vector<double>>();
  if (j.contains("rate_hz")) plan.rate_hz = j.at("rate_hz");
  if (j.contains("dwells"))
    for (const auto& d : j.at("dwells"))
      plan.dwells.push_back({d.at("after_reach").get<int>(), d.at("duration_s").get<double>()});
  plan.validate();
  return plan;
}

std::string plan_to_json(const SynthPlan& plan) {
  nlohmann::json j;
  j["waypoints"] = nlohmann::json::array();
  for (const auto& w : plan.waypoints) j["waypoints"].push_back({w[0], w[1], w[2]});
  j["captions"] = plan.captions;
  if (!plan.reach_durations_s.empty())
    j["reach_durations_s"] = plan.reach_durations_s;
  else
    j["reach_duration_s"] = plan.default_reach_duration_s;
  j["rate_hz"] = plan.rate_hz;
  j["dwells"] = nlohmann::json::array();
  for (const auto& d : plan.dwells)
    j["dwells"].push_back({{"after_reach", d.after_reach}, {"duration_s", d.duration_s}});
  return j.dump(2) + "\n";
}

SynthPlan default_synth_plan() {
  SynthPlan plan;
  plan.waypoints = {{0.0, 0.0, 0.3}, {0.35, 0.0, 0.3}, {0.35, 0.3, 0.35}, {0.0, 0.25, 0.4}};
  plan.captions = {"open a microwave", "put a cup", "close the microwave"};
  plan.default_reach_duration_s = 2.0;
  plan.dwells = {{0, 0.6}};
  return plan;
}

SynthPlan randomize_plan(const SynthPlan& base, std::uint64_t seed) {
  SynthPlan plan = base;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-0.3, 0.3);
  std::uniform_real_distribution<double> step(0.2, 0.4);
  std::normal_distribution<double> gauss(0.0, 1.0);
  plan.waypoints.front() = Eigen::Vector3d(coord(rng), coord(rng), coord(rng));
  for (std::size_t i = 1; i < plan.waypoints.size(); ++i) {
    Eigen::Vector3d direction(gauss(rng), gauss(rng), gauss(rng));
    while (direction.norm() < 1e-6) direction = Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));
    plan.waypoints[i] = plan.waypoints[i - 1] + step(rng) * direction.normalized();
  }
  return plan;
}

void write_synthetic_video(const std::string& dir, const std::string& name,
                           const SyntheticDemo& demo) {
  fs::create_directories(dir);
  save_pose_track_file(demo.track, (fs::path(dir) / (name + ".pose.csv")).string());
  write_file((fs::path(dir) / (name + ".truth.json")).string(),
             ground_truth_to_json(ground_truth_of(demo)));
  save_instruction_script(demo.script, (fs::path(dir) / (name + ".instructions.txt")).string());
  std::vector<TimedCaption> sections;
  for (const auto& item : demo.true_segments.items)
    sections.push_back({item.segment.start_s, item.segment.end_s, item.description.text()});
  write_file((fs::path(dir) / (name + ".captions.json")).string(), captions_to_json(sections));
}

}  // namespace lfokit
