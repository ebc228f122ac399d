#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>
#include <random>

#include "fixtures.hpp"
#include "lfokit/errors.hpp"
#include "lfokit/pipeline.hpp"
#include "oracles.hpp"

using namespace lfokit;

namespace {

// Microwave scenario: open the door along a hinge arc, dwell (noise), put a
// cup with a straight reach, close the door along another arc.
struct MicrowaveFixture {
  PoseTrack track;
  std::vector<TimedCaption> sections;
  InstructionScript script;
};

MicrowaveFixture microwave_fixture(std::uint64_t seed) {
  MicrowaveFixture fx;
  const double rate = 30.0;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double sigma = 0.0015;

  const Eigen::Vector3d hinge(0.0, 0.4, 0.0);
  const double door_radius = 0.4;
  auto door_arc = [&](double tau) -> Eigen::Vector3d {  // -pi/2 (closed) to 0 (open)
    double a = -M_PI / 2.0 + (M_PI / 2.0) * oracles::min_jerk_position(tau);
    return hinge + door_radius * Eigen::Vector3d(std::cos(a), std::sin(a), 0.0);
  };
  const Eigen::Vector3d cup_from = door_arc(1.0);
  const Eigen::Vector3d cup_to(0.3, 0.0, 0.2);
  const Eigen::Vector3d hinge2(0.3, 0.35, 0.2);
  const double close_radius = (cup_to - hinge2).norm();
  auto close_arc = [&](double tau) -> Eigen::Vector3d {
    double a0 = std::atan2((cup_to - hinge2).y(), (cup_to - hinge2).x());
    double a = a0 + 1.2 * oracles::min_jerk_position(tau);
    return hinge2 + close_radius * Eigen::Vector3d(std::cos(a), std::sin(a), 0.0);
  };

  fx.sections = {{0.0, 2.0, "open a microwave"},
                 {2.0, 2.6, "nothing"},
                 {2.6, 4.6, "put a cup"},
                 {4.6, 6.6, "close the microwave"}};
  Eigen::Vector3d walk = Eigen::Vector3d::Zero();
  int prev_section = 0;
  for (int k = 0; k <= 198; ++k) {
    double t = k / rate;
    int section = t <= 2.0 ? 0 : (t <= 2.6 ? 1 : (t <= 4.6 ? 2 : 3));
    if (section != prev_section) walk.setZero(), prev_section = section;
    Eigen::Vector3d p;
    if (section == 0) {
      p = door_arc(t / 2.0);
    } else if (section == 1) {
      walk += (sigma / 3.0) * Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));
      p = cup_from + walk;
    } else if (section == 2) {
      p = cup_from + oracles::min_jerk_position((t - 2.6) / 2.0) * (cup_to - cup_from);
    } else {
      p = close_arc((t - 4.6) / 2.0);
    }
    p += sigma * Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));
    fx.track.samples.push_back({t, p, std::nullopt});
  }
  fx.script.instructions = {Sentence::parse("open a microwave"), Sentence::parse("put a cup"),
                            Sentence::parse("close the microwave")};
  return fx;
}

std::string data_file(const std::string& name) {
  return std::string(LFOKIT_TEST_DATA) + "/" + name;
}

}  // namespace

TEST_CASE("config JSON overrides selected fields and validates") {
  PipelineConfig cfg = config_from_json(R"({
    "smoothing_window": 7,
    "c_skip": 0.25,
    "group_cost": "chain",
    "c_nothing": 3.5,
    "oov_policy": "error",
    "articulation_keywords": ["open"]
  })");
  CHECK(cfg.smoothing_window == 7);
  CHECK(cfg.costs.c_skip == 0.25);
  CHECK(cfg.costs.c_dist == 1.0);  // untouched default
  CHECK(cfg.group_cost == GroupCost::kChain);
  CHECK(cfg.distance.c_nothing == 3.5);
  CHECK(cfg.distance.oov_policy == OovPolicy::kError);
  CHECK(cfg.articulation_keywords == std::vector<std::string>{"open"});

  CHECK_THROWS_AS(config_from_json(R"({"smoothing_window": 4})"), InvalidParameter);
  CHECK_THROWS_AS(config_from_json(R"({"group_cost": "bogus"})"), InvalidParameter);
  CHECK_THROWS_AS(config_from_json("[1,2]"), MalformedInput);
  CHECK_THROWS_AS(config_from_json("{nope"), MalformedInput);
}

TEST_CASE("instruction scripts load one sentence per line") {
  fixtures::TempDir tmp("script");
  fixtures::write_text(tmp.file("instructions.txt"),
                       "Open a microwave\n\nput a cup\r\nclose the microwave\n");
  InstructionScript script = load_instruction_script(tmp.file("instructions.txt"));
  REQUIRE(script.size() == 3);
  CHECK(script.instructions[0].text() == "open a microwave");
  CHECK(script.instructions[1].text() == "put a cup");
}

TEST_CASE("pipeline matches the microwave scenario and skips the dwell") {
  MicrowaveFixture fx = microwave_fixture(42);
  fixtures::TempDir tmp("pipe");
  fixtures::write_text(tmp.file("captions.json"), captions_to_json(fx.sections));

  PipelineConfig cfg;
  cfg.captions_path = tmp.file("captions.json");
  EmbeddingTable table = load_embeddings_file(data_file("embeddings_demo.txt"));
  PipelineResult result = run_pipeline(fx.track, fx.script, table, cfg);

  // all skipped segments live inside the dwell, and each instruction's
  // interval lines up with its true section
  for (int idx : result.assignment.skipped) {
    const auto& seg = result.segments.segments[static_cast<std::size_t>(idx)];
    CHECK(seg.start_s >= 1.8);
    CHECK(seg.end_s <= 2.8);
  }
  std::vector<Segment> truth{{0.0, 2.0}, {2.6, 4.6}, {4.6, 6.6}};
  MatchScore score = score_matching(result.assignment, truth);
  for (double iou : score.per_instruction_iou) CHECK(iou >= 0.9);

  // the "open" and "close" instructions get articulation fits; the door arc
  // must come out revolute with the hinge radius
  REQUIRE(!result.articulations.empty());
  const ArticulationEntry* open_entry = nullptr;
  for (const auto& e : result.articulations)
    if (e.instruction == 0) open_entry = &e;
  REQUIRE(open_entry != nullptr);
  REQUIRE(open_entry->ok);
  CHECK(open_entry->model.kind == ArticulationKind::kRevolute);
  CHECK(open_entry->model.circle.radius_m == doctest::Approx(0.4).epsilon(0.05));
  CHECK(open_entry->model.circle.swept_angle_rad == doctest::Approx(M_PI / 2).epsilon(0.1));

  auto report = nlohmann::json::parse(result.articulation_report_json);
  REQUIRE(report.contains("articulations"));
  CHECK(report["articulations"].size() == result.articulations.size());
}

TEST_CASE("mock captions with zero error rate reproduce the truth intervals") {
  SynthPlan plan;
  plan.waypoints = {{0, 0, 0}, {0.35, 0, 0}, {0.35, 0.3, 0.1}, {0.0, 0.3, 0.25}};
  plan.captions = {"open a microwave", "put a cup", "close the microwave"};
  plan.default_reach_duration_s = 2.0;
  plan.dwells = {{0, 0.6}};
  SyntheticDemo demo = synthesize(plan, 0.0015, 11);

  fixtures::TempDir tmp("mock");
  fixtures::write_text(tmp.file("truth.json"), ground_truth_to_json(ground_truth_of(demo)));
  PipelineConfig cfg;
  cfg.caption_provider = CaptionProviderKind::kMock;
  cfg.truth_path = tmp.file("truth.json");
  cfg.mock_error_rate = 0.0;
  EmbeddingTable table = load_embeddings_file(data_file("embeddings_demo.txt"));
  PipelineResult result = run_pipeline(demo.track, demo.script, table, cfg);

  std::vector<Segment> truth;
  for (const auto& item : demo.true_segments.items)
    if (!item.description.is_nothing()) truth.push_back(item.segment);
  MatchScore score = score_matching(result.assignment, truth);
  CHECK(score.ap_at.at(0.95) == 1.0);
}

TEST_CASE("infeasible matches carry the segment and instruction counts") {
  // dyadic velocity/rate: exactly constant speed, so exactly one segment
  auto track = fixtures::linear_track({0.25, 0, 0}, 1.0, 32.0);
  InstructionScript script;
  script.instructions = {Sentence::parse("open a door"), Sentence::parse("take a cup")};
  EmbeddingTable table = load_embeddings_file(data_file("embeddings_demo.txt"));
  fixtures::TempDir tmp("infeasible");
  std::vector<TimedCaption> captions = {{0.0, 1.0, "open a door"}};
  fixtures::write_text(tmp.file("captions.json"), captions_to_json(captions));
  PipelineConfig cfg;
  cfg.captions_path = tmp.file("captions.json");
  try {
    run_pipeline(track, script, table, cfg);
    FAIL("expected Infeasible");
  } catch (const Infeasible& e) {
    std::string msg = e.what();
    CHECK(msg.find("M=1") != std::string::npos);
    CHECK(msg.find("N=2") != std::string::npos);
  }
}

TEST_CASE("eval-split reports mean recall 1.0 on noiseless synthetic videos") {
  fixtures::TempDir tmp("evalsplit");
  SynthPlan plan;
  plan.waypoints = {{0, 0, 0}, {0.3, 0, 0}, {0.3, 0.3, 0}, {0, 0.3, 0.2}};
  plan.captions = {"open a door", "take a cup", "place the cup"};
  for (int i = 0; i < 6; ++i) {
    char name[16];
    std::snprintf(name, sizeof(name), "vid_%02d", i);
    SynthPlan video_plan = randomize_plan(plan, 50 + static_cast<std::uint64_t>(i));
    write_synthetic_video(tmp.path().string(), name,
                          synthesize(video_plan, 0.0, 200 + static_cast<std::uint64_t>(i)));
  }
  PipelineConfig cfg;
  std::string report_text = run_eval_split(tmp.path().string(), cfg);
  auto report = nlohmann::json::parse(report_text);
  CHECK(report["video_count"] == 6);
  CHECK(report["mean"]["velocity"]["recall"].get<double>() == 1.0);
  CHECK(report["mean"]["uniform"].contains("0.5"));
  CHECK(report["videos"].size() == 6);

  // byte-identical on rerun
  CHECK(run_eval_split(tmp.path().string(), cfg) == report_text);
}

TEST_CASE("eval-match: velocity splitting beats the uniform baseline at IoU 0.95") {
  fixtures::TempDir tmp("evalmatch");
  SynthPlan plan = default_synth_plan();
  for (int i = 0; i < 8; ++i) {
    char name[16];
    std::snprintf(name, sizeof(name), "vid_%02d", i);
    SynthPlan video_plan = randomize_plan(plan, 90 + static_cast<std::uint64_t>(i));
    write_synthetic_video(tmp.path().string(), name,
                          synthesize(video_plan, 0.0015, 300 + static_cast<std::uint64_t>(i)));
  }
  PipelineConfig cfg;
  cfg.embeddings_path = data_file("embeddings_demo.txt");
  cfg.mock_error_rate = 0.0;
  std::string report_text = run_eval_match(tmp.path().string(), cfg);
  auto report = nlohmann::json::parse(report_text);
  double velocity = report["mean"]["velocity"]["ap_at"]["0.95"].get<double>();
  double uniform = report["mean"]["uniform"]["ap_at"]["0.95"].get<double>();
  CHECK(velocity >= 0.9);
  CHECK(velocity > uniform);

  CHECK(run_eval_match(tmp.path().string(), cfg) == report_text);
}

TEST_CASE("eval rejects an empty dataset directory") {
  fixtures::TempDir tmp("empty");
  PipelineConfig cfg;
  CHECK_THROWS_AS(run_eval_split(tmp.path().string(), cfg), InvalidInput);
}

TEST_CASE("synth plans round-trip through JSON") {
  SynthPlan plan = default_synth_plan();
  SynthPlan back = plan_from_json(plan_to_json(plan));
  CHECK(back.waypoints.size() == plan.waypoints.size());
  CHECK(back.captions == plan.captions);
  CHECK(back.default_reach_duration_s == plan.default_reach_duration_s);
  REQUIRE(back.dwells.size() == 1);
  CHECK(back.dwells[0].after_reach == plan.dwells[0].after_reach);

  CHECK_THROWS_AS(plan_from_json(R"({"waypoints": [[0,0,0]], "captions": []})"), InvalidInput);
}
