#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>
#include <random>

#include "fixtures.hpp"
#include "lfokit/errors.hpp"
#include "lfokit/evalkit.hpp"
#include "lfokit/matcher.hpp"
#include "lfokit/splitter.hpp"

using namespace lfokit;

namespace {

MatchAssignment assignment_with_intervals(const std::vector<Segment>& intervals) {
  MatchAssignment a;
  for (std::size_t j = 0; j < intervals.size(); ++j) {
    InstructionMatch im;
    im.instruction = static_cast<int>(j);
    im.first_segment = static_cast<int>(j);
    im.segment_count = 1;
    im.start_s = intervals[j].start_s;
    im.end_s = intervals[j].end_s;
    a.per_instruction.push_back(im);
  }
  return a;
}

SynthPlan three_reach_plan() {
  SynthPlan plan;
  plan.waypoints = {{0, 0, 0}, {0.3, 0, 0}, {0.3, 0.3, 0}, {0.0, 0.3, 0.2}};
  plan.captions = {"open a door", "take a cup", "close the door"};
  plan.default_reach_duration_s = 1.0;
  return plan;
}

}  // namespace

TEST_CASE("perfect detection scores recall 1 and fpr 0") {
  ChangePointSet truth{{0.5, 1.25, 3.0}};
  ChangePointScore s = score_change_points(truth, truth, 0.1);
  CHECK(s.recall == 1.0);
  CHECK(s.false_positive_rate == 0.0);
  CHECK(s.n_cr == 3);
}

TEST_CASE("greedy matching follows the hand-traced example") {
  ChangePointSet truth{{1.0, 2.0, 3.0}};
  ChangePointSet detected{{1.05, 2.5, 2.9, 4.0}};
  ChangePointScore s = score_change_points(detected, truth, 0.1);
  CHECK(s.n_cr == 2);  // 1.05 <-> 1.0 and 2.9 <-> 3.0
  CHECK(s.n_cp == 3);
  CHECK(s.n_al == 4);
  CHECK(s.recall == doctest::Approx(2.0 / 3.0));
  CHECK(s.false_positive_rate == doctest::Approx(0.5));
}

TEST_CASE("greedy matching is one-to-one") {
  // one alarm cannot detect two true points
  ChangePointSet truth{{1.0, 1.05}};
  ChangePointSet detected{{1.02}};
  ChangePointScore s = score_change_points(detected, truth, 0.1);
  CHECK(s.n_cr == 1);
  CHECK(s.false_positive_rate == 0.0);
}

TEST_CASE("empty detections score zero recall and zero fpr") {
  ChangePointSet truth{{1.0, 2.0}};
  ChangePointScore s = score_change_points({}, truth, 0.1);
  CHECK(s.recall == 0.0);
  CHECK(s.false_positive_rate == 0.0);
  CHECK(s.n_al == 0);
}

TEST_CASE("score_change_points validates its inputs") {
  ChangePointSet some{{1.0}};
  CHECK_THROWS_AS(score_change_points(some, {}, 0.1), InvalidInput);
  CHECK_THROWS_AS(score_change_points(some, some, 0.0), InvalidParameter);
}

TEST_CASE("swapping detected and truth preserves the pair count") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int trial = 0; trial < 30; ++trial) {
    ChangePointSet a, b;
    for (int i = 0; i < 6; ++i) a.times.push_back(u(rng));
    for (int i = 0; i < 4; ++i) b.times.push_back(u(rng));
    std::sort(a.times.begin(), a.times.end());
    std::sort(b.times.begin(), b.times.end());
    ChangePointScore ab = score_change_points(a, b, 0.5);
    ChangePointScore ba = score_change_points(b, a, 0.5);
    CHECK(ab.n_cr == ba.n_cr);
  }
}

TEST_CASE("perfect prediction has AP 1 at every threshold") {
  std::vector<Segment> truth{{0.0, 1.0}, {1.0, 2.5}, {2.5, 3.0}};
  MatchScore s = score_matching(assignment_with_intervals(truth), truth);
  for (const auto& [tau, ap] : s.ap_at) CHECK(ap == 1.0);
  for (double iou : s.per_instruction_iou) CHECK(iou == doctest::Approx(1.0));
}

TEST_CASE("interval arithmetic example: IoU one third") {
  std::vector<Segment> truth{{5.0, 15.0}};
  MatchScore s = score_matching(assignment_with_intervals({{0.0, 10.0}}), truth);
  CHECK(s.per_instruction_iou[0] == doctest::Approx(1.0 / 3.0));
  CHECK(s.ap_at.at(0.5) == 0.0);
}

TEST_CASE("AP counts instructions above each threshold") {
  std::vector<Segment> truth{{0, 1}, {1, 2}, {2, 3}, {3, 4}};
  std::vector<Segment> predicted{{0, 1}, {1, 1.9}, {2, 2.6}, {3, 3.4}};
  MatchScore s = score_matching(assignment_with_intervals(predicted), truth);
  CHECK(s.per_instruction_iou[0] == doctest::Approx(1.0));
  CHECK(s.per_instruction_iou[1] == doctest::Approx(0.9));
  CHECK(s.per_instruction_iou[2] == doctest::Approx(0.6));
  CHECK(s.per_instruction_iou[3] == doctest::Approx(0.4));
  CHECK(s.ap_at.at(0.5) == doctest::Approx(0.75));
  CHECK(s.ap_at.at(0.75) == doctest::Approx(0.5));
  CHECK(s.ap_at.at(0.95) == doctest::Approx(0.25));
}

TEST_CASE("AP is non-increasing in the threshold") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Segment> truth, predicted;
    for (int j = 0; j < 5; ++j) {
      double base = j * 2.0;
      truth.push_back({base, base + 1.0});
      double jitter = 0.8 * u(rng);
      predicted.push_back({base + jitter, base + 1.0 + 0.5 * u(rng)});
    }
    MatchScore s = score_matching(assignment_with_intervals(predicted), truth,
                                  {0.1, 0.3, 0.5, 0.7, 0.9});
    double previous = 2.0;
    for (const auto& [tau, ap] : s.ap_at) {
      CHECK(ap <= previous + 1e-12);
      previous = ap;
    }
  }
}

TEST_CASE("score_matching rejects count mismatches") {
  std::vector<Segment> truth{{0, 1}, {1, 2}};
  CHECK_THROWS_AS(score_matching(assignment_with_intervals({{0, 1}}), truth), InvalidInput);
}

TEST_CASE("two waypoints produce a single-caption demo") {
  SynthPlan plan;
  plan.waypoints = {{0, 0, 0}, {0.3, 0, 0}};
  plan.captions = {"pull a drawer"};
  SyntheticDemo demo = synthesize(plan, 0.0, 1);
  CHECK(demo.true_change_points.times.empty());
  CHECK(demo.true_segments.size() == 1);
  CHECK(demo.script.size() == 1);
  CHECK(demo.noise_sections.empty());
}

TEST_CASE("four waypoints plus one dwell produce four sections") {
  SynthPlan plan = three_reach_plan();
  plan.dwells = {{1, 0.6}};
  SyntheticDemo demo = synthesize(plan, 0.001, 2);
  CHECK(demo.true_segments.size() == 4);
  CHECK(demo.script.size() == 3);
  REQUIRE(demo.noise_sections.size() == 1);
  CHECK(demo.true_segments.items[static_cast<std::size_t>(demo.noise_sections[0])]
            .description.is_nothing());
  CHECK(demo.true_change_points.size() == 3);
}

TEST_CASE("synthesis is bit-identical for a fixed seed") {
  SynthPlan plan = three_reach_plan();
  plan.dwells = {{0, 0.5}};
  SyntheticDemo a = synthesize(plan, 0.002, 1234);
  SyntheticDemo b = synthesize(plan, 0.002, 1234);
  REQUIRE(a.track.size() == b.track.size());
  for (std::size_t i = 0; i < a.track.size(); ++i) {
    CHECK(a.track.samples[i].t == b.track.samples[i].t);
    CHECK((a.track.samples[i].p - b.track.samples[i].p).norm() == 0.0);
  }
  SyntheticDemo c = synthesize(plan, 0.002, 1235);
  bool any_difference = false;
  for (std::size_t i = 0; i < a.track.size(); ++i)
    if ((a.track.samples[i].p - c.track.samples[i].p).norm() != 0.0) any_difference = true;
  CHECK(any_difference);
}

TEST_CASE("noiseless synthesis recovers true change points via split") {
  SynthPlan plan = three_reach_plan();
  SyntheticDemo demo = synthesize(plan, 0.0, 3);
  SegmentList segments = split(demo.track, 5);
  ChangePointSet detected;
  for (std::size_t i = 0; i + 1 < segments.size(); ++i)
    detected.times.push_back(segments.segments[i].end_s);
  ChangePointScore s = score_change_points(detected, demo.true_change_points, 0.1);
  CHECK(s.recall == 1.0);
  // every recovered point is within one sample period
  for (double truth_t : demo.true_change_points.times) {
    double best = 1e9;
    for (double t : detected.times) best = std::min(best, std::abs(t - truth_t));
    CHECK(best <= 1.0 / plan.rate_hz + 1e-9);
  }
}

TEST_CASE("mock captions echo the truth at error rate zero") {
  SynthPlan plan = three_reach_plan();
  plan.dwells = {{1, 0.6}};
  SyntheticDemo demo = synthesize(plan, 0.0, 4);
  SegmentList true_split;
  for (const auto& item : demo.true_segments.items) true_split.segments.push_back(item.segment);
  DescribedSegments captions = mock_caption(demo, true_split, 0.0, 9);
  REQUIRE(captions.size() == demo.true_segments.size());
  for (std::size_t i = 0; i < captions.size(); ++i)
    CHECK(captions.items[i].description == demo.true_segments.items[i].description);
}

TEST_CASE("error rate one replaces every caption") {
  SynthPlan plan = three_reach_plan();
  plan.dwells = {{0, 0.5}};
  SyntheticDemo demo = synthesize(plan, 0.0, 5);
  SegmentList true_split;
  for (const auto& item : demo.true_segments.items) true_split.segments.push_back(item.segment);
  DescribedSegments captions = mock_caption(demo, true_split, 1.0, 10);
  for (std::size_t i = 0; i < captions.size(); ++i)
    CHECK_FALSE(captions.items[i].description == demo.true_segments.items[i].description);
}

TEST_CASE("replacement count at rate 0.3 stays within the binomial bound") {
  // hand-built demo: 4 true sections over [0, 1000), 1000 detected segments
  SyntheticDemo demo;
  demo.true_segments.items = {{{0.0, 250.0}, Sentence::parse("open a door")},
                              {{250.0, 500.0}, Sentence::parse("take a cup")},
                              {{500.0, 750.0}, Sentence::parse("nothing")},
                              {{750.0, 1000.0}, Sentence::parse("close the door")}};
  SegmentList segments;
  for (int i = 0; i < 1000; ++i)
    segments.segments.push_back({static_cast<double>(i), static_cast<double>(i + 1)});
  DescribedSegments captions = mock_caption(demo, segments, 0.3, 11);
  int replaced = 0;
  for (std::size_t i = 0; i < captions.size(); ++i) {
    const auto& seg = captions.items[i].segment;
    std::size_t truth_idx = static_cast<std::size_t>(seg.start_s / 250.0);
    if (!(captions.items[i].description == demo.true_segments.items[truth_idx].description))
      ++replaced;
  }
  CHECK(replaced >= 300 - 45);
  CHECK(replaced <= 300 + 45);
}

TEST_CASE("end-to-end with perfect captions reaches AP 1 at 0.95") {
  SynthPlan plan = three_reach_plan();
  plan.default_reach_duration_s = 2.0;
  plan.dwells = {{0, 0.6}};  // dwell >= 0.5 s
  SyntheticDemo demo = synthesize(plan, 0.0015, 6);
  SegmentList segments = split(demo.track, 5);
  DescribedSegments captions = mock_caption(demo, segments, 0.0, 12);
  auto table = fixtures::random_table(
      {"open", "a", "door", "take", "cup", "close", "the", "nothing"}, 6, 13);
  Eigen::MatrixXd matrix = build_distance_matrix(captions, demo.script, table, {});
  MatchAssignment assignment = match(captions, demo.script, matrix);
  std::vector<Segment> truth_intervals;
  for (const auto& item : demo.true_segments.items)
    if (!item.description.is_nothing()) truth_intervals.push_back(item.segment);
  MatchScore s = score_matching(assignment, truth_intervals);
  CHECK(s.ap_at.at(0.95) == 1.0);
}

TEST_CASE("caption and ground truth JSON round-trip") {
  SynthPlan plan = three_reach_plan();
  plan.dwells = {{1, 0.5}};
  SyntheticDemo demo = synthesize(plan, 0.001, 7);
  GroundTruth truth = ground_truth_of(demo);
  GroundTruth back = ground_truth_from_json(ground_truth_to_json(truth));
  CHECK(back.change_points_s == truth.change_points_s);
  REQUIRE(back.instructions.size() == truth.instructions.size());
  for (std::size_t i = 0; i < truth.instructions.size(); ++i) {
    CHECK(back.instructions[i].text == truth.instructions[i].text);
    CHECK(back.instructions[i].start_s == truth.instructions[i].start_s);
    CHECK(back.instructions[i].end_s == truth.instructions[i].end_s);
  }

  std::vector<TimedCaption> caps;
  for (const auto& item : demo.true_segments.items)
    caps.push_back({item.segment.start_s, item.segment.end_s, item.description.text()});
  auto caps_back = captions_from_json(captions_to_json(caps));
  REQUIRE(caps_back.size() == caps.size());
  CHECK(caps_back[1].text == caps[1].text);
}

TEST_CASE("ground_truth_sections reconstructs the noise gaps") {
  GroundTruth truth;
  truth.instructions = {{0.0, 1.0, "open a door"}, {1.6, 3.0, "take a cup"}};
  auto sections = ground_truth_sections(truth, 0.0, 3.5);
  REQUIRE(sections.size() == 4);
  CHECK(sections[1].text == "nothing");
  CHECK(sections[1].start_s == doctest::Approx(1.0));
  CHECK(sections[1].end_s == doctest::Approx(1.6));
  CHECK(sections[3].text == "nothing");
  CHECK(sections[3].end_s == doctest::Approx(3.5));
}

TEST_CASE("assign_captions picks the maximal-overlap caption") {
  std::vector<TimedCaption> caps = {{0.0, 1.0, "open a door"}, {1.0, 2.0, "take a cup"}};
  SegmentList segments;
  segments.segments = {{0.0, 0.8}, {0.8, 1.9}, {1.9, 2.0}};
  DescribedSegments described = assign_captions(caps, segments);
  CHECK(described.items[0].description.text() == "open a door");
  CHECK(described.items[1].description.text() == "take a cup");  // 1.1 s overlap beats 0.2 s
  CHECK(described.items[2].description.text() == "take a cup");
}
