#include "lfokit/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>

#include <json.hpp>

#include "lfokit/errors.hpp"

namespace lfokit {
namespace {

// Tolerates FP rounding at the margin boundary (|3.0 - 2.9| > 0.1 in
// binary floating point).
constexpr double kMarginSlack = 1e-9;

double overlap_length(double a0, double a1, double b0, double b1) {
  return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

std::string format_threshold(double tau) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", tau);
  return buf;
}

// Minimum-jerk interpolation factor: zero velocity at both ends.
double min_jerk(double tau) {
  return tau * tau * tau * (10.0 + tau * (-15.0 + 6.0 * tau));
}

struct Section {
  double start_s;
  double end_s;
  std::string caption;
  bool is_dwell;
  Eigen::Vector3d from;  // dwell: hold point (== from of the next reach)
  Eigen::Vector3d to;
};

}  // namespace

ChangePointScore score_change_points(const ChangePointSet& detected, const ChangePointSet& truth,
                                     double margin_s) {
  if (!(margin_s > 0.0)) throw InvalidParameter("margin must be positive");
  if (truth.times.empty()) throw InvalidInput("truth change points are empty, recall undefined");

  struct Pair {
    double delta;
    double t_true;
    double t_det;
    std::size_t ti, di;
  };
  std::vector<Pair> pairs;
  for (std::size_t di = 0; di < detected.times.size(); ++di)
    for (std::size_t ti = 0; ti < truth.times.size(); ++ti) {
      double delta = std::abs(detected.times[di] - truth.times[ti]);
      if (delta <= margin_s + kMarginSlack)
        pairs.push_back({delta, truth.times[ti], detected.times[di], ti, di});
    }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.delta != b.delta) return a.delta < b.delta;
    if (a.t_true != b.t_true) return a.t_true < b.t_true;
    return a.t_det < b.t_det;
  });
  std::vector<bool> true_used(truth.times.size(), false);
  std::vector<bool> det_used(detected.times.size(), false);
  int n_cr = 0;
  for (const auto& p : pairs) {
    if (true_used[p.ti] || det_used[p.di]) continue;
    true_used[p.ti] = det_used[p.di] = true;
    ++n_cr;
  }

  ChangePointScore score;
  score.n_cr = n_cr;
  score.n_cp = static_cast<int>(truth.times.size());
  score.n_al = static_cast<int>(detected.times.size());
  score.recall = static_cast<double>(score.n_cr) / static_cast<double>(score.n_cp);
  score.false_positive_rate =
      score.n_al > 0 ? static_cast<double>(score.n_al - score.n_cr) / score.n_al : 0.0;
  return score;
}

MatchScore score_matching(const MatchAssignment& predicted, const std::vector<Segment>& truth,
                          const std::vector<double>& thresholds) {
  if (predicted.per_instruction.size() != truth.size())
    throw InvalidInput("predicted assignment has " +
                       std::to_string(predicted.per_instruction.size()) +
                       " instructions, truth has " + std::to_string(truth.size()));
  MatchScore score;
  for (std::size_t j = 0; j < truth.size(); ++j) {
    const auto& p = predicted.per_instruction[j];
    double inter = overlap_length(p.start_s, p.end_s, truth[j].start_s, truth[j].end_s);
    double uni = std::max(p.end_s, truth[j].end_s) - std::min(p.start_s, truth[j].start_s);
    score.per_instruction_iou.push_back(uni > 0.0 ? inter / uni : 0.0);
  }
  for (double tau : thresholds) {
    int positive = 0;
    for (double iou : score.per_instruction_iou)
      if (iou >= tau - 1e-12) ++positive;
    score.ap_at[tau] = static_cast<double>(positive) / static_cast<double>(truth.size());
  }
  return score;
}

std::string change_point_score_to_json(const ChangePointScore& s) {
  nlohmann::json j{{"recall", s.recall},
                   {"false_positive_rate", s.false_positive_rate},
                   {"n_cr", s.n_cr},
                   {"n_cp", s.n_cp},
                   {"n_al", s.n_al}};
  return j.dump(2) + "\n";
}

std::string match_score_to_json(const MatchScore& s) {
  nlohmann::json ap = nlohmann::json::object();
  for (const auto& [tau, value] : s.ap_at) ap[format_threshold(tau)] = value;
  nlohmann::json j{{"ap_at", ap}, {"per_instruction_iou", s.per_instruction_iou}};
  return j.dump(2) + "\n";
}

void SynthPlan::validate() const {
  if (waypoints.size() < 2) throw InvalidInput("plan needs at least 2 waypoints");
  if (captions.size() != reach_count())
    throw InvalidInput("plan needs one caption per reach: " + std::to_string(reach_count()) +
                       " reaches, " + std::to_string(captions.size()) + " captions");
  if (!reach_durations_s.empty() && reach_durations_s.size() != reach_count())
    throw InvalidInput("reach_durations_s must be empty or match the reach count");
  for (double d : reach_durations_s)
    if (!(d > 0.0)) throw InvalidInput("reach durations must be positive");
  if (!(default_reach_duration_s > 0.0) || !(rate_hz > 0.0))
    throw InvalidInput("durations and sample rate must be positive");
  std::set<int> seen;
  for (const auto& dwell : dwells) {
    if (dwell.after_reach < 0 || dwell.after_reach >= static_cast<int>(reach_count()))
      throw InvalidInput("dwell after_reach out of range");
    if (!(dwell.duration_s > 0.0)) throw InvalidInput("dwell duration must be positive");
    if (!seen.insert(dwell.after_reach).second)
      throw InvalidInput("at most one dwell per reach boundary");
  }
  for (const auto& caption : captions)
    if (Sentence::parse(caption).is_nothing())
      throw InvalidInput("reach captions must not be the reserved nothing label");
}

SyntheticDemo synthesize(const SynthPlan& plan, double noise_sigma_m, std::uint64_t seed) {
  plan.validate();
  const std::size_t reaches = plan.reach_count();
  auto reach_duration = [&](std::size_t r) {
    return plan.reach_durations_s.empty() ? plan.default_reach_duration_s
                                          : plan.reach_durations_s[r];
  };
  std::vector<const DwellSpec*> dwell_after(reaches, nullptr);
  for (const auto& dwell : plan.dwells) dwell_after[static_cast<std::size_t>(dwell.after_reach)] = &dwell;

  std::vector<Section> sections;
  double t = 0.0;
  for (std::size_t r = 0; r < reaches; ++r) {
    double d = reach_duration(r);
    sections.push_back({t, t + d, plan.captions[r], false, plan.waypoints[r], plan.waypoints[r + 1]});
    t += d;
    if (dwell_after[r]) {
      sections.push_back(
          {t, t + dwell_after[r]->duration_s, "nothing", true, plan.waypoints[r + 1], plan.waypoints[r + 1]});
      t += dwell_after[r]->duration_s;
    }
  }
  const double total = t;

  SyntheticDemo demo;
  demo.track.nominal_rate_hz = plan.rate_hz;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double dwell_step_sigma = noise_sigma_m / 3.0;

  std::size_t section_idx = 0;
  Eigen::Vector3d walk = Eigen::Vector3d::Zero();
  const auto sample_count = static_cast<std::size_t>(std::floor(total * plan.rate_hz + 1e-9)) + 1;
  demo.track.samples.reserve(sample_count);
  for (std::size_t k = 0; k < sample_count; ++k) {
    double tk = static_cast<double>(k) / plan.rate_hz;
    while (section_idx + 1 < sections.size() && tk > sections[section_idx].end_s) {
      ++section_idx;
      walk.setZero();
    }
    const Section& sec = sections[section_idx];
    Eigen::Vector3d pos;
    if (sec.is_dwell) {
      walk += dwell_step_sigma * Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));
      pos = sec.from + walk;
    } else {
      double tau = std::clamp((tk - sec.start_s) / (sec.end_s - sec.start_s), 0.0, 1.0);
      pos = sec.from + min_jerk(tau) * (sec.to - sec.from);
    }
    pos += noise_sigma_m * Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));
    demo.track.samples.push_back({tk, pos, std::nullopt});
  }

  for (std::size_t s = 0; s + 1 < sections.size(); ++s)
    demo.true_change_points.times.push_back(sections[s].end_s);
  for (std::size_t s = 0; s < sections.size(); ++s) {
    demo.true_segments.items.push_back(
        {{sections[s].start_s, sections[s].end_s}, Sentence::parse(sections[s].caption)});
    if (sections[s].is_dwell)
      demo.noise_sections.push_back(static_cast<int>(s));
    else
      demo.script.instructions.push_back(Sentence::parse(sections[s].caption));
  }
  return demo;
}

DescribedSegments mock_caption(const SyntheticDemo& demo, const SegmentList& segments,
                               double error_rate, std::uint64_t seed) {
  if (error_rate < 0.0 || error_rate > 1.0)
    throw InvalidParameter("error_rate must be in [0, 1]");
  segments.validate();
  demo.true_segments.validate();

  std::set<std::string> vocab_set{"nothing"};
  for (const auto& item : demo.true_segments.items) vocab_set.insert(item.description.text());
  std::vector<std::string> vocab(vocab_set.begin(), vocab_set.end());

  std::mt19937_64 rng(seed);
  std::bernoulli_distribution flip(error_rate);
  DescribedSegments out;
  for (const auto& seg : segments.segments) {
    double best = -1.0;
    std::size_t best_idx = 0;
    for (std::size_t i = 0; i < demo.true_segments.items.size(); ++i) {
      const auto& truth = demo.true_segments.items[i].segment;
      double ov = overlap_length(seg.start_s, seg.end_s, truth.start_s, truth.end_s);
      if (ov > best) {
        best = ov;
        best_idx = i;
      }
    }
    std::string caption = demo.true_segments.items[best_idx].description.text();
    if (flip(rng)) {
      std::vector<std::string> candidates;
      for (const auto& word : vocab)
        if (word != caption) candidates.push_back(word);
      if (!candidates.empty()) {
        std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
        caption = candidates[pick(rng)];
      }
    }
    out.items.push_back({seg, Sentence::parse(caption)});
  }
  return out;
}

std::string captions_to_json(const std::vector<TimedCaption>& captions) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : captions)
    arr.push_back({{"start_s", c.start_s}, {"end_s", c.end_s}, {"text", c.text}});
  return arr.dump(2) + "\n";
}

std::vector<TimedCaption> captions_from_json(const std::string& text) {
  nlohmann::json arr;
  try {
    arr = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw MalformedInput(std::string("caption JSON: ") + e.what());
  }
  if (!arr.is_array()) throw MalformedInput("caption JSON must be an array");
  std::vector<TimedCaption> out;
  for (const auto& item : arr) {
    if (!item.is_object() || !item.contains("start_s") || !item.contains("end_s") ||
        !item.contains("text"))
      throw MalformedInput("caption JSON entries need start_s, end_s, text");
    out.push_back({item.at("start_s").get<double>(), item.at("end_s").get<double>(),
                   item.at("text").get<std::string>()});
  }
  return out;
}

DescribedSegments assign_captions(const std::vector<TimedCaption>& captions,
                                  const SegmentList& segments) {
  segments.validate();
  if (captions.empty()) throw InvalidInput("caption list is empty");
  DescribedSegments out;
  for (const auto& seg : segments.segments) {
    double best = 0.0;
    const TimedCaption* best_caption = nullptr;
    for (const auto& c : captions) {
      double ov = overlap_length(seg.start_s, seg.end_s, c.start_s, c.end_s);
      if (ov > best) {
        best = ov;
        best_caption = &c;
      }
    }
    if (!best_caption)
      throw InvalidInput("segment [" + std::to_string(seg.start_s) + ", " +
                         std::to_string(seg.end_s) + "] overlaps no caption");
    out.items.push_back({seg, Sentence::parse(best_caption->text)});
  }
  return out;
}

std::string ground_truth_to_json(const GroundTruth& truth) {
  nlohmann::json instr = nlohmann::json::array();
  for (const auto& c : truth.instructions)
    instr.push_back({{"text", c.text}, {"start_s", c.start_s}, {"end_s", c.end_s}});
  nlohmann::json j{{"change_points_s", truth.change_points_s}, {"instructions", instr}};
  return j.dump(2) + "\n";
}

GroundTruth ground_truth_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw MalformedInput(std::string("ground truth JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("change_points_s") || !j.contains("instructions"))
    throw MalformedInput("ground truth JSON needs change_points_s and instructions");
  GroundTruth truth;
  truth.change_points_s = j.at("change_points_s").get<std::vector<double>>();
  for (const auto& item : j.at("instructions")) {
    truth.instructions.push_back({item.at("start_s").get<double>(),
                                  item.at("end_s").get<double>(),
                                  item.at("text").get<std::string>()});
  }
  return truth;
}

GroundTruth ground_truth_of(const SyntheticDemo& demo) {
  GroundTruth truth;
  truth.change_points_s = demo.true_change_points.times;
  for (std::size_t i = 0; i < demo.true_segments.items.size(); ++i) {
    const auto& item = demo.true_segments.items[i];
    if (item.description.is_nothing()) continue;
    truth.instructions.push_back(
        {item.segment.start_s, item.segment.end_s, item.description.text()});
  }
  return truth;
}

std::vector<TimedCaption> ground_truth_sections(const GroundTruth& truth, double start_s,
                                                double end_s) {
  constexpr double kGapEps = 1e-9;
  std::vector<TimedCaption> sections;
  double cursor = start_s;
  for (const auto& instr : truth.instructions) {
    if (instr.start_s < cursor - kGapEps)
      throw InvalidInput("ground truth instructions overlap or are out of order");
    if (instr.start_s > cursor + kGapEps)
      sections.push_back({cursor, instr.start_s, "nothing"});
    sections.push_back(instr);
    cursor = instr.end_s;
  }
  if (end_s > cursor + kGapEps) sections.push_back({cursor, end_s, "nothing"});
  return sections;
}

}  // namespace lfokit
