// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "drowsy/baseline.hpp"
#include "drowsy/checkpoint.hpp"
#include "drowsy/detection.hpp"
#include "drowsy/eval.hpp"
#include "drowsy/features.hpp"
#include "drowsy/pipeline.hpp"
#include "drowsy/random.hpp"
#include "drowsy/simulator.hpp"
#include "drowsy/train.hpp"
#include "oracle.hpp"
#include "streams.hpp"

using namespace drowsy;
using Clock = std::chrono::steady_clock;

namespace tol {
// 1: training
constexpr std::size_t kTrainScenarios = 200;
constexpr std::uint64_t kTrainSeed = 2024;
constexpr std::uint64_t kHeldOutSeed = 777;
constexpr std::size_t kHeldOutScenarios = 60;
constexpr double kMinHeldOutAccuracy = 0.90;
constexpr double kMaxTrainSeconds = 300.0;
// 2: gradients
constexpr std::size_t kGradInstances = 10;
constexpr std::size_t kGradHidden = 4;
constexpr std::size_t kGradSequences = 3;
constexpr double kGradEps = 1e-5;
constexpr double kMaxGradRelError = 1e-4;
// 3: baseline
constexpr std::size_t kBaselineStreams = 100'000;
constexpr std::size_t kBaselineStreamLength = 60;
// 4: windowing
constexpr std::size_t kMaxWindowN = 1000;
// 5: pipeline
constexpr std::int64_t kPipelineLogMs = 10 * 60 * 1000;
constexpr std::size_t kPipelineTrials = 100;
constexpr double kMinThroughputSps = 30.0;
// 6, 7: divergence and early warning
constexpr double kAlarmThreshold = 0.5;
constexpr std::uint64_t kEpisodeSeeds = 40;
// 8: round trips
constexpr std::size_t kRoundTripCases = 500;
constexpr std::uint32_t kParticipantIndices = 20'000;
}  // namespace tol

namespace {

int failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail) {
  std::printf("[%s] %d %s: %s\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

// ---------------------------------------------------------------------------

LstmModel criterion_1() {
  RegimeParams params;
  params.seed = tol::kTrainSeed;
  TrainConfig config;
  config.seed = tol::kTrainSeed;

  const auto start = Clock::now();
  const auto set = generate_training_set(tol::kTrainScenarios, params);
  const auto result = train(set.sequences, config);
  const double elapsed = seconds_since(start);

  RegimeParams test_params;
  test_params.seed = tol::kHeldOutSeed;
  TrainingSetOptions dense;
  dense.window_stride = 1;
  const auto held_out = generate_training_set(tol::kHeldOutScenarios, test_params, dense);
  const auto s = score(result.model, held_out.sequences);

  report(1, "lstm-accuracy", s.accuracy >= tol::kMinHeldOutAccuracy && elapsed < tol::kMaxTrainSeconds,
         fmt("held-out window accuracy %.4f (>= %.2f) over %zu windows; training %zu windows x %zu epochs "
             "in %.1f s (< %.0f s); best epoch %zu",
             s.accuracy, tol::kMinHeldOutAccuracy, held_out.sequences.size(), set.sequences.size(), config.epochs,
             elapsed, tol::kMaxTrainSeconds, result.best_epoch));
  return result.model;
}

void criterion_2() {
  Rng rng(99);
  double worst = 0.0;
  std::size_t checked = 0;
  for (std::size_t inst = 0; inst < tol::kGradInstances; ++inst) {
    auto model = LstmModel::initialized(tol::kGradHidden, rng.next());
    for (auto& p : model.parameters()) p = rng.uniform(-1.0, 1.0);
    std::vector<LabeledSequence> batch(tol::kGradSequences);
    for (auto& s : batch) {
      for (auto& x : s.window) x = {rng.uniform(), rng.uniform()};
      s.label = rng.bernoulli(0.5) ? Regime::drowsy : Regime::alert;
    }
    const auto analytic = backward(model, batch).values;
    const std::vector<double> flat(model.parameters().begin(), model.parameters().end());
    const auto numeric = oracle::finite_difference_gradient(flat, tol::kGradHidden, batch, tol::kGradEps);
    for (std::size_t k = 0; k < flat.size(); ++k) {
      worst = std::max(worst, oracle::relative_error(analytic[k], numeric[k]));
      ++checked;
    }
  }
  report(2, "gradient-check", worst < tol::kMaxGradRelError,
         fmt("%zu instances, hidden %zu, %zu sequences, eps %.0e: max relative error %.3e over %zu parameters "
             "(< %.0e)",
             tol::kGradInstances, tol::kGradHidden, tol::kGradSequences, tol::kGradEps, worst, checked,
             tol::kMaxGradRelError));
}

void criterion_3() {
  constexpr std::int64_t now = 1'000'000;
  bool table = true;
  table &= step({}, {now, 5100, 120000}).second;
  table &= step({}, {now, 3500, 60000}).second;
  {
    BaselineDetector d;
    d.push({now - 130000, 0, 0});
    table &= !d.push({now, 3500, 120000});
  }
  {
    BaselineDetector d;
    table &= d.push({now, 5100, 120000});
    table &= !d.push({now + 100, 0, 120000});
  }

  Rng rng(2718);
  std::size_t violations = 0;
  std::size_t samples = 0;
  for (std::size_t k = 0; k < tol::kBaselineStreams; ++k) {
    const auto stream = oracle::random_sample_stream(rng, tol::kBaselineStreamLength);
    BaselineDetector d;
    for (std::size_t i = 0; i < stream.size(); ++i) {
      const bool alarm = d.push(stream[i]);
      const auto threshold = oracle::reference_threshold(stream, i);
      if (active_threshold(d.state(), stream[i].t_ms) != threshold || alarm != (stream[i].eye_closure_ms >= threshold))
        ++violations;
      ++samples;
    }
  }
  report(3, "baseline-table", table && violations == 0,
         fmt("4/4 decision cases %s; %zu random streams (%zu samples), %zu threshold-law violations",
             table ? "exact" : "WRONG", tol::kBaselineStreams, samples, violations));
}

void criterion_4() {
  std::size_t mismatches = 0;
  std::vector<BehaviorSample> samples;
  for (std::size_t n = 0; n <= tol::kMaxWindowN; ++n) {
    if (n > 0) samples.push_back({static_cast<std::int64_t>(n - 1) * 100, static_cast<std::int32_t>(n % 10001),
                                  static_cast<std::int32_t>((n * 37) % 120001)});
    const auto ws = windows(samples);
    const std::size_t expected = n >= 50 ? n - 49 : 0;
    if (ws.size() != expected) {
      ++mismatches;
      continue;
    }
    for (std::size_t k = 0; k < ws.size(); ++k)
      for (std::size_t j = 0; j < kWindowLength; ++j)
        if (!(ws[k].samples[j] == samples[k + j])) ++mismatches;
  }
  report(4, "windowing", mismatches == 0,
         fmt("N = 0..%zu: window count max(0, N-49) and contents samples[k..k+49] by enumeration, %zu mismatches",
             tol::kMaxWindowN, mismatches));
}

void criterion_5(const LstmModel& model) {
  RegimeParams params;
  params.seed = 5;
  const Scenario scenario{{{Regime::alert, tol::kPipelineLogMs / 2}, {Regime::drowsy, tol::kPipelineLogMs / 2}}};
  const auto stream = generate_frames(scenario, params);
  std::ostringstream log;
  write_detection_log(log, stream.frames);
  const std::string text = log.str();

  Rng rng(55);
  std::size_t bad_trials = 0;
  double min_throughput = 1e300;
  std::size_t total_samples = 0;
  std::size_t max_depth = 0;
  for (std::size_t trial = 0; trial <= tol::kPipelineTrials; ++trial) {
    // Trial 0 runs without injected delays.
    const bool delayed = trial > 0;
    PipelineConfig config;
    config.queue_capacity = delayed ? static_cast<std::size_t>(rng.uniform_int(50, 400)) : 256;
    const double p_delay = rng.uniform(0.0, 0.02);
    const auto max_delay_us = rng.uniform_int(50, 3000);
    Rng delay_rng(rng.next());

    std::vector<std::int64_t> times;
    times.reserve(stream.ground_truth.size());
    std::istringstream in(text);
    const auto summary = run(config, in, model, [&](const DrowsinessEvent& e) {
      times.push_back(e.t_ms);
      if (delayed && delay_rng.bernoulli(p_delay))
        std::this_thread::sleep_for(std::chrono::microseconds(delay_rng.uniform_int(1, max_delay_us)));
    });

    bool ok = summary.samples_produced == summary.samples_consumed &&
              summary.samples_consumed == summary.events_emitted && summary.drops == 0 &&
              times.size() == stream.ground_truth.size() && summary.throughput_sps >= tol::kMinThroughputSps;
    for (std::size_t i = 1; ok && i < times.size(); ++i) ok = times[i] == times[i - 1] + kSamplePeriodMs;
    bad_trials += !ok;
    min_throughput = std::min(min_throughput, summary.throughput_sps);
    total_samples += summary.samples_consumed;
    max_depth = std::max(max_depth, summary.max_queue_depth);
  }
  report(5, "pipeline-no-loss", bad_trials == 0,
         fmt("10-minute log (%zu frames, %zu samples), 1 + %zu delayed trials: %zu failing; 0 drops required; "
             "min throughput %.0f samples/s (>= %.0f); max queue depth %zu",
             stream.frames.size(), stream.ground_truth.size(), tol::kPipelineTrials, bad_trials, min_throughput,
             tol::kMinThroughputSps, max_depth));
}

// Closures of increasing length separated by 1.5 s open gaps; the last one
// passes 5 s, then the eyes stay open for 10 s.
std::vector<FrameDetection> gradual_closure_frames(std::int64_t& reopen_ms) {
  std::vector<Interval> closures;
  std::int64_t t = 10'000;
  for (std::int64_t d : {1000, 2000, 3000, 4000, 6000}) {
    closures.push_back({t, t + d});
    t += d + 1500;
  }
  reopen_ms = closures.back().end_ms;
  const std::int64_t total = reopen_ms + 10'000;
  std::vector<FrameDetection> frames;
  for (std::int64_t i = 0;; ++i) {
    const std::int64_t ft = i * 1000 / 30;
    if (ft >= total) break;
    const bool closed = std::any_of(closures.begin(), closures.end(), [&](const Interval& c) { return c.contains(ft); });
    const auto eye = closed ? DetectionLabel::closed_eye : DetectionLabel::opened_eye;
    frames.push_back({ft, {{DetectionLabel::face, {200, 110, 440, 420}, 0.95},
                           {eye, {250, 200, 300, 232}, 0.9},
                           {eye, {340, 200, 390, 232}, 0.9}}});
  }
  return frames;
}

void criterion_6(const LstmModel& model) {
  std::int64_t reopen_ms = 0;
  const auto samples = extract_samples(gradual_closure_frames(reopen_ms));
  const auto rows = compare_traces(model_predictor(model), {}, samples, tol::kAlarmThreshold);

  // First sample that sees the reopened eyes.
  const auto it = std::find_if(rows.begin(), rows.end(), [&](const TraceRow& r) { return r.t_ms >= reopen_ms; });
  const bool baseline_alarmed = it != rows.begin() && std::prev(it)->baseline_alarm;
  const bool baseline_cleared = it != rows.end() && !it->baseline_alarm;
  std::size_t persisting = 0;
  double first_p = 0.0;
  for (auto r = it; r != rows.end() && r->lstm_probability && *r->lstm_probability >= tol::kAlarmThreshold; ++r) {
    if (persisting == 0) first_p = *r->lstm_probability;
    ++persisting;
  }
  report(6, "hybrid-divergence",
         baseline_alarmed && baseline_cleared && persisting >= 1,
         fmt("baseline alarmed before reopening: %s, cleared at reopening (t=%lld ms): %s; LSTM p >= %.1f for %zu "
             "windows after reopening (first p = %.3f); %zu lstm_persists rows",
             baseline_alarmed ? "yes" : "no", static_cast<long long>(reopen_ms), baseline_cleared ? "yes" : "no",
             tol::kAlarmThreshold, persisting, first_p, count_divergences(rows, Divergence::lstm_persists)));
}

void criterion_7(const LstmModel& model) {
  const auto predictor = model_predictor(model);
  std::size_t episodes = 0;
  std::size_t early = 0;
  std::vector<std::int64_t> leads;
  for (std::uint64_t seed = 1; seed <= tol::kEpisodeSeeds; ++seed) {
    RegimeParams params;
    params.seed = 7000 + seed;
    const auto stream = generate_frames(parse_scenario("alert:60000,drowsy:60000"), params);
    const auto r = evaluate(predictor, labeled_stream(stream), {}, tol::kAlarmThreshold);
    for (const auto& ep : r.episodes) {
      ++episodes;
      if (ep.lstm_alarm_before_onset || !ep.lstm_first_alarm_ms) continue;
      // No baseline alarm at all within the episode counts as unbounded lead;
      // only episodes where both alarmed give a measured lead.
      if (const auto lead = ep.lead_over_baseline_ms()) {
        leads.push_back(*lead);
        if (*lead > 0) ++early;
      } else if (!ep.baseline_first_alarm_ms) {
        ++early;
      }
    }
  }
  std::sort(leads.begin(), leads.end());
  const auto median = leads.empty() ? 0 : leads[leads.size() / 2];
  const auto best = leads.empty() ? 0 : leads.back();
  const bool positive = std::any_of(leads.begin(), leads.end(), [](std::int64_t l) { return l > 0; });
  report(7, "early-warning", positive,
         fmt("%zu drowsy onsets: LSTM alarm first in %zu; lead over baseline where both alarmed (n=%zu): "
             "median %lld ms, max %lld ms",
             episodes, early, leads.size(), static_cast<long long>(median), static_cast<long long>(best)));
}

void criterion_8() {
  Rng rng(8080);
  std::size_t series_bad = 0;
  for (std::size_t c = 0; c < tol::kRoundTripCases; ++c) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(0, 300));
    const std::int64_t start = rng.uniform_int(0, 100000) * 100;
    std::vector<BehaviorSample> s(n);
    for (std::size_t i = 0; i < n; ++i)
      s[i] = {start + static_cast<std::int64_t>(i) * 100, static_cast<std::int32_t>(rng.uniform_int(0, kClosureCapMs)),
              static_cast<std::int32_t>(rng.uniform_int(0, kYawnMemoryMs))};
    if (import_series(export_series(s), start) != s) ++series_bad;
  }

  std::size_t ckpt_bad = 0;
  for (std::size_t c = 0; c < tol::kRoundTripCases; ++c) {
    auto model = LstmModel::initialized(static_cast<std::size_t>(rng.uniform_int(1, 24)), rng.next());
    for (auto& p : model.parameters()) {
      switch (rng.uniform_int(0, 9)) {
        case 0: p = -0.0; break;
        case 1: p = 4.9e-324 * static_cast<double>(rng.uniform_int(1, 1000)); break;  // subnormal
        case 2: p = rng.uniform(-1e300, 1e300); break;
        default: p = rng.uniform(-3, 3);
      }
    }
    const auto bytes = save_checkpoint(model);
    const auto loaded = load_checkpoint(bytes);
    bool same = save_checkpoint(loaded) == bytes && loaded.hidden_dim() == model.hidden_dim();
    NormalizedWindow w{};
    for (auto& x : w) x = {rng.uniform(), rng.uniform()};
    const double a = forward(model, w);
    const double b = forward(loaded, w);
    same = same && (a == b || (std::isnan(a) && std::isnan(b)));
    ckpt_bad += !same;
  }

  std::size_t codes = 0;
  std::size_t code_bad = 0;
  for (const char* g : {"F", "M"})
    for (const char* l : {"B", "D"})
      for (const char* gl : {"G", "Ng"}) {
        std::vector<std::uint32_t> indices;
        for (std::uint32_t i = 1; i <= tol::kParticipantIndices; ++i) indices.push_back(i);
        for (int k = 0; k < 1000; ++k) indices.push_back(static_cast<std::uint32_t>(rng.uniform_int(1, 4294967295)));
        indices.push_back(4294967295u);
        for (auto idx : indices) {
          const auto code = std::string(g) + l + gl + std::to_string(idx);
          try {
            if (format_participant_code(parse_participant_code(code)) != code) ++code_bad;
          } catch (const std::exception&) {
            ++code_bad;
          }
          ++codes;
        }
      }
  report(8, "round-trips", series_bad == 0 && ckpt_bad == 0 && code_bad == 0,
         fmt("series %zu/%zu lossless; checkpoint %zu/%zu bit-identical; participant codes %zu/%zu over 8 "
             "prefixes x indices",
             tol::kRoundTripCases - series_bad, tol::kRoundTripCases, tol::kRoundTripCases - ckpt_bad,
             tol::kRoundTripCases, codes - code_bad, codes));
}

}  // namespace

int main() {
  const auto start = Clock::now();
  try {
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_8();
    const auto model = criterion_1();
    criterion_5(model);
    criterion_6(model);
    criterion_7(model);
  } catch (const std::exception& e) {
    std::printf("[FAIL] acceptance aborted: %s\n", e.what());
    return 1;
  }
  std::printf("%d failing criteria; %.1f s total\n", failures, seconds_since(start));
  return failures == 0 ? 0 : 1;
}
