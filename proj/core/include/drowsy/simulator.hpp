#pragma once

// Seeded synthetic driver-behavior streams. A scenario is a timeline of
// alert/drowsy segments; each regime drives two independent event processes
// (eye closures and yawns) which are then rendered as per-frame detections.
//
// Alert: blinks of 300-400 ms, exponential gaps with mean 4 s, rare yawns.
// Drowsy: long closures of 1.5-8 s, exponential gaps with mean 8 s, frequent
// yawns.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "drowsy/detection.hpp"
#include "drowsy/features.hpp"
#include "drowsy/lstm.hpp"

namespace drowsy {

struct DurationRange {
  std::int64_t min_ms = 0;
  std::int64_t max_ms = 0;
};

struct RegimeParams {
  DurationRange alert_blink_ms{300, 400};
  double alert_blink_interval_mean_ms = 4000.0;
  DurationRange drowsy_closure_ms{1500, 8000};
  double drowsy_blink_interval_mean_ms = 4000.0;
  double alert_yawns_per_min = 0.05;
  double drowsy_yawns_per_min = 4.0;
  DurationRange yawn_duration_ms{2000, 4000};
  /// Smallest open-eye gap between two closures; keeps them separable at
  /// frame resolution.
  std::int64_t min_open_gap_ms = 200;
  std::uint64_t seed = 1;
};

/// Throws ConfigError for empty/negative ranges or non-positive means.
void validate(const RegimeParams& params);

struct Segment {
  Regime regime = Regime::alert;
  std::int64_t duration_ms = 0;

  friend bool operator==(const Segment&, const Segment&) = default;
};

struct Scenario {
  std::vector<Segment> segments;

  std::int64_t total_ms() const noexcept;
  /// Regime in force at `t_ms`; the last segment extends past the end.
  Regime regime_at(std::int64_t t_ms) const noexcept;
  /// Start times of every alert->drowsy switch (and t=0 if the first
  /// segment is drowsy).
  std::vector<std::int64_t> drowsy_onsets() const;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Segments positive, total >= 5000 ms. Throws ConfigError.
void validate(const Scenario& scenario);

/// "alert:30000,drowsy:30000" (durations in ms). Throws ParseError.
Scenario parse_scenario(std::string_view text);
std::string format_scenario(const Scenario& scenario);

struct Interval {
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;  // exclusive

  bool contains(std::int64_t t) const noexcept { return t >= start_ms && t < end_ms; }
  std::int64_t duration_ms() const noexcept { return end_ms - start_ms; }

  friend bool operator==(const Interval&, const Interval&) = default;
};

struct EventTimeline {
  std::vector<Interval> closures;  // sorted, disjoint
  std::vector<Interval> yawns;     // sorted, disjoint

  friend bool operator==(const EventTimeline&, const EventTimeline&) = default;
};

EventTimeline generate_timeline(const Scenario& scenario, const RegimeParams& params);

struct SimulatedStream {
  std::vector<FrameDetection> frames;
  /// One label per 100 ms sample tick, starting at first_tick_ms; aligned
  /// with extract_samples(frames).
  std::vector<Regime> ground_truth;
  std::int64_t first_tick_ms = 0;
  EventTimeline timeline;
  Scenario scenario;
};

/// Frames at floor(i * 1000 / fps) ms. Throws ConfigError for bad inputs.
SimulatedStream generate_frames(const Scenario& scenario, const RegimeParams& params, int fps = 30);

/// Sidecar format: one "alert"/"drowsy" word per line.
std::string format_ground_truth(std::span<const Regime> labels);
std::vector<Regime> parse_ground_truth(std::string_view text);

// ---------------------------------------------------------------------------

/// Drowsy iff at least 26 of the window's 50 samples are drowsy.
Regime majority_label(std::span<const Regime> window_labels) noexcept;

struct TrainingSetOptions {
  /// Keep every k-th sliding window. Consecutive stride-1 windows share 49
  /// samples, so thinning costs little information and saves training time.
  std::size_t window_stride = 20;
  std::int64_t scenario_ms = 60'000;
};

struct TrainingSet {
  std::vector<LabeledSequence> sequences;
  std::size_t alert = 0;
  std::size_t drowsy = 0;

  double drowsy_fraction() const noexcept {
    return sequences.empty() ? 0.0 : static_cast<double>(drowsy) / static_cast<double>(sequences.size());
  }
};

/// Windows of `samples` with their majority labels. `labels` must align with
/// `samples` one to one.
TrainingSet label_windows(std::span<const BehaviorSample> samples, std::span<const Regime> labels,
                          std::size_t stride = 1);

/// Scenario mix used for generated training data, cycling over: pure alert,
/// pure drowsy, alert then drowsy (half each).
Scenario default_training_scenario(std::size_t index, std::int64_t duration_ms);

/// Scenario i is simulated with seed mix_seed(params.seed, i). Throws
/// ConfigError for fewer than 2 scenarios and DataError when the result holds
/// a single class.
TrainingSet generate_training_set(std::size_t n_scenarios, const RegimeParams& params,
                                  const TrainingSetOptions& options = {});
TrainingSet generate_training_set(std::span<const Scenario> scenarios, const RegimeParams& params,
                                  const TrainingSetOptions& options = {});

}  // namespace drowsy
