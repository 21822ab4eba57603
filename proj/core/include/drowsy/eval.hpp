#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "drowsy/baseline.hpp"
#include "drowsy/features.hpp"
#include "drowsy/lstm.hpp"
#include "drowsy/simulator.hpp"

namespace drowsy {

/// Maps a normalized window to a drowsiness probability.
using Predictor = std::function<double(const NormalizedWindow&)>;

Predictor model_predictor(const LstmModel& model);

struct LabeledStream {
  std::vector<BehaviorSample> samples;
  std::vector<Regime> labels;  // one per sample
};

/// Runs feature extraction over a simulated stream.
LabeledStream labeled_stream(const SimulatedStream& stream);

struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::size_t total() const noexcept { return tp + fp + tn + fn; }
  double accuracy() const noexcept;
  double precision() const noexcept;  // 0 when nothing was predicted positive
  double recall() const noexcept;     // 0 when there are no positives
  double f1() const noexcept;

  void add(bool predicted, bool actual) noexcept;
};

enum class Divergence : std::uint8_t {
  none,
  /// LSTM alarms while the baseline, having alarmed during the same LSTM
  /// alarm run, has already cleared (typically right after the eyes reopen).
  lstm_persists,
  /// LSTM alarms before the baseline has reached its threshold.
  early_warning,
  /// Baseline alarms, LSTM does not.
  baseline_only,
};

std::string_view to_string(Divergence d) noexcept;

struct TraceRow {
  std::int64_t t_ms = 0;
  std::int32_t eye_closure_ms = 0;
  std::int32_t since_yawn_ms = 0;
  std::optional<double> lstm_probability;
  bool lstm_alarm = false;
  bool baseline_alarm = false;
  Divergence divergence = Divergence::none;
};

/// One row per sample: both methods see exactly the same inputs. The LSTM
/// column is empty for the first 49 samples.
std::vector<TraceRow> compare_traces(const Predictor& predictor, const BaselineState& baseline,
                                     std::span<const BehaviorSample> samples, double threshold = 0.5);

std::size_t count_divergences(std::span<const TraceRow> rows, std::optional<Divergence> kind = std::nullopt);

struct EpisodeTiming {
  std::int64_t onset_ms = 0;
  std::int64_t end_ms = 0;  // exclusive
  std::optional<std::int64_t> lstm_first_alarm_ms;
  std::optional<std::int64_t> baseline_first_alarm_ms;
  /// LSTM was already alarming on the sample just before onset.
  bool lstm_alarm_before_onset = false;

  std::optional<std::int64_t> lstm_delay_ms() const;
  std::optional<std::int64_t> baseline_delay_ms() const;
  /// baseline_first - lstm_first; positive when the LSTM warned earlier.
  std::optional<std::int64_t> lead_over_baseline_ms() const;
};

struct EvalReport {
  Confusion lstm;      // window level, threshold 0.5
  Confusion baseline;  // alarm state at each window's last sample
  std::vector<EpisodeTiming> episodes;
  std::vector<TraceRow> trace;
};

/// Throws DataError for an empty stream or misaligned labels.
EvalReport evaluate(const Predictor& predictor, const LabeledStream& stream, const BaselineState& baseline = {},
                    double threshold = 0.5);

/// Key/value text block.
std::string format_report(const EvalReport& report);

/// Tab-separated columns for external plotting.
std::string format_plot_data(std::span<const TraceRow> rows);

}  // namespace drowsy
