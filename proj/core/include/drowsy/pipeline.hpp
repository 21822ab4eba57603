#pragma once

// Two-stage runtime. The producer context reads detections, maintains the
// extractor state and emits one behavior sample per 100 ms tick. The consumer
// context assembles sliding windows and runs the LSTM and the threshold
// baseline on every sample. The stages talk through a bounded channel:
// replay mode blocks the producer when the consumer lags (no sample is ever
// lost), realtime mode paces the producer by frame timestamps and evicts the
// oldest queued sample under overload, counting every drop.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <string>

#include "drowsy/baseline.hpp"
#include "drowsy/detection.hpp"
#include "drowsy/error.hpp"
#include "drowsy/features.hpp"
#include "drowsy/lstm.hpp"

namespace drowsy {

enum class PacingMode { replay, realtime };

struct PipelineConfig {
  std::int64_t sample_period_ms = kSamplePeriodMs;
  std::size_t window_len = kWindowLength;
  std::size_t stride = 1;
  std::size_t queue_capacity = 256;
  double probability_threshold = 0.5;
  PacingMode mode = PacingMode::replay;
  BaselineState baseline;
};

/// Throws ConfigError. The sampling period and window length are fixed by
/// the model input shape; only the stated defaults are accepted for them.
void validate(const PipelineConfig& config);

struct DrowsinessEvent {
  std::size_t index = 0;  // 0-based sample index
  std::int64_t t_ms = 0;
  BehaviorSample sample;
  std::optional<double> lstm_probability;
  bool lstm_alarm = false;
  bool baseline_alarm = false;
  std::uint64_t produce_us = 0;
  std::uint64_t queue_us = 0;
  std::uint64_t consume_us = 0;
};

/// Probability present iff a full window exists.
inline std::optional<double> warmup_semantics(const DrowsinessEvent& event) { return event.lstm_probability; }

inline bool has_full_window(std::size_t sample_index, std::size_t window_len = kWindowLength) noexcept {
  return sample_index + 1 >= window_len;
}

struct RunSummary {
  std::size_t samples_produced = 0;
  std::size_t samples_consumed = 0;
  std::size_t events_emitted = 0;
  std::size_t drops = 0;    // realtime eviction only
  std::size_t drained = 0;  // discarded after a consumer abort
  std::size_t frames_read = 0;
  std::size_t max_queue_depth = 0;
  double wall_seconds = 0.0;
  double throughput_sps = 0.0;
  std::optional<std::string> error;
};

/// Thrown by run() when either stage fails; carries the accounting up to the
/// abort point.
class PipelineError : public Error {
 public:
  PipelineError(RunSummary summary, const std::string& what) : Error(what), summary_(std::move(summary)) {}
  const RunSummary& summary() const noexcept { return summary_; }

 private:
  RunSummary summary_;
};

using FrameSource = std::function<std::optional<FrameDetection>()>;
using EventSink = std::function<void(const DrowsinessEvent&)>;

RunSummary run(const PipelineConfig& config, const FrameSource& source, const LstmModel& model,
               const EventSink& sink);

/// Reads a detection log from `in`.
RunSummary run(const PipelineConfig& config, std::istream& in, const LstmModel& model, const EventSink& sink);

/// One JSON object per line.
std::string format_event_record(const DrowsinessEvent& event);
std::string format_summary_record(const RunSummary& summary);

}  // namespace drowsy
