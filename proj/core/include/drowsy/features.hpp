#pragma once

// Folds a detection stream into the two-dimensional behavior signal
// (current eye-closure duration, time since last yawn) sampled every 100 ms,
// and cuts it into 5 s sliding windows.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "drowsy/detection.hpp"

namespace drowsy {

inline constexpr std::int64_t kSamplePeriodMs = 100;
inline constexpr std::size_t kWindowLength = 50;
inline constexpr std::int64_t kClosureCapMs = 10'000;
inline constexpr std::int64_t kYawnMemoryMs = 120'000;

/// Ground-truth driver state; doubles as the binary class label.
enum class Regime : std::uint8_t { alert = 0, drowsy = 1 };

std::string_view to_string(Regime regime) noexcept;

struct BehaviorSample {
  std::int64_t t_ms = 0;
  std::int32_t eye_closure_ms = 0;
  std::int32_t since_yawn_ms = static_cast<std::int32_t>(kYawnMemoryMs);

  friend bool operator==(const BehaviorSample&, const BehaviorSample&) = default;
};

/// Running quantities behind the two behavior numbers.
struct ExtractorState {
  std::optional<std::int64_t> eye_closed_since;
  std::optional<std::int64_t> last_yawn_at;
  std::optional<std::int64_t> last_frame_ms;

  friend bool operator==(const ExtractorState&, const ExtractorState&) = default;
};

/// A frame counts as "closed" with at least one closed_eye and no opened_eye.
bool is_closed_frame(const FrameDetection& frame) noexcept;

/// Pure transition. Any opened_eye ends a closure; frames without eye
/// detections hold the previous state. Throws StreamError when the frame does
/// not follow the previous one in time.
ExtractorState update(ExtractorState state, const FrameDetection& frame);

/// Reads the state at tick `t_ms` (a multiple of 100). Closure is clipped to
/// kClosureCapMs, time-since-yawn saturates at kYawnMemoryMs.
BehaviorSample sample(const ExtractorState& state, std::int64_t t_ms);

/// Incremental frame -> sample conversion. Emits one sample per 100 ms tick
/// from the first tick at or after the first frame up to the last tick at or
/// before the latest frame; each tick reflects every frame stamped <= tick.
class SampleStream {
 public:
  using Sink = std::function<void(const BehaviorSample&)>;

  void push(const FrameDetection& frame, const Sink& sink);
  void finish(const Sink& sink);

  const ExtractorState& state() const noexcept { return state_; }

 private:
  ExtractorState state_;
  std::optional<std::int64_t> next_tick_;
};

std::vector<BehaviorSample> extract_samples(std::span<const FrameDetection> frames);

// ---------------------------------------------------------------------------

struct Window {
  std::array<BehaviorSample, kWindowLength> samples;

  std::int64_t start_ms() const noexcept { return samples.front().t_ms; }
  std::int64_t end_ms() const noexcept { return samples.back().t_ms; }

  friend bool operator==(const Window&, const Window&) = default;
};

/// Throws StreamError (line = sample index) when spacing is not exactly 100 ms.
void check_spacing(std::span<const BehaviorSample> samples);

/// Window k holds samples [k*stride, k*stride + 49].
std::vector<Window> windows(std::span<const BehaviorSample> samples, std::size_t stride = 1);

inline std::size_t window_count(std::size_t n_samples, std::size_t stride = 1) noexcept {
  return n_samples < kWindowLength ? 0 : (n_samples - kWindowLength) / stride + 1;
}

// ---------------------------------------------------------------------------
// LSTM input encoding: (closure / 10 000, since_yawn / 120 000) in [0,1]^2.

inline constexpr std::size_t kInputDim = 2;
using FeatureStep = std::array<double, kInputDim>;
using NormalizedWindow = std::array<FeatureStep, kWindowLength>;

FeatureStep normalize(const BehaviorSample& s) noexcept;
NormalizedWindow normalize(const Window& w) noexcept;

/// Fixed-capacity ring holding the most recent kWindowLength samples.
class WindowAssembler {
 public:
  void push(const BehaviorSample& s);
  bool full() const noexcept { return size_ == kWindowLength; }
  std::size_t size() const noexcept { return size_; }

  /// Oldest-first copy; only valid when full().
  Window window() const;

 private:
  std::array<BehaviorSample, kWindowLength> ring_{};
  std::size_t head_ = 0;
  std::size_t size_ = 0;
};

// ---------------------------------------------------------------------------
// .txt series: one sample per line, "<eye_closure_ms> <since_yawn_ms>\n".

std::string export_series(std::span<const BehaviorSample> samples);

/// Timestamps are reassigned as start_ms + 100*i. Throws ParseError on a
/// non-integer token, a wrong column count or an out-of-range value.
std::vector<BehaviorSample> import_series(std::string_view text, std::int64_t start_ms = 0);

}  // namespace drowsy
