#pragma once

// Threshold-only decision strategy used as the comparison baseline:
// alarm when the current eye closure reaches 5 s, or 3 s while a yawn seen
// within the last 2 minutes keeps the detector sensitized. The alarm drops
// as soon as the eyes reopen.

#include <cstdint>
#include <optional>
#include <utility>

#include "drowsy/features.hpp"

namespace drowsy {

struct BaselineState {
  std::int32_t default_threshold_ms = 5000;
  std::int32_t sensitized_threshold_ms = 3000;
  std::int64_t yawn_memory_ms = kYawnMemoryMs;

  std::optional<std::int64_t> last_yawn_at;
  std::optional<std::int64_t> last_sample_ms;
  bool alarm = false;

  friend bool operator==(const BaselineState&, const BaselineState&) = default;
};

/// Sensitized threshold iff now - last_yawn_at <= yawn_memory_ms (inclusive).
std::int32_t active_threshold(const BaselineState& state, std::int64_t now_ms) noexcept;

/// Pure transition. A yawn is recovered from the sample as
/// t - since_yawn_ms whenever since_yawn_ms is below saturation; a later yawn
/// restarts the memory. Throws StreamError unless samples arrive in
/// increasing time order.
std::pair<BaselineState, bool> step(BaselineState state, const BehaviorSample& sample);

/// Convenience wrapper owning the state.
class BaselineDetector {
 public:
  BaselineDetector() = default;
  explicit BaselineDetector(BaselineState initial) : state_(std::move(initial)) {}

  bool push(const BehaviorSample& sample) {
    auto [next, alarm] = step(state_, sample);
    state_ = next;
    return alarm;
  }

  const BaselineState& state() const noexcept { return state_; }

 private:
  BaselineState state_;
};

}  // namespace drowsy
