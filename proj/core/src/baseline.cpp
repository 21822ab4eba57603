#include "drowsy/baseline.hpp"

#include <algorithm>
#include <string>

#include "drowsy/error.hpp"

namespace drowsy {

std::int32_t active_threshold(const BaselineState& state, std::int64_t now_ms) noexcept {
  if (state.last_yawn_at && now_ms - *state.last_yawn_at <= state.yawn_memory_ms)
    return state.sensitized_threshold_ms;
  return state.default_threshold_ms;
}

std::pair<BaselineState, bool> step(BaselineState state, const BehaviorSample& sample) {
  if (state.last_sample_ms && sample.t_ms <= *state.last_sample_ms)
    throw StreamError("baseline sample at " + std::to_string(sample.t_ms) + " ms does not follow " +
                      std::to_string(*state.last_sample_ms) + " ms");
  state.last_sample_ms = sample.t_ms;

  if (sample.since_yawn_ms < state.yawn_memory_ms) {
    const std::int64_t yawn_at = sample.t_ms - sample.since_yawn_ms;
    state.last_yawn_at = state.last_yawn_at ? std::max(*state.last_yawn_at, yawn_at) : yawn_at;
  }

  state.alarm = sample.eye_closure_ms >= active_threshold(state, sample.t_ms);
  return {state, state.alarm};
}

}  // namespace drowsy
