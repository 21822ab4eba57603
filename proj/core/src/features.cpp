#include "drowsy/features.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>

#include "drowsy/error.hpp"

namespace drowsy {

namespace {

std::int64_t ceil_to_tick(std::int64_t t) {
  const auto q = t / kSamplePeriodMs;
  return (q * kSamplePeriodMs < t ? q + 1 : q) * kSamplePeriodMs;
}

}  // namespace

std::string_view to_string(Regime regime) noexcept {
  return regime == Regime::drowsy ? "drowsy" : "alert";
}

bool is_closed_frame(const FrameDetection& frame) noexcept {
  return frame.contains(DetectionLabel::closed_eye) && !frame.contains(DetectionLabel::opened_eye);
}

ExtractorState update(ExtractorState state, const FrameDetection& frame) {
  if (state.last_frame_ms && frame.timestamp_ms <= *state.last_frame_ms)
    throw StreamError("frame at " + std::to_string(frame.timestamp_ms) +
                      " ms does not follow frame at " + std::to_string(*state.last_frame_ms) + " ms");
  state.last_frame_ms = frame.timestamp_ms;

  if (frame.contains(DetectionLabel::opened_eye)) {
    state.eye_closed_since.reset();
  } else if (frame.contains(DetectionLabel::closed_eye) && !state.eye_closed_since) {
    state.eye_closed_since = frame.timestamp_ms;
  }
  if (frame.contains(DetectionLabel::yawn)) state.last_yawn_at = frame.timestamp_ms;
  return state;
}

BehaviorSample sample(const ExtractorState& state, std::int64_t t_ms) {
  if (t_ms % kSamplePeriodMs != 0)
    throw std::invalid_argument("sample time " + std::to_string(t_ms) + " is not on a 100 ms tick");
  BehaviorSample s;
  s.t_ms = t_ms;
  if (state.eye_closed_since)
    s.eye_closure_ms =
        static_cast<std::int32_t>(std::clamp<std::int64_t>(t_ms - *state.eye_closed_since, 0, kClosureCapMs));
  s.since_yawn_ms = static_cast<std::int32_t>(
      state.last_yawn_at ? std::clamp<std::int64_t>(t_ms - *state.last_yawn_at, 0, kYawnMemoryMs)
                         : kYawnMemoryMs);
  return s;
}

void SampleStream::push(const FrameDetection& frame, const Sink& sink) {
  if (!next_tick_) next_tick_ = ceil_to_tick(frame.timestamp_ms);
  while (*next_tick_ < frame.timestamp_ms) {
    sink(sample(state_, *next_tick_));
    *next_tick_ += kSamplePeriodMs;
  }
  state_ = update(std::move(state_), frame);
}

void SampleStream::finish(const Sink& sink) {
  if (!next_tick_ || !state_.last_frame_ms) return;
  while (*next_tick_ <= *state_.last_frame_ms) {
    sink(sample(state_, *next_tick_));
    *next_tick_ += kSamplePeriodMs;
  }
}

std::vector<BehaviorSample> extract_samples(std::span<const FrameDetection> frames) {
  std::vector<BehaviorSample> out;
  if (!frames.empty())
    out.reserve(static_cast<std::size_t>(
        (frames.back().timestamp_ms - frames.front().timestamp_ms) / kSamplePeriodMs + 1));
  SampleStream stream;
  auto sink = [&out](const BehaviorSample& s) { out.push_back(s); };
  for (const auto& frame : frames) stream.push(frame, sink);
  stream.finish(sink);
  return out;
}

void check_spacing(std::span<const BehaviorSample> samples) {
  for (std::size_t i = 1; i < samples.size(); ++i)
    if (samples[i].t_ms - samples[i - 1].t_ms != kSamplePeriodMs)
      throw StreamError(i, "sample spacing " + std::to_string(samples[i].t_ms - samples[i - 1].t_ms) +
                               " ms, expected 100 ms");
}

std::vector<Window> windows(std::span<const BehaviorSample> samples, std::size_t stride) {
  if (stride == 0) throw std::invalid_argument("window stride must be >= 1");
  check_spacing(samples);
  std::vector<Window> out;
  out.reserve(window_count(samples.size(), stride));
  for (std::size_t k = 0; k + kWindowLength <= samples.size(); k += stride) {
    Window w;
    std::copy_n(samples.begin() + static_cast<std::ptrdiff_t>(k), kWindowLength, w.samples.begin());
    out.push_back(w);
  }
  return out;
}

FeatureStep normalize(const BehaviorSample& s) noexcept {
  return {static_cast<double>(s.eye_closure_ms) / static_cast<double>(kClosureCapMs),
          static_cast<double>(s.since_yawn_ms) / static_cast<double>(kYawnMemoryMs)};
}

NormalizedWindow normalize(const Window& w) noexcept {
  NormalizedWindow out;
  for (std::size_t i = 0; i < kWindowLength; ++i) out[i] = normalize(w.samples[i]);
  return out;
}

void WindowAssembler::push(const BehaviorSample& s) {
  ring_[head_] = s;
  head_ = (head_ + 1) % kWindowLength;
  if (size_ < kWindowLength) ++size_;
}

Window WindowAssembler::window() const {
  Window w;
  for (std::size_t i = 0; i < kWindowLength; ++i) w.samples[i] = ring_[(head_ + i) % kWindowLength];
  return w;
}

std::string export_series(std::span<const BehaviorSample> samples) {
  std::string out;
  out.reserve(samples.size() * 12);
  for (const auto& s : samples) {
    out += std::to_string(s.eye_closure_ms);
    out += ' ';
    out += std::to_string(s.since_yawn_ms);
    out += '\n';
  }
  return out;
}

std::vector<BehaviorSample> import_series(std::string_view text, std::int64_t start_ms) {
  std::vector<BehaviorSample> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto eol = text.find('\n', pos);
    const auto line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() : eol + 1;
    ++line_no;

    std::array<std::int64_t, 2> values{};
    std::size_t columns = 0;
    std::size_t i = 0;
    while (i < line.size()) {
      if (line[i] == ' ' || line[i] == '\t') {
        ++i;
        continue;
      }
      auto j = line.find_first_of(" \t", i);
      if (j == std::string_view::npos) j = line.size();
      const auto token = line.substr(i, j - i);
      if (columns == 2) throw ParseError(line_no, "expected 2 columns, found more");
      auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), values[columns]);
      if (ec != std::errc() || end != token.data() + token.size())
        throw ParseError(line_no, "not an integer: '" + std::string(token) + "'");
      ++columns;
      i = j;
    }
    if (columns != 2) throw ParseError(line_no, "expected 2 columns, found " + std::to_string(columns));
    if (values[0] < 0 || values[0] > kClosureCapMs)
      throw ParseError(line_no, "eye closure outside [0, 10000] ms");
    if (values[1] < 0 || values[1] > kYawnMemoryMs)
      throw ParseError(line_no, "time since yawn outside [0, 120000] ms");

    out.push_back({start_ms + static_cast<std::int64_t>(out.size()) * kSamplePeriodMs,
                   static_cast<std::int32_t>(values[0]), static_cast<std::int32_t>(values[1])});
  }
  return out;
}

}  // namespace drowsy
