#include "drowsy/simulator.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "drowsy/error.hpp"
#include "drowsy/random.hpp"

namespace drowsy {

namespace {

void check_range(const DurationRange& r, const char* name) {
  if (r.min_ms < 0 || r.max_ms < r.min_ms) throw ConfigError(std::string(name) + ": empty or negative range");
}

std::int64_t draw(Rng& rng, const DurationRange& r) { return rng.uniform_int(r.min_ms, r.max_ms); }

double yawn_rate_per_ms(const RegimeParams& p, Regime r) {
  return (r == Regime::drowsy ? p.drowsy_yawns_per_min : p.alert_yawns_per_min) / 60'000.0;
}

// Fixed face geometry on a 640x480 frame.
constexpr BoundingBox kFace{200, 110, 440, 420};
constexpr BoundingBox kLeftEye{250, 200, 300, 232};
constexpr BoundingBox kRightEye{340, 200, 390, 232};
constexpr BoundingBox kLeftBrow{245, 175, 305, 192};
constexpr BoundingBox kRightBrow{335, 175, 395, 192};
constexpr BoundingBox kMouth{280, 320, 360, 372};
constexpr BoundingBox kYawn{275, 305, 365, 400};

double confidence(Rng& rng) { return static_cast<double>(rng.uniform_int(80, 99)) / 100.0; }

}  // namespace

void validate(const RegimeParams& p) {
  check_range(p.alert_blink_ms, "alert_blink_ms");
  check_range(p.drowsy_closure_ms, "drowsy_closure_ms");
  check_range(p.yawn_duration_ms, "yawn_duration_ms");
  if (p.alert_blink_ms.max_ms == 0 || p.drowsy_closure_ms.max_ms == 0)
    throw ConfigError("closure durations must be positive");
  if (!(p.alert_blink_interval_mean_ms > 0.0) || !(p.drowsy_blink_interval_mean_ms > 0.0))
    throw ConfigError("blink interval means must be > 0");
  if (p.alert_yawns_per_min < 0.0 || p.drowsy_yawns_per_min < 0.0)
    throw ConfigError("yawn rates must be >= 0");
  if (p.min_open_gap_ms < 0) throw ConfigError("min_open_gap_ms must be >= 0");
}

std::int64_t Scenario::total_ms() const noexcept {
  std::int64_t total = 0;
  for (const auto& s : segments) total += s.duration_ms;
  return total;
}

Regime Scenario::regime_at(std::int64_t t_ms) const noexcept {
  std::int64_t start = 0;
  for (const auto& s : segments) {
    if (t_ms < start + s.duration_ms) return s.regime;
    start += s.duration_ms;
  }
  return segments.empty() ? Regime::alert : segments.back().regime;
}

std::vector<std::int64_t> Scenario::drowsy_onsets() const {
  std::vector<std::int64_t> out;
  std::int64_t start = 0;
  Regime previous = Regime::alert;
  for (const auto& s : segments) {
    if (s.regime == Regime::drowsy && previous == Regime::alert) out.push_back(start);
    previous = s.regime;
    start += s.duration_ms;
  }
  return out;
}

void validate(const Scenario& scenario) {
  if (scenario.segments.empty()) throw ConfigError("scenario has no segments");
  for (const auto& s : scenario.segments)
    if (s.duration_ms <= 0) throw ConfigError("scenario segment durations must be positive");
  if (scenario.total_ms() < static_cast<std::int64_t>(kWindowLength) * kSamplePeriodMs)
    throw ConfigError("scenario shorter than one 5 s window");
}

Scenario parse_scenario(std::string_view text) {
  Scenario out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    const auto item = text.substr(pos, comma - pos);
    const auto colon = item.find(':');
    if (colon == std::string_view::npos) throw ParseError("scenario segment '" + std::string(item) + "' lacks ':'");
    const auto name = item.substr(0, colon);
    const auto value = item.substr(colon + 1);
    Segment seg;
    if (name == "alert")
      seg.regime = Regime::alert;
    else if (name == "drowsy")
      seg.regime = Regime::drowsy;
    else
      throw ParseError("unknown regime '" + std::string(name) + "'");
    auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), seg.duration_ms);
    if (ec != std::errc() || end != value.data() + value.size() || value.empty())
      throw ParseError("bad segment duration '" + std::string(value) + "'");
    out.segments.push_back(seg);
    pos = comma + 1;
  }
  return out;
}

std::string format_scenario(const Scenario& scenario) {
  std::string out;
  for (const auto& s : scenario.segments) {
    if (!out.empty()) out += ',';
    out += to_string(s.regime);
    out += ':';
    out += std::to_string(s.duration_ms);
  }
  return out;
}

EventTimeline generate_timeline(const Scenario& scenario, const RegimeParams& params) {
  validate(scenario);
  validate(params);
  const std::int64_t total = scenario.total_ms();
  EventTimeline timeline;

  Rng eye_rng(mix_seed(params.seed, 1));
  std::int64_t t = 0;
  while (true) {
    const Regime gap_regime = scenario.regime_at(t);
    const double mean = gap_regime == Regime::drowsy ? params.drowsy_blink_interval_mean_ms
                                                     : params.alert_blink_interval_mean_ms;
    const auto gap = std::max(params.min_open_gap_ms, static_cast<std::int64_t>(std::llround(eye_rng.exponential(mean))));
    t += gap;
    if (t >= total) break;
    const auto duration = scenario.regime_at(t) == Regime::drowsy ? draw(eye_rng, params.drowsy_closure_ms)
                                                                  : draw(eye_rng, params.alert_blink_ms);
    if (duration <= 0) continue;
    timeline.closures.push_back({t, std::min(t + duration, total)});
    t += duration;
  }

  // Non-homogeneous Poisson process by thinning against the larger rate.
  Rng yawn_rng(mix_seed(params.seed, 2));
  const double max_rate = std::max(yawn_rate_per_ms(params, Regime::alert), yawn_rate_per_ms(params, Regime::drowsy));
  if (max_rate > 0.0) {
    double clock = 0.0;
    while (true) {
      clock += yawn_rng.exponential(1.0 / max_rate);
      const auto start = static_cast<std::int64_t>(std::llround(clock));
      if (start >= total) break;
      const bool accept = yawn_rng.uniform() * max_rate < yawn_rate_per_ms(params, scenario.regime_at(start));
      if (!accept) continue;
      const auto duration = std::max<std::int64_t>(1, draw(yawn_rng, params.yawn_duration_ms));
      timeline.yawns.push_back({start, std::min(start + duration, total)});
      clock = static_cast<double>(start + duration + params.min_open_gap_ms);
    }
  }
  return timeline;
}

SimulatedStream generate_frames(const Scenario& scenario, const RegimeParams& params, int fps) {
  if (fps <= 0 || fps > 1000) throw ConfigError("fps must be in [1, 1000]");
  SimulatedStream out;
  out.scenario = scenario;
  out.timeline = generate_timeline(scenario, params);
  const std::int64_t total = scenario.total_ms();

  Rng conf_rng(mix_seed(params.seed, 3));
  std::size_t closure = 0;
  std::size_t yawn = 0;
  for (std::int64_t i = 0;; ++i) {
    const std::int64_t t = i * 1000 / fps;
    if (t >= total) break;
    while (closure < out.timeline.closures.size() && out.timeline.closures[closure].end_ms <= t) ++closure;
    while (yawn < out.timeline.yawns.size() && out.timeline.yawns[yawn].end_ms <= t) ++yawn;
    const bool eyes_closed = closure < out.timeline.closures.size() && out.timeline.closures[closure].contains(t);
    const bool yawning = yawn < out.timeline.yawns.size() && out.timeline.yawns[yawn].contains(t);

    FrameDetection frame;
    frame.timestamp_ms = t;
    const auto eye = eyes_closed ? DetectionLabel::closed_eye : DetectionLabel::opened_eye;
    frame.detections = {
        {DetectionLabel::face, kFace, confidence(conf_rng)},
        {eye, kLeftEye, confidence(conf_rng)},
        {eye, kRightEye, confidence(conf_rng)},
        {DetectionLabel::eyebrow, kLeftBrow, confidence(conf_rng)},
        {DetectionLabel::eyebrow, kRightBrow, confidence(conf_rng)},
        {yawning ? DetectionLabel::yawn : DetectionLabel::mouth, yawning ? kYawn : kMouth, confidence(conf_rng)},
    };
    out.frames.push_back(std::move(frame));
  }

  const std::int64_t last = out.frames.back().timestamp_ms;
  out.first_tick_ms = 0;
  for (std::int64_t tick = 0; tick <= last; tick += kSamplePeriodMs) out.ground_truth.push_back(scenario.regime_at(tick));
  return out;
}

std::string format_ground_truth(std::span<const Regime> labels) {
  std::string out;
  out.reserve(labels.size() * 7);
  for (auto r : labels) {
    out += to_string(r);
    out += '\n';
  }
  return out;
}

std::vector<Regime> parse_ground_truth(std::string_view text) {
  std::vector<Regime> out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const auto line = text.substr(pos, eol - pos);
    ++line_no;
    if (line == "alert")
      out.push_back(Regime::alert);
    else if (line == "drowsy")
      out.push_back(Regime::drowsy);
    else
      throw ParseError(line_no, "expected 'alert' or 'drowsy', got '" + std::string(line) + "'");
    pos = eol + 1;
  }
  return out;
}

Regime majority_label(std::span<const Regime> window_labels) noexcept {
  const auto drowsy = std::count(window_labels.begin(), window_labels.end(), Regime::drowsy);
  return 2 * static_cast<std::size_t>(drowsy) > window_labels.size() ? Regime::drowsy : Regime::alert;
}

TrainingSet label_windows(std::span<const BehaviorSample> samples, std::span<const Regime> labels,
                          std::size_t stride) {
  if (samples.size() != labels.size())
    throw DataError("ground truth has " + std::to_string(labels.size()) + " labels for " +
                    std::to_string(samples.size()) + " samples");
  TrainingSet out;
  const auto wins = windows(samples, stride);
  out.sequences.reserve(wins.size());
  for (std::size_t k = 0; k < wins.size(); ++k) {
    const auto label = majority_label(labels.subspan(k * stride, kWindowLength));
    out.sequences.push_back({normalize(wins[k]), label});
    (label == Regime::drowsy ? out.drowsy : out.alert) += 1;
  }
  return out;
}

Scenario default_training_scenario(std::size_t index, std::int64_t duration_ms) {
  switch (index % 3) {
    case 0: return Scenario{{{Regime::alert, duration_ms}}};
    case 1: return Scenario{{{Regime::drowsy, duration_ms}}};
    default: {
      const auto half = duration_ms / 2;
      return Scenario{{{Regime::alert, half}, {Regime::drowsy, duration_ms - half}}};
    }
  }
}

TrainingSet generate_training_set(std::span<const Scenario> scenarios, const RegimeParams& params,
                                  const TrainingSetOptions& options) {
  if (options.window_stride == 0) throw ConfigError("window_stride must be >= 1");
  TrainingSet out;
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    RegimeParams p = params;
    p.seed = mix_seed(params.seed, 1000 + i);
    const auto stream = generate_frames(scenarios[i], p);
    const auto samples = extract_samples(stream.frames);
    auto part = label_windows(samples, stream.ground_truth, options.window_stride);
    out.alert += part.alert;
    out.drowsy += part.drowsy;
    out.sequences.insert(out.sequences.end(), part.sequences.begin(), part.sequences.end());
  }
  if (out.alert == 0 || out.drowsy == 0)
    throw DataError("generated training set contains a single class (" + std::to_string(out.alert) + " alert, " +
                    std::to_string(out.drowsy) + " drowsy)");
  return out;
}

TrainingSet generate_training_set(std::size_t n_scenarios, const RegimeParams& params,
                                  const TrainingSetOptions& options) {
  if (n_scenarios < 2) throw ConfigError("at least 2 scenarios are needed to cover both regimes");
  std::vector<Scenario> scenarios;
  scenarios.reserve(n_scenarios);
  for (std::size_t i = 0; i < n_scenarios; ++i) scenarios.push_back(default_training_scenario(i, options.scenario_ms));
  return generate_training_set(scenarios, params, options);
}

}  // namespace drowsy
