#include "drowsy/eval.hpp"

#include <cstdio>
#include <sstream>

#include "drowsy/error.hpp"
#include "drowsy/train.hpp"

namespace drowsy {

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string optional_ms(const std::optional<std::int64_t>& v) { return v ? std::to_string(*v) : "none"; }

}  // namespace

Predictor model_predictor(const LstmModel& model) {
  return [model](const NormalizedWindow& w) { return forward(model, w); };
}

LabeledStream labeled_stream(const SimulatedStream& stream) {
  LabeledStream out;
  out.samples = extract_samples(stream.frames);
  out.labels = stream.ground_truth;
  return out;
}

double Confusion::accuracy() const noexcept { return ratio(tp + tn, total()); }
double Confusion::precision() const noexcept { return ratio(tp, tp + fp); }
double Confusion::recall() const noexcept { return ratio(tp, tp + fn); }
double Confusion::f1() const noexcept {
  const double p = precision();
  const double r = recall();
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

void Confusion::add(bool predicted, bool actual) noexcept {
  if (predicted && actual)
    ++tp;
  else if (predicted)
    ++fp;
  else if (actual)
    ++fn;
  else
    ++tn;
}

std::string_view to_string(Divergence d) noexcept {
  switch (d) {
    case Divergence::none: return "none";
    case Divergence::lstm_persists: return "lstm_persists";
    case Divergence::early_warning: return "early_warning";
    case Divergence::baseline_only: return "baseline_only";
  }
  return "none";
}

std::vector<TraceRow> compare_traces(const Predictor& predictor, const BaselineState& baseline,
                                     std::span<const BehaviorSample> samples, double threshold) {
  check_spacing(samples);
  std::vector<TraceRow> rows;
  rows.reserve(samples.size());
  BaselineDetector detector(baseline);
  WindowAssembler assembler;
  bool baseline_seen_in_run = false;

  for (const auto& s : samples) {
    TraceRow row;
    row.t_ms = s.t_ms;
    row.eye_closure_ms = s.eye_closure_ms;
    row.since_yawn_ms = s.since_yawn_ms;
    row.baseline_alarm = detector.push(s);
    assembler.push(s);
    if (assembler.full()) {
      row.lstm_probability = predictor(normalize(assembler.window()));
      row.lstm_alarm = classify(*row.lstm_probability, threshold);
    }

    if (!row.lstm_alarm)
      baseline_seen_in_run = false;
    else if (row.baseline_alarm)
      baseline_seen_in_run = true;

    if (row.lstm_alarm && !row.baseline_alarm)
      row.divergence = baseline_seen_in_run ? Divergence::lstm_persists : Divergence::early_warning;
    else if (!row.lstm_alarm && row.baseline_alarm)
      row.divergence = Divergence::baseline_only;
    rows.push_back(row);
  }
  return rows;
}

std::size_t count_divergences(std::span<const TraceRow> rows, std::optional<Divergence> kind) {
  std::size_t n = 0;
  for (const auto& r : rows)
    if (r.divergence != Divergence::none && (!kind || r.divergence == *kind)) ++n;
  return n;
}

std::optional<std::int64_t> EpisodeTiming::lstm_delay_ms() const {
  if (!lstm_first_alarm_ms) return std::nullopt;
  return *lstm_first_alarm_ms - onset_ms;
}

std::optional<std::int64_t> EpisodeTiming::baseline_delay_ms() const {
  if (!baseline_first_alarm_ms) return std::nullopt;
  return *baseline_first_alarm_ms - onset_ms;
}

std::optional<std::int64_t> EpisodeTiming::lead_over_baseline_ms() const {
  if (!lstm_first_alarm_ms || !baseline_first_alarm_ms) return std::nullopt;
  return *baseline_first_alarm_ms - *lstm_first_alarm_ms;
}

EvalReport evaluate(const Predictor& predictor, const LabeledStream& stream, const BaselineState& baseline,
                    double threshold) {
  if (stream.samples.empty()) throw DataError("cannot evaluate an empty stream");
  if (stream.samples.size() != stream.labels.size())
    throw DataError("stream has " + std::to_string(stream.labels.size()) + " labels for " +
                    std::to_string(stream.samples.size()) + " samples");

  EvalReport report;
  report.trace = compare_traces(predictor, baseline, stream.samples, threshold);
  const std::span<const Regime> labels(stream.labels);

  for (std::size_t end = kWindowLength - 1; end < report.trace.size(); ++end) {
    const bool actual = majority_label(labels.subspan(end + 1 - kWindowLength, kWindowLength)) == Regime::drowsy;
    report.lstm.add(report.trace[end].lstm_alarm, actual);
    report.baseline.add(report.trace[end].baseline_alarm, actual);
  }

  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != Regime::drowsy || (i > 0 && labels[i - 1] == Regime::drowsy)) continue;
    std::size_t j = i;
    while (j < labels.size() && labels[j] == Regime::drowsy) ++j;
    EpisodeTiming ep;
    ep.onset_ms = report.trace[i].t_ms;
    ep.end_ms = report.trace[j - 1].t_ms + kSamplePeriodMs;
    ep.lstm_alarm_before_onset = i > 0 && report.trace[i - 1].lstm_alarm;
    for (std::size_t k = i; k < j; ++k) {
      if (!ep.lstm_first_alarm_ms && report.trace[k].lstm_alarm) ep.lstm_first_alarm_ms = report.trace[k].t_ms;
      if (!ep.baseline_first_alarm_ms && report.trace[k].baseline_alarm)
        ep.baseline_first_alarm_ms = report.trace[k].t_ms;
    }
    report.episodes.push_back(ep);
  }
  return report;
}

std::string format_report(const EvalReport& report) {
  std::ostringstream out;
  auto block = [&out](const char* name, const Confusion& c) {
    out << name << ".windows: " << c.total() << '\n'
        << name << ".tp: " << c.tp << '\n'
        << name << ".fp: " << c.fp << '\n'
        << name << ".tn: " << c.tn << '\n'
        << name << ".fn: " << c.fn << '\n'
        << name << ".accuracy: " << fixed(c.accuracy()) << '\n'
        << name << ".precision: " << fixed(c.precision()) << '\n'
        << name << ".recall: " << fixed(c.recall()) << '\n'
        << name << ".f1: " << fixed(c.f1()) << '\n';
  };
  block("lstm", report.lstm);
  block("baseline", report.baseline);
  out << "episodes: " << report.episodes.size() << '\n';
  for (std::size_t i = 0; i < report.episodes.size(); ++i) {
    const auto& ep = report.episodes[i];
    out << "episode." << i << ".onset_ms: " << ep.onset_ms << '\n'
        << "episode." << i << ".lstm_delay_ms: " << optional_ms(ep.lstm_delay_ms()) << '\n'
        << "episode." << i << ".baseline_delay_ms: " << optional_ms(ep.baseline_delay_ms()) << '\n'
        << "episode." << i << ".lead_over_baseline_ms: " << optional_ms(ep.lead_over_baseline_ms()) << '\n';
  }
  out << "divergences: " << count_divergences(report.trace) << '\n';
  return out.str();
}

std::string format_plot_data(std::span<const TraceRow> rows) {
  std::ostringstream out;
  out << "t_ms\teye_closure_ms\tsince_yawn_ms\tlstm_probability\tlstm_alarm\tbaseline_alarm\tdivergence\n";
  for (const auto& r : rows) {
    out << r.t_ms << '\t' << r.eye_closure_ms << '\t' << r.since_yawn_ms << '\t'
        << (r.lstm_probability ? fixed(*r.lstm_probability, 6) : std::string("nan")) << '\t' << int(r.lstm_alarm)
        << '\t' << int(r.baseline_alarm) << '\t' << to_string(r.divergence) << '\n';
  }
  return out.str();
}

}  // namespace drowsy
