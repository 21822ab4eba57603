#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#if __has_include(<CLI11.hpp>)
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif

#include "drowsy/checkpoint.hpp"
#include "drowsy/detection.hpp"
#include "drowsy/error.hpp"
#include "drowsy/eval.hpp"
#include "drowsy/features.hpp"
#include "drowsy/pipeline.hpp"
#include "drowsy/simulator.hpp"
#include "drowsy/train.hpp"
#include "manifest.hpp"

namespace fs = std::filesystem;
using namespace drowsy;
using drowsyctl::Manifest;

namespace {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kInternal = 3 };

struct GlobalOptions {
  std::uint64_t seed = 1;
  fs::path out_dir = ".";
};

struct SimulateOptions {
  std::string scenario = "alert:60000,drowsy:60000";
  int fps = 30;
  RegimeParams params;
};

struct ExtractOptions {
  fs::path input;
};

struct TrainOptions {
  std::size_t scenarios = 200;
  std::int64_t scenario_ms = TrainingSetOptions{}.scenario_ms;
  std::size_t window_stride = TrainingSetOptions{}.window_stride;
  std::vector<fs::path> detections;
  std::vector<fs::path> labels;
  TrainConfig config;
};

struct RunOptions {
  fs::path checkpoint;
  fs::path input = "-";
  std::string events = "events.jsonl";
  std::string mode = "replay";
  PipelineConfig config;
};

struct EvalOptions {
  fs::path checkpoint;
  fs::path detections;
  fs::path labels;
  double threshold = kDefaultAlarmThreshold;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw Error("cannot write " + path.string());
}

std::vector<FrameDetection> read_detections(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return parse_detection_log(in);
}

LabeledStream read_labeled(const fs::path& detections, const fs::path& labels) {
  LabeledStream s;
  s.samples = extract_samples(read_detections(detections));
  s.labels = parse_ground_truth(read_file(labels));
  if (s.samples.size() != s.labels.size())
    throw DataError(labels.string() + " has " + std::to_string(s.labels.size()) + " labels for " +
                    std::to_string(s.samples.size()) + " samples");
  return s;
}

// ---------------------------------------------------------------------------

void cmd_simulate(const GlobalOptions& g, SimulateOptions o, Manifest& m) {
  o.params.seed = g.seed;
  const auto scenario = parse_scenario(o.scenario);
  const auto stream = generate_frames(scenario, o.params, o.fps);

  const auto log_path = g.out_dir / "detections.jsonl";
  const auto truth_path = g.out_dir / "ground_truth.txt";
  {
    std::ofstream out(log_path, std::ios::binary);
    if (!out) throw Error("cannot write " + log_path.string());
    write_detection_log(out, stream.frames);
  }
  write_file(truth_path, format_ground_truth(stream.ground_truth));
  m.add_output(log_path);
  m.add_output(truth_path);
  m.set_field("frames", stream.frames.size());
  m.set_field("samples", stream.ground_truth.size());
  std::cerr << "simulate: " << stream.frames.size() << " frames, " << stream.ground_truth.size() << " samples\n";
}

void cmd_extract(const GlobalOptions& g, const ExtractOptions& o, Manifest& m) {
  m.add_input(o.input);
  const auto samples = extract_samples(read_detections(o.input));
  const auto path = g.out_dir / "series.txt";
  write_file(path, export_series(samples));
  m.add_output(path);
  m.set_field("first_sample_ms", samples.empty() ? 0 : samples.front().t_ms);
  m.set_field("samples", samples.size());
  std::cerr << "extract: " << samples.size() << " samples\n";
}

void cmd_train(const GlobalOptions& g, TrainOptions o, Manifest& m) {
  o.config.seed = g.seed;
  TrainingSet set;
  if (!o.detections.empty()) {
    if (o.detections.size() != o.labels.size())
      throw ConfigError("--detections and --labels must be given the same number of times");
    for (std::size_t i = 0; i < o.detections.size(); ++i) {
      m.add_input(o.detections[i]);
      m.add_input(o.labels[i]);
      const auto s = read_labeled(o.detections[i], o.labels[i]);
      auto part = label_windows(s.samples, s.labels, o.window_stride);
      set.alert += part.alert;
      set.drowsy += part.drowsy;
      set.sequences.insert(set.sequences.end(), part.sequences.begin(), part.sequences.end());
    }
  } else {
    RegimeParams params;
    params.seed = g.seed;
    set = generate_training_set(o.scenarios, params, TrainingSetOptions{o.window_stride, o.scenario_ms});
  }
  std::cerr << "train: " << set.sequences.size() << " windows (" << set.alert << " alert, " << set.drowsy
            << " drowsy)\n";

  const auto result = train(set.sequences, o.config, [](const EpochStats& s) {
    std::fprintf(stderr, "epoch %zu train_loss %.5f val_loss %.5f val_acc %.4f\n", s.epoch, s.train_loss,
                 s.validation_loss, s.validation_accuracy);
  });

  const auto ckpt = g.out_dir / "model.ckpt";
  const auto trace = g.out_dir / "loss_trace.tsv";
  save_checkpoint_file(result.model, ckpt);
  std::ostringstream t;
  t << "epoch\ttrain_loss\tvalidation_loss\tvalidation_accuracy\n";
  for (const auto& s : result.trace) {
    char line[128];
    std::snprintf(line, sizeof line, "%zu\t%.9g\t%.9g\t%.6f\n", s.epoch, s.train_loss, s.validation_loss,
                  s.validation_accuracy);
    t << line;
  }
  write_file(trace, t.str());
  m.add_output(ckpt);
  m.add_output(trace);
  m.set_field("windows", set.sequences.size());
  m.set_field("best_epoch", result.best_epoch);
}

void cmd_run(const GlobalOptions& g, RunOptions o, Manifest& m) {
  if (o.mode == "replay")
    o.config.mode = PacingMode::replay;
  else if (o.mode == "realtime")
    o.config.mode = PacingMode::realtime;
  else
    throw ConfigError("--mode must be replay or realtime");
  validate(o.config);

  m.add_input(o.checkpoint);
  m.add_input(o.input);
  const auto model = load_checkpoint_file(o.checkpoint);

  std::ifstream file;
  std::istream* in = &std::cin;
  if (o.input != "-") {
    file.open(o.input);
    if (!file) throw Error("cannot open " + o.input.string());
    in = &file;
  }

  const bool to_stdout = o.events == "-";
  const auto events_path = g.out_dir / o.events;
  std::ofstream events_file;
  if (!to_stdout) {
    events_file.open(events_path);
    if (!events_file) throw Error("cannot write " + events_path.string());
  }
  std::ostream& events = to_stdout ? std::cout : events_file;

  RunSummary summary;
  try {
    summary = run(o.config, *in, model, [&](const DrowsinessEvent& e) {
      events << format_event_record(e) << '\n';
      if (!events) throw Error("event sink write failed");
    });
  } catch (const PipelineError& e) {
    std::cerr << format_summary_record(e.summary()) << '\n';
    throw;
  }
  if (!to_stdout) {
    events_file.close();
    m.add_output(events_path);
  }
  const auto record = format_summary_record(summary);
  const auto summary_path = g.out_dir / "summary.json";
  write_file(summary_path, record + "\n");
  m.add_output(summary_path);
  (to_stdout ? std::cerr : std::cout) << record << '\n';
}

void cmd_eval(const GlobalOptions& g, const EvalOptions& o, Manifest& m) {
  m.add_input(o.checkpoint);
  m.add_input(o.detections);
  m.add_input(o.labels);
  const auto model = load_checkpoint_file(o.checkpoint);
  const auto report = evaluate(model_predictor(model), read_labeled(o.detections, o.labels), {}, o.threshold);
  const auto text = format_report(report);
  const auto report_path = g.out_dir / "report.txt";
  const auto plot_path = g.out_dir / "plot.tsv";
  write_file(report_path, text);
  write_file(plot_path, format_plot_data(report.trace));
  m.add_output(report_path);
  m.add_output(plot_path);
  std::cout << text;
}

void cmd_compare(const GlobalOptions& g, const EvalOptions& o, Manifest& m) {
  m.add_input(o.checkpoint);
  m.add_input(o.detections);
  const auto model = load_checkpoint_file(o.checkpoint);
  const auto samples = extract_samples(read_detections(o.detections));
  const auto rows = compare_traces(model_predictor(model), {}, samples, o.threshold);
  const auto path = g.out_dir / "trace.tsv";
  write_file(path, format_plot_data(rows));
  m.add_output(path);
  for (auto d : {Divergence::lstm_persists, Divergence::early_warning, Divergence::baseline_only})
    std::cout << to_string(d) << ": " << count_divergences(rows, d) << '\n';
  std::cout << "samples: " << rows.size() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Drowsiness detection toolkit: simulate, extract, train, run, eval, compare"};
  app.require_subcommand(1);
  app.set_config("--config", "", "INI/TOML file of option defaults ([section] per subcommand)");

  GlobalOptions g;
  app.add_option("--seed", g.seed, "Seed for every random process")->capture_default_str();
  app.add_option("--out-dir", g.out_dir, "Directory receiving outputs and the manifest")->capture_default_str();

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic detection log with ground truth");
  simulate->add_option("--scenario", sim.scenario, "Segments as regime:ms[,regime:ms...]")->capture_default_str();
  simulate->add_option("--fps", sim.fps, "Frame rate")->capture_default_str()->check(CLI::Range(1, 1000));
  simulate->add_option("--drowsy-interval-mean", sim.params.drowsy_blink_interval_mean_ms,
                       "Mean open-eye gap in the drowsy regime (ms)")
      ->capture_default_str();
  simulate->add_option("--alert-yawns-per-min", sim.params.alert_yawns_per_min)->capture_default_str();
  simulate->add_option("--drowsy-yawns-per-min", sim.params.drowsy_yawns_per_min)->capture_default_str();

  ExtractOptions ext;
  auto* extract = app.add_subcommand("extract", "Convert a detection log to a closure/yawn series");
  extract->add_option("--input", ext.input, "Detection log")->required();

  TrainOptions tr;
  auto* train_cmd = app.add_subcommand("train", "Train the LSTM classifier");
  train_cmd->add_option("--scenarios", tr.scenarios, "Simulated scenarios when no logs are given")
      ->capture_default_str();
  train_cmd->add_option("--scenario-ms", tr.scenario_ms, "Length of each simulated scenario")->capture_default_str();
  train_cmd->add_option("--window-stride", tr.window_stride, "Keep every k-th training window")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--detections", tr.detections, "Detection log(s) to train on")->check(CLI::ExistingFile);
  train_cmd->add_option("--labels", tr.labels, "Ground-truth file(s) matching --detections")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--epochs", tr.config.epochs)->capture_default_str();
  train_cmd->add_option("--batch-size", tr.config.batch_size)->capture_default_str();
  train_cmd->add_option("--lr", tr.config.learning_rate)->capture_default_str();
  train_cmd->add_option("--momentum", tr.config.momentum)->capture_default_str();
  train_cmd->add_option("--clip-norm", tr.config.clip_norm)->capture_default_str();
  train_cmd->add_option("--hidden", tr.config.hidden_dim)->capture_default_str();
  train_cmd->add_option("--validation-fraction", tr.config.validation_fraction)->capture_default_str();

  RunOptions rn;
  auto* run_cmd = app.add_subcommand("run", "Stream a detection log through the two-stage pipeline");
  run_cmd->add_option("--checkpoint", rn.checkpoint, "Trained model")->required();
  run_cmd->add_option("--input", rn.input, "Detection log, '-' for stdin")->capture_default_str();
  run_cmd->add_option("--events", rn.events, "Event file name in --out-dir, '-' for stdout")->capture_default_str();
  run_cmd->add_option("--mode", rn.mode, "replay or realtime")->capture_default_str();
  run_cmd->add_option("--queue", rn.config.queue_capacity, "Channel capacity")->capture_default_str();
  run_cmd->add_option("--stride", rn.config.stride, "Score every k-th window")->capture_default_str();
  run_cmd->add_option("--threshold", rn.config.probability_threshold)->capture_default_str();

  EvalOptions ev;
  auto* eval_cmd = app.add_subcommand("eval", "Score LSTM and baseline against ground truth");
  auto* compare_cmd = app.add_subcommand("compare", "Side-by-side LSTM/baseline trace with divergence flags");
  for (auto* cmd : {eval_cmd, compare_cmd}) {
    cmd->add_option("--checkpoint", ev.checkpoint, "Trained model")->required();
    cmd->add_option("--detections", ev.detections, "Detection log")->required();
    cmd->add_option("--threshold", ev.threshold)->capture_default_str();
  }
  eval_cmd->add_option("--labels", ev.labels, "Ground truth")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    fs::create_directories(g.out_dir);
    auto* active = app.get_subcommands().front();
    Manifest m(active->get_name(), std::vector<std::string>(argv, argv + argc), g.seed);
    m.set_config(app.config_to_str(true, false));

    if (active == simulate)
      cmd_simulate(g, sim, m);
    else if (active == extract)
      cmd_extract(g, ext, m);
    else if (active == train_cmd)
      cmd_train(g, tr, m);
    else if (active == run_cmd)
      cmd_run(g, rn, m);
    else if (active == eval_cmd)
      cmd_eval(g, ev, m);
    else
      cmd_compare(g, ev, m);
    m.write(g.out_dir);
    return kOk;
  } catch (const drowsy::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
}
