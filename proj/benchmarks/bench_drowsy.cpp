#include <benchmark/benchmark.h>

#include <sstream>

#include "drowsy/features.hpp"
#include "drowsy/lstm.hpp"
#include "drowsy/pipeline.hpp"
#include "drowsy/random.hpp"
#include "drowsy/simulator.hpp"

namespace {

using namespace drowsy;

NormalizedWindow random_window(Rng& rng) {
  NormalizedWindow w{};
  for (auto& x : w) x = {rng.uniform(), rng.uniform()};
  return w;
}

void BM_Forward(benchmark::State& state) {
  const auto model = LstmModel::initialized(static_cast<std::size_t>(state.range(0)), 1);
  Rng rng(2);
  const auto w = random_window(rng);
  for (auto _ : state) benchmark::DoNotOptimize(forward(model, w));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Forward)->Arg(4)->Arg(16)->Arg(32);

void BM_BackwardBatch(benchmark::State& state) {
  const auto model = LstmModel::initialized(kDefaultHiddenDim, 1);
  Rng rng(3);
  std::vector<LabeledSequence> batch(static_cast<std::size_t>(state.range(0)));
  for (auto& s : batch) {
    s.window = random_window(rng);
    s.label = rng.bernoulli(0.5) ? Regime::drowsy : Regime::alert;
  }
  for (auto _ : state) benchmark::DoNotOptimize(backward(model, batch).loss);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BackwardBatch)->Arg(1)->Arg(64);

void BM_ExtractSamples(benchmark::State& state) {
  RegimeParams params;
  const auto stream = generate_frames(parse_scenario("alert:60000,drowsy:60000"), params);
  for (auto _ : state) benchmark::DoNotOptimize(extract_samples(stream.frames).size());
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(stream.frames.size()));
}
BENCHMARK(BM_ExtractSamples);

void BM_ParseDetectionLog(benchmark::State& state) {
  RegimeParams params;
  const auto stream = generate_frames(parse_scenario("alert:30000"), params);
  std::ostringstream out;
  write_detection_log(out, stream.frames);
  const auto text = out.str();
  for (auto _ : state) benchmark::DoNotOptimize(parse_detection_log(text).size());
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(stream.frames.size()));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_ParseDetectionLog);

void BM_PipelineReplay(benchmark::State& state) {
  RegimeParams params;
  const auto stream = generate_frames(parse_scenario("alert:30000,drowsy:30000"), params);
  const auto model = LstmModel::initialized(kDefaultHiddenDim, 1);
  PipelineConfig config;
  config.queue_capacity = static_cast<std::size_t>(state.range(0));
  std::size_t samples = 0;
  for (auto _ : state) {
    std::size_t i = 0;
    const auto summary = run(
        config,
        [&]() -> std::optional<FrameDetection> {
          if (i == stream.frames.size()) return std::nullopt;
          return stream.frames[i++];
        },
        model, [](const DrowsinessEvent& e) { benchmark::DoNotOptimize(e.lstm_alarm); });
    samples += summary.samples_consumed;
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(samples));
}
BENCHMARK(BM_PipelineReplay)->Arg(64)->Arg(256)->UseRealTime()->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
