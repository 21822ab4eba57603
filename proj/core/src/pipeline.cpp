#include "drowsy/pipeline.hpp"

#include <chrono>
#include <exception>
#include <thread>

#include <nlohmann/json.hpp>

#include "drowsy/channel.hpp"
#include "drowsy/train.hpp"

namespace drowsy {

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t micros_between(Clock::time_point a, Clock::time_point b) {
  return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::microseconds>(b - a).count());
}

struct QueuedSample {
  BehaviorSample sample;
  std::uint64_t produce_us = 0;
  Clock::time_point enqueued;
};

std::string describe(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const std::exception& ex) {
    return ex.what();
  } catch (...) {
    return "unknown error";
  }
}

}  // namespace

void validate(const PipelineConfig& config) {
  if (config.sample_period_ms != kSamplePeriodMs) throw ConfigError("sample_period_ms must be 100");
  if (config.window_len != kWindowLength) throw ConfigError("window_len must be 50");
  if (config.stride < 1) throw ConfigError("stride must be >= 1");
  if (config.queue_capacity < config.window_len) throw ConfigError("queue_capacity must be >= window_len");
  if (!(config.probability_threshold > 0.0 && config.probability_threshold < 1.0))
    throw ConfigError("probability_threshold must be in (0,1)");
}

RunSummary run(const PipelineConfig& config, const FrameSource& source, const LstmModel& model,
               const EventSink& sink) {
  validate(config);

  BoundedChannel<QueuedSample> channel(config.queue_capacity);
  RunSummary summary;
  std::exception_ptr producer_error;
  std::exception_ptr consumer_error;
  const auto wall_start = Clock::now();

  {
    std::jthread producer([&] {
      try {
        SampleStream stream;
        std::optional<std::int64_t> first_frame_ms;
        bool open = true;
        Clock::time_point step_start;
        auto emit = [&](const BehaviorSample& s) {
          if (!open) return;
          QueuedSample item{s, micros_between(step_start, Clock::now()), Clock::now()};
          if (config.mode == PacingMode::replay) {
            open = channel.push(std::move(item));
            if (open) ++summary.samples_produced;
          } else {
            const auto evicted = channel.push_evicting(std::move(item));
            open = evicted.has_value();
            if (open) {
              ++summary.samples_produced;
              summary.drops += *evicted;
            }
          }
        };

        while (open) {
          step_start = Clock::now();
          auto frame = source();
          if (!frame) break;
          ++summary.frames_read;
          if (config.mode == PacingMode::realtime) {
            if (!first_frame_ms) first_frame_ms = frame->timestamp_ms;
            std::this_thread::sleep_until(wall_start +
                                          std::chrono::milliseconds(frame->timestamp_ms - *first_frame_ms));
            step_start = Clock::now();
          }
          stream.push(*frame, emit);
        }
        step_start = Clock::now();
        if (open) stream.finish(emit);
      } catch (...) {
        producer_error = std::current_exception();
      }
      channel.close();
    });

    std::jthread consumer([&] {
      WindowAssembler windows;
      BaselineDetector baseline(config.baseline);
      std::optional<double> probability;
      std::size_t index = 0;
      try {
        while (auto item = channel.pop()) {
          const auto popped = Clock::now();
          ++summary.samples_consumed;

          DrowsinessEvent event;
          event.index = index;
          event.t_ms = item->sample.t_ms;
          event.sample = item->sample;
          event.produce_us = item->produce_us;
          event.queue_us = micros_between(item->enqueued, popped);

          event.baseline_alarm = baseline.push(item->sample);
          windows.push(item->sample);
          if (windows.full() && (index + 1 - config.window_len) % config.stride == 0)
            probability = forward(model, normalize(windows.window()));
          if (windows.full()) {
            event.lstm_probability = probability;
            event.lstm_alarm = classify(*probability, config.probability_threshold);
          }
          event.consume_us = micros_between(popped, Clock::now());

          sink(event);
          ++summary.events_emitted;
          ++index;
        }
      } catch (...) {
        consumer_error = std::current_exception();
        channel.cancel();
        while (channel.try_pop()) ++summary.drained;
        // The producer may still be mid-push; wait for its close().
        while (auto rest = channel.pop()) ++summary.drained;
      }
    });
  }

  summary.wall_seconds = std::chrono::duration<double>(Clock::now() - wall_start).count();
  summary.throughput_sps =
      summary.wall_seconds > 0.0 ? static_cast<double>(summary.samples_consumed) / summary.wall_seconds : 0.0;
  summary.max_queue_depth = channel.high_watermark();

  if (producer_error || consumer_error) {
    std::string what = producer_error ? "source error: " + describe(producer_error)
                                      : "sink error: " + describe(consumer_error);
    summary.error = what;
    throw PipelineError(summary, what);
  }
  return summary;
}

RunSummary run(const PipelineConfig& config, std::istream& in, const LstmModel& model, const EventSink& sink) {
  DetectionLogReader reader(in);
  return run(config, [&reader] { return reader.next(); }, model, sink);
}

std::string format_event_record(const DrowsinessEvent& event) {
  nlohmann::ordered_json j;
  j["t"] = event.t_ms;
  j["closure_ms"] = event.sample.eye_closure_ms;
  j["since_yawn_ms"] = event.sample.since_yawn_ms;
  j["p"] = event.lstm_probability ? nlohmann::ordered_json(*event.lstm_probability) : nlohmann::ordered_json();
  j["lstm_alarm"] = event.lstm_alarm;
  j["baseline_alarm"] = event.baseline_alarm;
  j["produce_us"] = event.produce_us;
  j["queue_us"] = event.queue_us;
  j["consume_us"] = event.consume_us;
  return j.dump();
}

std::string format_summary_record(const RunSummary& summary) {
  nlohmann::ordered_json j;
  j["samples_produced"] = summary.samples_produced;
  j["samples_consumed"] = summary.samples_consumed;
  j["events_emitted"] = summary.events_emitted;
  j["drops"] = summary.drops;
  j["drained"] = summary.drained;
  j["frames_read"] = summary.frames_read;
  j["max_queue_depth"] = summary.max_queue_depth;
  j["wall_seconds"] = summary.wall_seconds;
  j["throughput_sps"] = summary.throughput_sps;
  j["error"] = summary.error ? nlohmann::ordered_json(*summary.error) : nlohmann::ordered_json();
  return j.dump();
}

}  // namespace drowsy
