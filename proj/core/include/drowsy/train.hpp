#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "drowsy/lstm.hpp"

namespace drowsy {

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 64;
  double learning_rate = 0.2;
  double momentum = 0.9;
  /// Global gradient-norm clip; <= 0 disables clipping.
  double clip_norm = 5.0;
  std::uint64_t seed = 1;
  std::size_t hidden_dim = kDefaultHiddenDim;
  double validation_fraction = 0.1;
};

/// Throws ConfigError on any out-of-range field.
void validate(const TrainConfig& config);

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double validation_loss = 0.0;
  double validation_accuracy = 0.0;

  friend bool operator==(const EpochStats&, const EpochStats&) = default;
};

struct TrainResult {
  /// Parameters from the epoch with the lowest validation loss.
  LstmModel model;
  std::vector<EpochStats> trace;
  std::size_t best_epoch = 0;
};

using EpochCallback = std::function<void(const EpochStats&)>;

/// Mini-batch SGD with momentum and norm clipping over a seeded 90/10
/// train/validation split. Deterministic for a given (dataset, config).
/// Throws ConfigError for a bad config and DataError when the dataset lacks
/// either class or is too small to split.
TrainResult train(std::span<const LabeledSequence> dataset, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

/// Mean BCE and accuracy (threshold 0.5) of `model` over `data`.
struct DatasetScore {
  double loss = 0.0;
  double accuracy = 0.0;
};
DatasetScore score(const LstmModel& model, std::span<const LabeledSequence> data);

inline constexpr double kDefaultAlarmThreshold = 0.5;

/// Alarm iff probability >= threshold (ties alarm). Throws
/// std::invalid_argument unless threshold is in (0,1).
bool classify(double probability, double threshold = kDefaultAlarmThreshold);

}  // namespace drowsy
