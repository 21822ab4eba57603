#include "drowsy/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "drowsy/error.hpp"
#include "drowsy/random.hpp"

namespace drowsy {

namespace {

void shuffle(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i - 1)));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace

void validate(const TrainConfig& config) {
  if (config.epochs < 1) throw ConfigError("epochs must be >= 1");
  if (config.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(config.learning_rate > 0.0) || !std::isfinite(config.learning_rate))
    throw ConfigError("learning_rate must be > 0");
  if (!(config.momentum >= 0.0 && config.momentum < 1.0)) throw ConfigError("momentum must be in [0,1)");
  if (!std::isfinite(config.clip_norm)) throw ConfigError("clip_norm must be finite");
  if (config.hidden_dim < 1) throw ConfigError("hidden_dim must be >= 1");
  if (!(config.validation_fraction > 0.0 && config.validation_fraction < 1.0))
    throw ConfigError("validation_fraction must be in (0,1)");
}

DatasetScore score(const LstmModel& model, std::span<const LabeledSequence> data) {
  DatasetScore out;
  if (data.empty()) return out;
  std::size_t correct = 0;
  for (const auto& seq : data) {
    const double logit = forward_logit(model, seq.window);
    const double target = seq.label == Regime::drowsy ? 1.0 : 0.0;
    out.loss += bce_from_logit(logit, target);
    // sigmoid(logit) >= 0.5  <=>  logit >= 0
    if ((logit >= 0.0) == (seq.label == Regime::drowsy)) ++correct;
  }
  out.loss /= static_cast<double>(data.size());
  out.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  return out;
}

TrainResult train(std::span<const LabeledSequence> dataset, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  validate(config);
  std::size_t drowsy = 0;
  for (const auto& s : dataset) drowsy += s.label == Regime::drowsy ? 1 : 0;
  if (drowsy == 0 || drowsy == dataset.size())
    throw DataError("training set must contain both alert and drowsy sequences");
  if (dataset.size() < 2) throw DataError("training set too small to split");

  Rng rng(config.seed);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle(order, rng);

  auto n_val = static_cast<std::size_t>(
      std::lround(config.validation_fraction * static_cast<double>(dataset.size())));
  n_val = std::clamp<std::size_t>(n_val, 1, dataset.size() - 1);

  std::vector<LabeledSequence> validation;
  validation.reserve(n_val);
  for (std::size_t i = 0; i < n_val; ++i) validation.push_back(dataset[order[i]]);
  std::vector<std::size_t> train_idx(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());

  LstmModel model = LstmModel::initialized(config.hidden_dim, mix_seed(config.seed, 0));
  std::vector<double> velocity(model.parameter_count(), 0.0);
  std::vector<LabeledSequence> batch;
  batch.reserve(config.batch_size);

  TrainResult result{model, {}, 0};
  double best_loss = std::numeric_limits<double>::infinity();

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle(train_idx, rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < train_idx.size(); start += config.batch_size) {
      const std::size_t end = std::min(start + config.batch_size, train_idx.size());
      batch.clear();
      for (std::size_t k = start; k < end; ++k) batch.push_back(dataset[train_idx[k]]);

      auto grad = backward(model, batch);
      loss_sum += grad.loss * static_cast<double>(batch.size());

      if (config.clip_norm > 0.0) {
        double norm2 = 0.0;
        for (double g : grad.values) norm2 += g * g;
        const double norm = std::sqrt(norm2);
        if (norm > config.clip_norm) {
          const double s = config.clip_norm / norm;
          for (double& g : grad.values) g *= s;
        }
      }

      auto params = model.parameters();
      for (std::size_t p = 0; p < params.size(); ++p) {
        velocity[p] = config.momentum * velocity[p] - config.learning_rate * grad.values[p];
        params[p] += velocity[p];
      }
    }
    if (!model.finite()) throw NumericError(epoch, "parameters diverged");

    const auto val = score(model, validation);
    EpochStats stats{epoch, loss_sum / static_cast<double>(train_idx.size()), val.loss, val.accuracy};
    if (!std::isfinite(stats.train_loss) || !std::isfinite(stats.validation_loss))
      throw NumericError(epoch, "non-finite epoch loss");
    result.trace.push_back(stats);
    if (stats.validation_loss < best_loss) {
      best_loss = stats.validation_loss;
      result.model = model;
      result.best_epoch = epoch;
    }
    if (on_epoch) on_epoch(stats);
  }
  return result;
}

bool classify(double probability, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw std::invalid_argument("alarm threshold must be in (0,1)");
  return probability >= threshold;
}

}  // namespace drowsy
