#pragma once

// Single-layer LSTM sequence classifier with a logistic scalar readout.
//
// Recurrence, from zero initial state, for each step x_t:
//   z_t = [x_t ; h_{t-1}]
//   i = sigmoid(W_i z + b_i)   f = sigmoid(W_f z + b_f)
//   o = sigmoid(W_o z + b_o)   g = tanh(W_g z + b_g)
//   c_t = f * c_{t-1} + i * g
//   h_t = o * tanh(c_t)
// then p = sigmoid(w_out . h_T + b_out).
//
// Parameter layout (also the checkpoint order):
//   W_i, W_f, W_o, W_g   each hidden x (input + hidden), row-major,
//                        columns [0, input) multiply x, the rest h
//   b_i, b_f, b_o, b_g   each hidden
//   w_out                hidden
//   b_out                1

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "drowsy/features.hpp"

namespace drowsy {

enum class Gate : std::size_t { input = 0, forget = 1, output = 2, candidate = 3 };
inline constexpr std::size_t kGateCount = 4;
inline constexpr std::size_t kDefaultHiddenDim = 16;

class LstmModel {
 public:
  /// All parameters zero.
  explicit LstmModel(std::size_t hidden_dim = kDefaultHiddenDim);

  /// Uniform(-1/sqrt(hidden), 1/sqrt(hidden)) everywhere, forget-gate bias 1.
  static LstmModel initialized(std::size_t hidden_dim, std::uint64_t seed);

  static std::size_t parameter_count(std::size_t hidden_dim) noexcept;

  std::size_t hidden_dim() const noexcept { return hidden_; }
  static constexpr std::size_t input_dim() noexcept { return kInputDim; }
  std::size_t concat_dim() const noexcept { return kInputDim + hidden_; }
  std::size_t parameter_count() const noexcept { return params_.size(); }

  std::span<double> parameters() noexcept { return params_; }
  std::span<const double> parameters() const noexcept { return params_; }

  std::span<double> gate_weights(Gate g) noexcept;
  std::span<const double> gate_weights(Gate g) const noexcept;
  std::span<double> gate_bias(Gate g) noexcept;
  std::span<const double> gate_bias(Gate g) const noexcept;
  std::span<double> output_weights() noexcept;
  std::span<const double> output_weights() const noexcept;
  double& output_bias() noexcept { return params_.back(); }
  double output_bias() const noexcept { return params_.back(); }

  // Offsets into parameters().
  std::size_t weights_offset(Gate g) const noexcept;
  std::size_t bias_offset(Gate g) const noexcept;
  std::size_t output_weights_offset() const noexcept;

  bool finite() const noexcept;

  friend bool operator==(const LstmModel&, const LstmModel&) = default;

 private:
  std::size_t hidden_;
  std::vector<double> params_;
};

struct LabeledSequence {
  NormalizedWindow window{};
  Regime label = Regime::alert;
};

/// Pre-sigmoid readout. Throws NumericError (index = step) on non-finite
/// input and std::invalid_argument for an empty sequence.
double forward_logit(const LstmModel& model, std::span<const FeatureStep> steps);

/// Drowsiness probability in (0,1).
double forward(const LstmModel& model, std::span<const FeatureStep> steps);

inline double forward(const LstmModel& model, const NormalizedWindow& window) {
  return forward(model, std::span<const FeatureStep>(window));
}

/// Numerically stable binary cross-entropy of a logit against a 0/1 target.
double bce_from_logit(double logit, double target) noexcept;

struct Gradients {
  /// Same layout as LstmModel::parameters().
  std::vector<double> values;
  /// Mean binary cross-entropy over the batch.
  double loss = 0.0;
};

/// Full backpropagation through time, mean-reduced over the batch. Throws
/// std::invalid_argument for an empty batch and NumericError carrying the
/// sequence index when a loss is not finite.
Gradients backward(const LstmModel& model, std::span<const LabeledSequence> batch);

}  // namespace drowsy
