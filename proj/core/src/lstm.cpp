#include "drowsy/lstm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "drowsy/error.hpp"
#include "drowsy/random.hpp"

namespace drowsy {

namespace {

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Per-step activations kept for the backward sweep.
struct StepCache {
  std::vector<double> z;     // concat_dim
  std::vector<double> gate;  // 4 * hidden: i, f, o, g (post-activation)
  std::vector<double> c;     // hidden
  std::vector<double> tanh_c;
  std::vector<double> h;
};

class Unroll {
 public:
  explicit Unroll(const LstmModel& model) : model_(model) {}

  // Runs the recurrence; keeps per-step caches when `keep` is set.
  double run(std::span<const FeatureStep> steps, bool keep) {
    const std::size_t hidden = model_.hidden_dim();
    const std::size_t cols = model_.concat_dim();
    const auto params = model_.parameters();

    h_.assign(hidden, 0.0);
    c_.assign(hidden, 0.0);
    z_.assign(cols, 0.0);
    a_.assign(kGateCount * hidden, 0.0);
    if (keep) cache_.resize(steps.size());

    for (std::size_t t = 0; t < steps.size(); ++t) {
      for (std::size_t k = 0; k < kInputDim; ++k) {
        if (!std::isfinite(steps[t][k])) throw NumericError(t, "non-finite LSTM input");
        z_[k] = steps[t][k];
      }
      std::copy(h_.begin(), h_.end(), z_.begin() + kInputDim);

      for (std::size_t g = 0; g < kGateCount; ++g) {
        const double* w = params.data() + model_.weights_offset(static_cast<Gate>(g));
        const double* b = params.data() + model_.bias_offset(static_cast<Gate>(g));
        for (std::size_t r = 0; r < hidden; ++r) {
          double acc = b[r];
          const double* row = w + r * cols;
          for (std::size_t j = 0; j < cols; ++j) acc += row[j] * z_[j];
          a_[g * hidden + r] = g == static_cast<std::size_t>(Gate::candidate) ? std::tanh(acc) : sigmoid(acc);
        }
      }

      const double* in = a_.data();
      const double* fg = in + hidden;
      const double* out = fg + hidden;
      const double* cand = out + hidden;
      for (std::size_t r = 0; r < hidden; ++r) {
        c_[r] = fg[r] * c_[r] + in[r] * cand[r];
        h_[r] = out[r] * std::tanh(c_[r]);
      }

      if (keep) {
        auto& slot = cache_[t];
        slot.z = z_;
        slot.gate = a_;
        slot.c = c_;
        slot.tanh_c.resize(hidden);
        for (std::size_t r = 0; r < hidden; ++r) slot.tanh_c[r] = std::tanh(c_[r]);
        slot.h = h_;
      }
    }

    const auto w_out = model_.output_weights();
    double logit = model_.output_bias();
    for (std::size_t r = 0; r < hidden; ++r) logit += w_out[r] * h_[r];
    return logit;
  }

  // Adds scale * d(loss)/d(params) for the last run() into `grad`, given
  // d(loss)/d(logit) == dlogit.
  void accumulate(std::span<const FeatureStep> steps, double dlogit, std::span<double> grad) {
    const std::size_t hidden = model_.hidden_dim();
    const std::size_t cols = model_.concat_dim();
    const auto params = model_.parameters();
    const auto w_out = model_.output_weights();

    const auto& last_h = cache_[steps.size() - 1].h;
    double* g_wout = grad.data() + model_.output_weights_offset();
    for (std::size_t r = 0; r < hidden; ++r) g_wout[r] += dlogit * last_h[r];
    grad.back() += dlogit;

    dh_.assign(hidden, 0.0);
    dc_.assign(hidden, 0.0);
    da_.assign(kGateCount * hidden, 0.0);
    dz_.assign(cols, 0.0);
    for (std::size_t r = 0; r < hidden; ++r) dh_[r] = dlogit * w_out[r];

    for (std::size_t t = steps.size(); t-- > 0;) {
      const auto& slot = cache_[t];
      const double* in = slot.gate.data();
      const double* fg = in + hidden;
      const double* out = fg + hidden;
      const double* cand = out + hidden;

      for (std::size_t r = 0; r < hidden; ++r) {
        const double tc = slot.tanh_c[r];
        const double c_prev = t > 0 ? cache_[t - 1].c[r] : 0.0;
        const double d_out = dh_[r] * tc;
        const double dc = dc_[r] + dh_[r] * out[r] * (1.0 - tc * tc);
        const double d_in = dc * cand[r];
        const double d_cand = dc * in[r];
        const double d_fg = dc * c_prev;
        dc_[r] = dc * fg[r];

        da_[r] = d_in * in[r] * (1.0 - in[r]);
        da_[hidden + r] = d_fg * fg[r] * (1.0 - fg[r]);
        da_[2 * hidden + r] = d_out * out[r] * (1.0 - out[r]);
        da_[3 * hidden + r] = d_cand * (1.0 - cand[r] * cand[r]);
      }

      std::fill(dz_.begin(), dz_.end(), 0.0);
      for (std::size_t g = 0; g < kGateCount; ++g) {
        const double* w = params.data() + model_.weights_offset(static_cast<Gate>(g));
        double* gw = grad.data() + model_.weights_offset(static_cast<Gate>(g));
        double* gb = grad.data() + model_.bias_offset(static_cast<Gate>(g));
        for (std::size_t r = 0; r < hidden; ++r) {
          const double d = da_[g * hidden + r];
          gb[r] += d;
          const double* row = w + r * cols;
          double* grow = gw + r * cols;
          for (std::size_t j = 0; j < cols; ++j) {
            grow[j] += d * slot.z[j];
            dz_[j] += row[j] * d;
          }
        }
      }
      std::copy(dz_.begin() + kInputDim, dz_.end(), dh_.begin());
    }
  }

 private:
  const LstmModel& model_;
  std::vector<double> h_, c_, z_, a_;
  std::vector<double> dh_, dc_, da_, dz_;
  std::vector<StepCache> cache_;
};

}  // namespace

LstmModel::LstmModel(std::size_t hidden_dim)
    : hidden_(hidden_dim), params_(parameter_count(hidden_dim), 0.0) {
  if (hidden_dim == 0) throw std::invalid_argument("hidden_dim must be >= 1");
}

std::size_t LstmModel::parameter_count(std::size_t hidden_dim) noexcept {
  return kGateCount * hidden_dim * (kInputDim + hidden_dim) + kGateCount * hidden_dim + hidden_dim + 1;
}

LstmModel LstmModel::initialized(std::size_t hidden_dim, std::uint64_t seed) {
  LstmModel model(hidden_dim);
  Rng rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  for (auto& p : model.params_) p = rng.uniform(-bound, bound);
  for (auto& b : model.gate_bias(Gate::forget)) b = 1.0;
  return model;
}

std::size_t LstmModel::weights_offset(Gate g) const noexcept {
  return static_cast<std::size_t>(g) * hidden_ * concat_dim();
}

std::size_t LstmModel::bias_offset(Gate g) const noexcept {
  return kGateCount * hidden_ * concat_dim() + static_cast<std::size_t>(g) * hidden_;
}

std::size_t LstmModel::output_weights_offset() const noexcept {
  return kGateCount * hidden_ * concat_dim() + kGateCount * hidden_;
}

std::span<double> LstmModel::gate_weights(Gate g) noexcept {
  return std::span<double>(params_).subspan(weights_offset(g), hidden_ * concat_dim());
}
std::span<const double> LstmModel::gate_weights(Gate g) const noexcept {
  return std::span<const double>(params_).subspan(weights_offset(g), hidden_ * concat_dim());
}
std::span<double> LstmModel::gate_bias(Gate g) noexcept {
  return std::span<double>(params_).subspan(bias_offset(g), hidden_);
}
std::span<const double> LstmModel::gate_bias(Gate g) const noexcept {
  return std::span<const double>(params_).subspan(bias_offset(g), hidden_);
}
std::span<double> LstmModel::output_weights() noexcept {
  return std::span<double>(params_).subspan(output_weights_offset(), hidden_);
}
std::span<const double> LstmModel::output_weights() const noexcept {
  return std::span<const double>(params_).subspan(output_weights_offset(), hidden_);
}

bool LstmModel::finite() const noexcept {
  return std::all_of(params_.begin(), params_.end(), [](double p) { return std::isfinite(p); });
}

double forward_logit(const LstmModel& model, std::span<const FeatureStep> steps) {
  if (steps.empty()) throw std::invalid_argument("LSTM input sequence is empty");
  Unroll unroll(model);
  return unroll.run(steps, false);
}

double forward(const LstmModel& model, std::span<const FeatureStep> steps) {
  return sigmoid(forward_logit(model, steps));
}

double bce_from_logit(double logit, double target) noexcept {
  // log(1 + e^l) - y*l, arranged to avoid overflow.
  return std::max(logit, 0.0) - logit * target + std::log1p(std::exp(-std::abs(logit)));
}

Gradients backward(const LstmModel& model, std::span<const LabeledSequence> batch) {
  if (batch.empty()) throw std::invalid_argument("backward() needs a non-empty batch");
  Gradients out;
  out.values.assign(model.parameter_count(), 0.0);

  const double scale = 1.0 / static_cast<double>(batch.size());
  Unroll unroll(model);
  double total = 0.0;
  for (std::size_t n = 0; n < batch.size(); ++n) {
    const std::span<const FeatureStep> steps(batch[n].window);
    const double target = batch[n].label == Regime::drowsy ? 1.0 : 0.0;
    const double logit = unroll.run(steps, true);
    const double loss = bce_from_logit(logit, target);
    if (!std::isfinite(loss)) throw NumericError(n, "non-finite loss");
    total += loss;
    unroll.accumulate(steps, (sigmoid(logit) - target) * scale, out.values);
  }
  out.loss = total * scale;
  return out;
}

}  // namespace drowsy
