#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "htwb/error.hpp"
#include "htwb/rng.hpp"

namespace htwb {

/// Network/batch dimensions disagree (wrong observation width, wrong
/// parameter vector length, ...).
class ShapeMismatch : public Error {
public:
  explicit ShapeMismatch(const std::string& detail) : Error("shape mismatch: " + detail) {}
};

/// Dense feed-forward network, tanh hidden layers, linear output. All math
/// in double; gradients come from hand-rolled backprop (the training loop
/// verifies them against finite differences in the test suite).
class Mlp {
public:
  Mlp() = default;
  explicit Mlp(std::vector<std::size_t> dims);  // {in, hidden..., out}

  std::size_t input_dim() const { return dims_.front(); }
  std::size_t output_dim() const { return dims_.back(); }
  const std::vector<std::size_t>& dims() const { return dims_; }

  std::size_t param_count() const { return params_.size(); }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  void set_params(std::span<const double> p);

  /// Gaussian fan-in scaled init; the output layer is additionally scaled by
  /// `output_scale` (small values keep an initial policy near uniform).
  void init_weights(SplitMix64& rng, double output_scale = 1.0);

  /// Post-activation values per layer, kept for backward().
  struct Trace {
    std::vector<std::vector<double>> act;  // act[0] = input, act.back() = output
  };

  std::vector<double> forward(std::span<const double> input) const;
  void forward(std::span<const double> input, Trace& trace) const;

  /// Accumulates dLoss/dparams into grad (same length as params()) given
  /// dLoss/doutput. Trace must come from forward() on the same parameters.
  void backward(const Trace& trace, std::span<const double> grad_output,
                std::span<double> grad) const;

private:
  std::vector<std::size_t> dims_;
  std::vector<double> params_;  // per layer: row-major W[out][in], then b[out]
};

/// Numerically stable log(1 + e^x).
double softplus(double x);
double sigmoid(double x);

/// Independent-Bernoulli action head over logits z: P(a_i = 1) = sigmoid(z_i).
/// log-prob of a joint action, its gradient in z, and the entropy gradient:
///   dlogp/dz_i    = a_i - sigmoid(z_i)
///   dentropy/dz_i = -z_i * sigmoid(z_i) * (1 - sigmoid(z_i))
double bernoulli_logprob(std::span<const double> logits, std::span<const std::uint8_t> action);
double bernoulli_entropy(std::span<const double> logits);
void bernoulli_sample(std::span<const double> logits, SplitMix64& rng,
                      std::span<std::uint8_t> action_out);

}  // namespace htwb
