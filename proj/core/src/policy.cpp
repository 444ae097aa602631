#include "htwb/policy.hpp"

#include <cmath>

namespace htwb {

Mlp::Mlp(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
  if (dims_.size() < 2) throw ShapeMismatch("network needs at least input and output dims");
  std::size_t count = 0;
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) count += dims_[l + 1] * (dims_[l] + 1);
  params_.assign(count, 0.0);
}

void Mlp::set_params(std::span<const double> p) {
  if (p.size() != params_.size())
    throw ShapeMismatch("parameter vector has " + std::to_string(p.size()) + " entries, network has " +
                        std::to_string(params_.size()));
  params_.assign(p.begin(), p.end());
}

void Mlp::init_weights(SplitMix64& rng, double output_scale) {
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    const std::size_t in = dims_[l];
    const std::size_t out = dims_[l + 1];
    const bool last = l + 2 == dims_.size();
    // in == 0 happens for observation-free environments; weights are then
    // empty and only the bias column remains.
    const double scale = (in ? 1.0 / std::sqrt(static_cast<double>(in)) : 1.0) *
                         (last ? output_scale : 1.0);
    for (std::size_t i = 0; i < out * in; ++i) params_[offset + i] = rng.next_gaussian() * scale;
    offset += out * in;
    for (std::size_t i = 0; i < out; ++i) params_[offset + i] = 0.0;
    offset += out;
  }
}

void Mlp::forward(std::span<const double> input, Trace& trace) const {
  if (input.size() != dims_.front())
    throw ShapeMismatch("input has " + std::to_string(input.size()) + " features, network expects " +
                        std::to_string(dims_.front()));
  trace.act.resize(dims_.size());
  trace.act[0].assign(input.begin(), input.end());

  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    const std::size_t in = dims_[l];
    const std::size_t out = dims_[l + 1];
    const bool last = l + 2 == dims_.size();
    const double* w = params_.data() + offset;
    const double* b = w + out * in;
    const std::vector<double>& x = trace.act[l];
    std::vector<double>& y = trace.act[l + 1];
    y.assign(out, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      double z = b[o];
      const double* row = w + o * in;
      for (std::size_t i = 0; i < in; ++i) z += row[i] * x[i];
      y[o] = last ? z : std::tanh(z);
    }
    offset += out * (in + 1);
  }
}

std::vector<double> Mlp::forward(std::span<const double> input) const {
  Trace trace;
  forward(input, trace);
  return trace.act.back();
}

void Mlp::backward(const Trace& trace, std::span<const double> grad_output,
                   std::span<double> grad) const {
  if (grad.size() != params_.size()) throw ShapeMismatch("gradient buffer size");
  if (grad_output.size() != dims_.back()) throw ShapeMismatch("output gradient size");

  // Parameter offsets per layer, computed once backwards.
  std::vector<std::size_t> offsets(dims_.size() - 1);
  for (std::size_t l = 0, off = 0; l + 1 < dims_.size(); ++l) {
    offsets[l] = off;
    off += dims_[l + 1] * (dims_[l] + 1);
  }

  std::vector<double> dz(grad_output.begin(), grad_output.end());  // dLoss/dz of top layer (linear)
  for (std::size_t l = dims_.size() - 1; l-- > 0;) {
    const std::size_t in = dims_[l];
    const std::size_t out = dims_[l + 1];
    const double* w = params_.data() + offsets[l];
    double* gw = grad.data() + offsets[l];
    double* gb = gw + out * in;
    const std::vector<double>& x = trace.act[l];

    std::vector<double> dx(in, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      const double d = dz[o];
      gb[o] += d;
      double* grow = gw + o * in;
      const double* wrow = w + o * in;
      for (std::size_t i = 0; i < in; ++i) {
        grow[i] += d * x[i];
        dx[i] += d * wrow[i];
      }
    }

    if (l == 0) break;
    // dx is dLoss/dh for the tanh layer below: dz = dh * (1 - h^2).
    const std::vector<double>& h = trace.act[l];
    dz.assign(in, 0.0);
    for (std::size_t i = 0; i < in; ++i) dz[i] = dx[i] * (1.0 - h[i] * h[i]);
  }
}

double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double bernoulli_logprob(std::span<const double> logits, std::span<const std::uint8_t> action) {
  if (logits.size() != action.size()) throw ShapeMismatch("logits vs action length");
  double lp = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i)
    lp -= softplus(action[i] ? -logits[i] : logits[i]);
  return lp;
}

double bernoulli_entropy(std::span<const double> logits) {
  double h = 0.0;
  for (const double z : logits) {
    const double p = sigmoid(z);
    h += p * softplus(-z) + (1.0 - p) * softplus(z);
  }
  return h;
}

void bernoulli_sample(std::span<const double> logits, SplitMix64& rng,
                      std::span<std::uint8_t> action_out) {
  if (logits.size() != action_out.size()) throw ShapeMismatch("logits vs action length");
  for (std::size_t i = 0; i < logits.size(); ++i)
    action_out[i] = rng.next_double() < sigmoid(logits[i]) ? 1 : 0;
}

}  // namespace htwb
