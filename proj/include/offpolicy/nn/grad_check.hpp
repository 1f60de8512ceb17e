#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "offpolicy/nn/mlp.hpp"

namespace offpolicy::nn {

/// 0.5 * ||output - target||^2.
struct SquaredErrorLoss {
  std::vector<double> target;

  double value(std::span<const double> output) const {
    double s = 0.0;
    for (std::size_t i = 0; i < output.size(); ++i) {
      const double d = output[i] - target[i];
      s += 0.5 * d * d;
    }
    return s;
  }

  std::vector<double> gradient(std::span<const double> output) const {
    std::vector<double> g(output.size());
    for (std::size_t i = 0; i < output.size(); ++i) g[i] = output[i] - target[i];
    return g;
  }
};

template <typename L>
concept ScalarLoss = requires(const L& loss, std::span<const double> out) {
  { loss.value(out) } -> std::convertible_to<double>;
  { loss.gradient(out) } -> std::convertible_to<std::vector<double>>;
};

inline double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1e-12, std::abs(analytic) + std::abs(numeric));
}

/// Smallest |pre-activation| over hidden ReLU units for one input. Central differences
/// are only meaningful when this exceeds the probe step; inputs sitting on a kink
/// (margin 0) have no unique derivative and are out of scope for the check.
inline double relu_kink_margin(const Mlp& net, std::span<const double> input) {
  ForwardResult fr = mlp_forward(net, input);
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < net.num_layers(); ++i) {
    for (double z : fr.cache.pre_activations[i].data) margin = std::min(margin, std::abs(z));
  }
  return margin;
}

/// Max relative error between backprop gradients and central finite differences,
/// taken over every parameter and every input component. Returns +inf if any
/// intermediate value is non-finite.
template <ScalarLoss Loss>
double grad_check(const Mlp& net, std::span<const double> input, const Loss& loss, double h = 1e-5) {
  ForwardResult fr = mlp_forward(net, input);
  std::vector<double> g_out = loss.gradient(fr.output);
  VectorBackwardResult analytic = mlp_backward(net, fr.cache, g_out);
  if (!analytic.grads.finite() || !all_finite(analytic.grad_input)) return std::numeric_limits<double>::infinity();

  auto eval = [&](const Mlp& m, std::span<const double> x) { return loss.value(mlp_forward(m, x).output); };

  double worst = 0.0;
  bool ok = true;
  auto probe = [&](double& slot, const Mlp& m, std::span<const double> x, double a) {
    const double saved = slot;
    slot = saved + h;
    const double up = eval(m, x);
    slot = saved - h;
    const double down = eval(m, x);
    slot = saved;
    const double numeric = (up - down) / (2.0 * h);
    if (!std::isfinite(numeric) || !std::isfinite(up) || !std::isfinite(down)) ok = false;
    worst = std::max(worst, relative_error(a, numeric));
  };

  Mlp probe_net = net;
  std::vector<double> x(input.begin(), input.end());
  for (std::size_t i = 0; i < probe_net.num_layers(); ++i) {
    for (std::size_t k = 0; k < probe_net.weights[i].data.size(); ++k) {
      probe(probe_net.weights[i].data[k], probe_net, x, analytic.grads.weights[i].data[k]);
    }
    for (std::size_t k = 0; k < probe_net.biases[i].size(); ++k) {
      probe(probe_net.biases[i][k], probe_net, x, analytic.grads.biases[i][k]);
    }
  }
  for (std::size_t k = 0; k < x.size(); ++k) probe(x[k], probe_net, x, analytic.grad_input[k]);
  return ok ? worst : std::numeric_limits<double>::infinity();
}

}  // namespace offpolicy::nn
