#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "offpolicy/nn/mlp.hpp"

namespace offpolicy::nn {

struct AdamState {
  ParamGrads first_moment;
  ParamGrads second_moment;
  std::uint64_t step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState for_network(const Mlp& net) {
    AdamState s;
    s.first_moment = ParamGrads::zeros_like(net);
    s.second_moment = ParamGrads::zeros_like(net);
    return s;
  }

  bool operator==(const AdamState& o) const {
    auto eq = [](const ParamGrads& a, const ParamGrads& b) { return a.weights == b.weights && a.biases == b.biases; };
    return eq(first_moment, o.first_moment) && eq(second_moment, o.second_moment) && step_count == o.step_count &&
           beta1 == o.beta1 && beta2 == o.beta2 && epsilon == o.epsilon;
  }
};

namespace detail {

inline void adam_update_block(std::span<double> params, std::span<const double> grads, std::span<double> m,
                              std::span<double> v, double beta1, double beta2, double eps, double step_size,
                              double bias2) {
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double g = grads[k];
    m[k] = beta1 * m[k] + (1.0 - beta1) * g;
    v[k] = beta2 * v[k] + (1.0 - beta2) * g * g;
    params[k] -= step_size * m[k] / (std::sqrt(v[k] / bias2) + eps);
  }
}

}  // namespace detail

/// One bias-corrected Adam step (descent direction). Rejects non-finite gradients
/// before touching any state.
inline void adam_step(Mlp& params, const ParamGrads& grads, AdamState& state, double learning_rate) {
  if (!grads.congruent_with(params)) throw std::invalid_argument("adam_step: gradient shapes do not match network");
  if (!state.first_moment.congruent_with(params) || !state.second_moment.congruent_with(params)) {
    throw std::invalid_argument("adam_step: optimizer state shapes do not match network");
  }
  if (!grads.finite()) throw std::domain_error("adam_step: non-finite gradient");

  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double bias1 = 1.0 - std::pow(state.beta1, t);
  const double bias2 = 1.0 - std::pow(state.beta2, t);
  const double step_size = learning_rate / bias1;
  for (std::size_t i = 0; i < params.num_layers(); ++i) {
    detail::adam_update_block(params.weights[i].data, grads.weights[i].data, state.first_moment.weights[i].data,
                              state.second_moment.weights[i].data, state.beta1, state.beta2, state.epsilon,
                              step_size, bias2);
    detail::adam_update_block(params.biases[i], grads.biases[i], state.first_moment.biases[i],
                              state.second_moment.biases[i], state.beta1, state.beta2, state.epsilon, step_size,
                              bias2);
  }
}

}  // namespace offpolicy::nn
