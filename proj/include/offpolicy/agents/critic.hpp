#pragma once

#include <concepts>
#include <span>
#include <stdexcept>
#include <vector>

#include "offpolicy/nn/adam.hpp"
#include "offpolicy/nn/mlp.hpp"

namespace offpolicy::agents {

/// Q values for a batch and, when requested, dQ/da per row.
struct CriticOutput {
  std::vector<double> q;
  nn::Matrix dq_da;
};

/// Anything that scores (states, actions) batches: an Mlp critic, a twin minimum,
/// or an analytic stand-in used to check the actor updates in isolation.
template <typename F>
concept CriticFunction = requires(F f, const nn::Matrix& s, const nn::Matrix& a) {
  { f(s, a) } -> std::convertible_to<CriticOutput>;
};

/// Critics read state ++ action at the input layer.
inline CriticOutput evaluate_critic(const nn::Mlp& critic, const nn::Matrix& states, const nn::Matrix& actions,
                                    bool want_action_grad) {
  if (critic.output_size() != 1) throw std::invalid_argument("critic must have a single output");
  nn::ForwardCache cache = nn::mlp_forward_batch(critic, nn::hconcat(states, actions));
  CriticOutput out;
  out.q = cache.output().data;
  if (want_action_grad) {
    nn::Matrix ones(states.rows, 1, 1.0);
    nn::BackwardResult bw = nn::mlp_backward_batch(critic, cache, ones, false);
    out.dq_da = nn::column_block(bw.grad_input, states.cols, actions.cols);
  }
  return out;
}

inline std::vector<double> critic_values(const nn::Mlp& critic, const nn::Matrix& states, const nn::Matrix& actions) {
  return evaluate_critic(critic, states, actions, false).q;
}

/// Row-wise min(Q1, Q2); the gradient is taken from whichever critic attains the minimum.
inline CriticOutput evaluate_twin_min(const nn::Mlp& c1, const nn::Mlp& c2, const nn::Matrix& states,
                                      const nn::Matrix& actions, bool want_action_grad) {
  CriticOutput o1 = evaluate_critic(c1, states, actions, want_action_grad);
  CriticOutput o2 = evaluate_critic(c2, states, actions, want_action_grad);
  CriticOutput out;
  out.q.resize(o1.q.size());
  if (want_action_grad) out.dq_da = nn::Matrix(states.rows, actions.cols);
  for (std::size_t i = 0; i < out.q.size(); ++i) {
    const bool first = o1.q[i] <= o2.q[i];
    out.q[i] = first ? o1.q[i] : o2.q[i];
    if (want_action_grad) {
      const auto src = first ? o1.dq_da.row(i) : o2.dq_da.row(i);
      std::copy(src.begin(), src.end(), out.dq_da.row(i).begin());
    }
  }
  return out;
}

/// One Adam step on mean_i (Q(s_i, a_i) - y_i)^2. Returns the loss before the step.
inline double critic_regression_step(nn::Mlp& critic, nn::AdamState& opt, double learning_rate,
                                     const nn::Matrix& critic_inputs, std::span<const double> targets) {
  if (targets.size() != critic_inputs.rows) throw std::invalid_argument("critic step: target count mismatch");
  nn::ForwardCache cache = nn::mlp_forward_batch(critic, critic_inputs);
  const auto& q = cache.output().data;
  const double n = static_cast<double>(targets.size());
  double loss = 0.0;
  nn::Matrix grad(targets.size(), 1);
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double diff = q[i] - targets[i];
    loss += diff * diff / n;
    grad.data[i] = 2.0 * diff / n;
  }
  if (!std::isfinite(loss)) throw std::domain_error("critic step: non-finite loss");
  nn::BackwardResult bw = nn::mlp_backward_batch(critic, cache, grad);
  nn::adam_step(critic, bw.grads, opt, learning_rate);
  return loss;
}

inline double mean_squared_error(std::span<const double> q, std::span<const double> targets) {
  double loss = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) loss += (q[i] - targets[i]) * (q[i] - targets[i]);
  return loss / static_cast<double>(q.size());
}

}  // namespace offpolicy::agents
