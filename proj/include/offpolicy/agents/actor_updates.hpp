#pragma once

#include <cmath>
#include <stdexcept>

#include "offpolicy/agents/critic.hpp"
#include "offpolicy/agents/squashed_gaussian.hpp"
#include "offpolicy/nn/adam.hpp"

namespace offpolicy::agents {

struct ActorGradient {
  double loss = 0.0;
  nn::ParamGrads grads;
};

/// Gradient of -mean_i Q(s_i, pi(s_i)) with respect to the deterministic actor.
/// The critic is only read; its parameters get no gradient.
template <CriticFunction Critic>
ActorGradient deterministic_actor_gradient(const nn::Mlp& actor, const nn::Matrix& states, Critic&& critic) {
  nn::ForwardCache cache = nn::mlp_forward_batch(actor, states);
  const nn::Matrix& actions = cache.output();
  CriticOutput co = critic(states, actions);
  const double n = static_cast<double>(states.rows);
  ActorGradient g;
  for (double q : co.q) g.loss -= q / n;
  if (!std::isfinite(g.loss)) throw std::domain_error("actor update: non-finite loss");
  nn::Matrix upstream = co.dq_da;
  for (double& v : upstream.data) v = -v / n;
  g.grads = nn::mlp_backward_batch(actor, cache, upstream).grads;
  return g;
}

template <CriticFunction Critic>
double deterministic_actor_step(nn::Mlp& actor, nn::AdamState& opt, double learning_rate, const nn::Matrix& states,
                                Critic&& critic) {
  ActorGradient g = deterministic_actor_gradient(actor, states, critic);
  nn::adam_step(actor, g.grads, opt, learning_rate);
  return g.loss;
}

/// Gradient of mean_i [alpha * log pi(a_i | s_i) - Q(s_i, a_i)] for the squashed Gaussian
/// actor, with a_i = tanh(mean_i + std_i * noise_i) reparameterized on fixed `noise`.
///
/// Per dimension, with u = mean + std * xi and t = tanh(u):
///   d log pi / du      = 2 t                  (from -log(1 - t^2); the Gaussian term is constant in u)
///   d log pi / dlogstd = -1 + 2 t * std * xi
///   dL/du              = alpha * 2 t - dQ/da * (1 - t^2)
template <CriticFunction Critic>
ActorGradient squashed_actor_gradient(const nn::Mlp& actor, const nn::Matrix& states, double alpha,
                                      const nn::Matrix& noise, Critic&& critic) {
  nn::ForwardCache cache = nn::mlp_forward_batch(actor, states);
  const std::size_t da = actor.output_size() / 2;
  GaussianHead head = split_gaussian_head(cache.output(), da);
  SquashedSample sample = squashed_sample(head, noise);
  CriticOutput co = critic(states, sample.actions);

  const double n = static_cast<double>(states.rows);
  ActorGradient g;
  nn::Matrix upstream(states.rows, 2 * da);
  for (std::size_t r = 0; r < states.rows; ++r) {
    g.loss += (alpha * sample.log_prob[r] - co.q[r]) / n;
    for (std::size_t j = 0; j < da; ++j) {
      const double u = sample.pre_squash(r, j);
      const double t = std::tanh(u);
      const double one_minus_t2 = std::exp(log_tanh_jacobian(u));
      const double std_dev = std::exp(head.log_std(r, j));
      const double dl_du = alpha * 2.0 * t - co.dq_da(r, j) * one_minus_t2;
      upstream(r, j) = dl_du / n;
      upstream(r, da + j) = head.log_std_active(r, j) * (-alpha + dl_du * std_dev * noise(r, j)) / n;
    }
  }
  if (!std::isfinite(g.loss)) throw std::domain_error("actor update: non-finite loss");
  g.grads = nn::mlp_backward_batch(actor, cache, upstream).grads;
  return g;
}

template <CriticFunction Critic>
double squashed_actor_step(nn::Mlp& actor, nn::AdamState& opt, double learning_rate, const nn::Matrix& states,
                           double alpha, const nn::Matrix& noise, Critic&& critic) {
  ActorGradient g = squashed_actor_gradient(actor, states, alpha, noise, critic);
  nn::adam_step(actor, g.grads, opt, learning_rate);
  return g.loss;
}

}  // namespace offpolicy::agents
