#pragma once

#include <algorithm>
#include <random>

#include "offpolicy/agents/actor_updates.hpp"
#include "offpolicy/agents/agent.hpp"

namespace offpolicy::agents {

/// Smoothed target action: clamp(pi_targ(s') + clamp(eps, -clip, clip), -1, 1), eps ~ N(0, std^2).
template <typename Urbg>
nn::Matrix td3_target_action(const nn::Mlp& target_actor, const nn::Matrix& next_states, double noise_std,
                             double noise_clip, Urbg& rng) {
  if (!(noise_clip >= 0.0)) throw std::invalid_argument("td3_target_action: noise_clip must be >= 0");
  nn::Matrix a = nn::mlp_predict(target_actor, next_states);
  if (noise_std > 0.0) {
    std::normal_distribution<double> noise(0.0, noise_std);
    for (double& v : a.data) v += std::clamp(noise(rng), -noise_clip, noise_clip);
  }
  for (double& v : a.data) v = std::clamp(v, -1.0, 1.0);
  return a;
}

/// Twin critics with a min target, target-policy smoothing, and actor/target updates
/// once every `td3_policy_delay` critic updates.
class Td3Agent : public Agent {
 public:
  Td3Agent(std::size_t state_dim, std::size_t action_dim, AgentConfig config, std::uint64_t seed)
      : Agent(state_dim, action_dim, std::move(config)),
        actor_(nn::mlp_init(layer_plan(state_dim, config_.actor_layers, action_dim), nn::OutputActivation::Tanh,
                            derive_seed(seed, 0))),
        critic1_(nn::mlp_init(layer_plan(state_dim + action_dim, config_.critic_layers, 1),
                              nn::OutputActivation::Identity, derive_seed(seed, 1))),
        critic2_(nn::mlp_init(layer_plan(state_dim + action_dim, config_.critic_layers, 1),
                              nn::OutputActivation::Identity, derive_seed(seed, 2))),
        target_actor_(actor_),
        target_critic1_(critic1_),
        target_critic2_(critic2_),
        actor_opt_(nn::AdamState::for_network(actor_)),
        critic1_opt_(nn::AdamState::for_network(critic1_)),
        critic2_opt_(nn::AdamState::for_network(critic2_)) {}

  Algorithm algorithm() const override { return Algorithm::TD3; }

  std::vector<double> select_action(std::span<const double> state, bool explore, Rng& rng) const override {
    check_state(state);
    std::vector<double> a = nn::mlp_forward(actor_, state).output;
    if (explore && config_.exploration_noise_std > 0.0) {
      std::normal_distribution<double> noise(0.0, config_.exploration_noise_std);
      for (double& v : a) v += noise(rng);
    }
    return clamp_unit(std::move(a));
  }

  std::vector<double> compute_critic_targets(const Batch& batch, Rng& rng) const override {
    nn::Matrix next_actions = td3_target_action(target_actor_, batch.next_states, config_.td3_target_noise_std,
                                                config_.td3_target_noise_clip, rng);
    CriticOutput q = evaluate_twin_min(target_critic1_, target_critic2_, batch.next_states, next_actions, false);
    std::vector<double> y = bellman_targets(batch, q.q, config_.gamma);
    check_targets(y);
    return y;
  }

  using Agent::update_critic;
  double update_critic(const Batch& batch, std::span<const double> targets) override {
    const nn::Matrix inputs = nn::hconcat(batch.states, batch.actions);
    critic_regression_step(critic1_, critic1_opt_, config_.critic_lr, inputs, targets);
    critic_regression_step(critic2_, critic2_opt_, config_.critic_lr, inputs, targets);
    ++counters_.critic_updates;
    return mean_squared_error(nn::mlp_predict(critic1_, inputs).data, targets);
  }

  double update_actor(const Batch& batch, Rng&) override {
    return update_actor_with(batch, [this](const nn::Matrix& s, const nn::Matrix& a) {
      return evaluate_critic(critic1_, s, a, true);
    });
  }

  template <CriticFunction Critic>
  double update_actor_with(const Batch& batch, Critic&& critic) {
    const double loss = deterministic_actor_step(actor_, actor_opt_, config_.actor_lr, batch.states, critic);
    ++counters_.actor_updates;
    return loss;
  }

  void update_targets() override {
    polyak_update(target_actor_, actor_, config_.polyak_rho);
    polyak_update(target_critic1_, critic1_, config_.polyak_rho);
    polyak_update(target_critic2_, critic2_, config_.polyak_rho);
    ++counters_.target_updates;
  }

  std::vector<NetworkSlot> networks() override {
    return {{"actor", &actor_, &actor_opt_},
            {"critic_1", &critic1_, &critic1_opt_},
            {"critic_2", &critic2_, &critic2_opt_},
            {"target_actor", &target_actor_, nullptr},
            {"target_critic_1", &target_critic1_, nullptr},
            {"target_critic_2", &target_critic2_, nullptr}};
  }

  const nn::Mlp& actor() const { return actor_; }
  const nn::Mlp& critic1() const { return critic1_; }
  const nn::Mlp& critic2() const { return critic2_; }
  nn::Mlp& target_critic1() { return target_critic1_; }
  nn::Mlp& target_critic2() { return target_critic2_; }
  nn::Mlp& target_actor() { return target_actor_; }
  const nn::Mlp& target_critic1() const { return target_critic1_; }
  const nn::Mlp& target_critic2() const { return target_critic2_; }
  const nn::Mlp& target_actor() const { return target_actor_; }

 protected:
  bool policy_update_due() const override { return counters_.critic_updates % config_.td3_policy_delay == 0; }

 private:
  nn::Mlp actor_;
  nn::Mlp critic1_;
  nn::Mlp critic2_;
  nn::Mlp target_actor_;
  nn::Mlp target_critic1_;
  nn::Mlp target_critic2_;
  nn::AdamState actor_opt_;
  nn::AdamState critic1_opt_;
  nn::AdamState critic2_opt_;
};

}  // namespace offpolicy::agents
