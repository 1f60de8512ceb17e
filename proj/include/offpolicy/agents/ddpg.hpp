#pragma once

#include <random>

#include "offpolicy/agents/actor_updates.hpp"
#include "offpolicy/agents/agent.hpp"

namespace offpolicy::agents {

/// Deterministic tanh actor, single critic, Polyak-averaged targets, Gaussian exploration.
class DdpgAgent : public Agent {
 public:
  DdpgAgent(std::size_t state_dim, std::size_t action_dim, AgentConfig config, std::uint64_t seed)
      : Agent(state_dim, action_dim, std::move(config)),
        actor_(nn::mlp_init(layer_plan(state_dim, config_.actor_layers, action_dim), nn::OutputActivation::Tanh,
                            derive_seed(seed, 0))),
        critic_(nn::mlp_init(layer_plan(state_dim + action_dim, config_.critic_layers, 1),
                             nn::OutputActivation::Identity, derive_seed(seed, 1))),
        target_actor_(actor_),
        target_critic_(critic_),
        actor_opt_(nn::AdamState::for_network(actor_)),
        critic_opt_(nn::AdamState::for_network(critic_)) {}

  Algorithm algorithm() const override { return Algorithm::DDPG; }

  std::vector<double> select_action(std::span<const double> state, bool explore, Rng& rng) const override {
    check_state(state);
    std::vector<double> a = nn::mlp_forward(actor_, state).output;
    if (explore && config_.exploration_noise_std > 0.0) {
      std::normal_distribution<double> noise(0.0, config_.exploration_noise_std);
      for (double& v : a) v += noise(rng);
    }
    return clamp_unit(std::move(a));
  }

  std::vector<double> compute_critic_targets(const Batch& batch, Rng&) const override {
    nn::Matrix next_actions = nn::mlp_predict(target_actor_, batch.next_states);
    std::vector<double> q_next = critic_values(target_critic_, batch.next_states, next_actions);
    std::vector<double> y = bellman_targets(batch, q_next, config_.gamma);
    check_targets(y);
    return y;
  }

  using Agent::update_critic;
  double update_critic(const Batch& batch, std::span<const double> targets) override {
    const nn::Matrix inputs = nn::hconcat(batch.states, batch.actions);
    critic_regression_step(critic_, critic_opt_, config_.critic_lr, inputs, targets);
    ++counters_.critic_updates;
    return mean_squared_error(nn::mlp_predict(critic_, inputs).data, targets);
  }

  double update_actor(const Batch& batch, Rng&) override {
    return update_actor_with(batch, [this](const nn::Matrix& s, const nn::Matrix& a) {
      return evaluate_critic(critic_, s, a, true);
    });
  }

  /// Actor step against an arbitrary critic; the agent's own critic is untouched.
  template <CriticFunction Critic>
  double update_actor_with(const Batch& batch, Critic&& critic) {
    const double loss = deterministic_actor_step(actor_, actor_opt_, config_.actor_lr, batch.states, critic);
    ++counters_.actor_updates;
    return loss;
  }

  void update_targets() override {
    polyak_update(target_actor_, actor_, config_.polyak_rho);
    polyak_update(target_critic_, critic_, config_.polyak_rho);
    ++counters_.target_updates;
  }

  std::vector<NetworkSlot> networks() override {
    return {{"actor", &actor_, &actor_opt_},
            {"critic", &critic_, &critic_opt_},
            {"target_actor", &target_actor_, nullptr},
            {"target_critic", &target_critic_, nullptr}};
  }

  const nn::Mlp& actor() const { return actor_; }
  const nn::Mlp& critic() const { return critic_; }
  const nn::Mlp& target_actor() const { return target_actor_; }
  const nn::Mlp& target_critic() const { return target_critic_; }
  nn::Mlp& actor() { return actor_; }
  nn::Mlp& critic() { return critic_; }
  nn::Mlp& target_critic() { return target_critic_; }
  nn::Mlp& target_actor() { return target_actor_; }

 private:
  nn::Mlp actor_;
  nn::Mlp critic_;
  nn::Mlp target_actor_;
  nn::Mlp target_critic_;
  nn::AdamState actor_opt_;
  nn::AdamState critic_opt_;
};

}  // namespace offpolicy::agents
