#pragma once

#include "offpolicy/agents/actor_updates.hpp"
#include "offpolicy/agents/agent.hpp"
#include "offpolicy/agents/squashed_gaussian.hpp"

namespace offpolicy::agents {

/// Squashed-Gaussian actor emitting (mean, log_std) per action dimension, twin critics
/// with Polyak targets, and a fixed entropy coefficient.
class SacAgent : public Agent {
 public:
  SacAgent(std::size_t state_dim, std::size_t action_dim, AgentConfig config, std::uint64_t seed)
      : Agent(state_dim, action_dim, std::move(config)),
        actor_(nn::mlp_init(layer_plan(state_dim, config_.actor_layers, 2 * action_dim),
                            nn::OutputActivation::Identity, derive_seed(seed, 0))),
        critic1_(nn::mlp_init(layer_plan(state_dim + action_dim, config_.critic_layers, 1),
                              nn::OutputActivation::Identity, derive_seed(seed, 1))),
        critic2_(nn::mlp_init(layer_plan(state_dim + action_dim, config_.critic_layers, 1),
                              nn::OutputActivation::Identity, derive_seed(seed, 2))),
        target_critic1_(critic1_),
        target_critic2_(critic2_),
        actor_opt_(nn::AdamState::for_network(actor_)),
        critic1_opt_(nn::AdamState::for_network(critic1_)),
        critic2_opt_(nn::AdamState::for_network(critic2_)) {}

  Algorithm algorithm() const override { return Algorithm::SAC; }
  double entropy_alpha() const { return config_.sac_entropy_alpha; }

  /// Clamped Gaussian parameters for one state.
  GaussianHead policy_head(std::span<const double> state) const {
    check_state(state);
    return split_gaussian_head(nn::Matrix(1, 2 * action_dim_, nn::mlp_forward(actor_, state).output), action_dim_);
  }

  std::vector<double> select_action(std::span<const double> state, bool explore, Rng& rng) const override {
    GaussianHead head = policy_head(state);
    std::vector<double> a(action_dim_);
    if (explore) {
      SquashedSample s = squashed_sample(head, standard_normal(1, action_dim_, rng));
      a = s.actions.data;
    } else {
      for (std::size_t j = 0; j < action_dim_; ++j) a[j] = squash(head.mean(0, j));
    }
    return clamp_unit(std::move(a));
  }

  /// T = min(Q1', Q2')(s', a') - alpha log pi(a' | s') with a' freshly sampled from the current policy.
  std::vector<double> compute_critic_targets(const Batch& batch, Rng& rng) const override {
    GaussianHead head = split_gaussian_head(nn::mlp_predict(actor_, batch.next_states), action_dim_);
    SquashedSample next = squashed_sample(head, standard_normal(batch.size(), action_dim_, rng));
    CriticOutput q = evaluate_twin_min(target_critic1_, target_critic2_, batch.next_states, next.actions, false);
    std::vector<double> soft(batch.size());
    for (std::size_t i = 0; i < soft.size(); ++i) soft[i] = q.q[i] - config_.sac_entropy_alpha * next.log_prob[i];
    std::vector<double> y = bellman_targets(batch, soft, config_.gamma);
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

  double update_actor(const Batch& batch, Rng& rng) override {
    return update_actor_with(
        batch,
        [this](const nn::Matrix& s, const nn::Matrix& a) { return evaluate_twin_min(critic1_, critic2_, s, a, true); },
        rng);
  }

  template <CriticFunction Critic>
  double update_actor_with(const Batch& batch, Critic&& critic, Rng& rng) {
    nn::Matrix noise = standard_normal(batch.size(), action_dim_, rng);
    const double loss = squashed_actor_step(actor_, actor_opt_, config_.actor_lr, batch.states,
                                            config_.sac_entropy_alpha, noise, critic);
    ++counters_.actor_updates;
    return loss;
  }

  void update_targets() override {
    polyak_update(target_critic1_, critic1_, config_.polyak_rho);
    polyak_update(target_critic2_, critic2_, config_.polyak_rho);
    ++counters_.target_updates;
  }

  std::vector<NetworkSlot> networks() override {
    return {{"actor", &actor_, &actor_opt_},
            {"critic_1", &critic1_, &critic1_opt_},
            {"critic_2", &critic2_, &critic2_opt_},
            {"target_critic_1", &target_critic1_, nullptr},
            {"target_critic_2", &target_critic2_, nullptr}};
  }

  const nn::Mlp& actor() const { return actor_; }
  nn::Mlp& actor() { return actor_; }
  const nn::Mlp& critic1() const { return critic1_; }
  const nn::Mlp& critic2() const { return critic2_; }
  nn::Mlp& target_critic1() { return target_critic1_; }
  nn::Mlp& target_critic2() { return target_critic2_; }
  const nn::Mlp& target_critic1() const { return target_critic1_; }
  const nn::Mlp& target_critic2() const { return target_critic2_; }

 private:
  nn::Mlp actor_;
  nn::Mlp critic1_;
  nn::Mlp critic2_;
  nn::Mlp target_critic1_;
  nn::Mlp target_critic2_;
  nn::AdamState actor_opt_;
  nn::AdamState critic1_opt_;
  nn::AdamState critic2_opt_;
};

}  // namespace offpolicy::agents
