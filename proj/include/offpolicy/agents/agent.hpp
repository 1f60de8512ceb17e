#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "offpolicy/agents/batch.hpp"
#include "offpolicy/agents/config.hpp"
#include "offpolicy/agents/critic.hpp"
#include "offpolicy/agents/polyak.hpp"
#include "offpolicy/nn/adam.hpp"
#include "offpolicy/nn/mlp.hpp"
#include "offpolicy/replay/replay_buffer.hpp"

namespace offpolicy::agents {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; derives independent seeds from one run seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

struct TrainStepResult {
  double critic_loss = 0.0;
  std::optional<double> actor_loss;
};

struct UpdateCounters {
  std::uint64_t critic_updates = 0;
  std::uint64_t actor_updates = 0;
  std::uint64_t target_updates = 0;

  bool operator==(const UpdateCounters&) const = default;
};

/// A named network inside an agent; `optimizer` is null for target networks.
struct NetworkSlot {
  std::string name;
  nn::Mlp* network = nullptr;
  nn::AdamState* optimizer = nullptr;
};

inline std::vector<std::size_t> layer_plan(std::size_t input, const std::vector<std::size_t>& hidden,
                                           std::size_t output) {
  std::vector<std::size_t> sizes{input};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(output);
  return sizes;
}

inline std::vector<double> clamp_unit(std::vector<double> a) {
  for (double& v : a) v = std::clamp(v, -1.0, 1.0);
  return a;
}

/// Common surface of the off-policy learners. One instance is single-threaded.
class Agent {
 public:
  Agent(std::size_t state_dim, std::size_t action_dim, AgentConfig config)
      : state_dim_(state_dim), action_dim_(action_dim), config_(std::move(config)) {
    config_.validate();
    if (state_dim == 0 || action_dim == 0) throw std::invalid_argument("Agent: zero state or action dimension");
  }
  virtual ~Agent() = default;
  Agent(const Agent&) = default;
  Agent& operator=(const Agent&) = default;

  virtual Algorithm algorithm() const = 0;

  /// Action in [-1, 1]^action_dim; `explore` adds the algorithm's behaviour noise.
  virtual std::vector<double> select_action(std::span<const double> state, bool explore, Rng& rng) const = 0;

  /// Bootstrap targets y = r + gamma (1 - d) T, one per row; evaluated without gradients.
  virtual std::vector<double> compute_critic_targets(const Batch& batch, Rng& rng) const = 0;

  /// One Adam step per critic on the squared error against `targets`. Returns the
  /// first critic's loss after the step.
  virtual double update_critic(const Batch& batch, std::span<const double> targets) = 0;

  /// One Adam step on the actor objective. Returns the loss before the step.
  virtual double update_actor(const Batch& batch, Rng& rng) = 0;

  /// Polyak-averages every target network toward its online network.
  virtual void update_targets() = 0;

  virtual std::vector<NetworkSlot> networks() = 0;

  double update_critic(const Batch& batch, Rng& rng) { return update_critic(batch, compute_critic_targets(batch, rng)); }

  /// Samples one minibatch, updates the critics, and (when due) the actor and targets.
  TrainStepResult train_step(const replay::ReplayBuffer& buffer, Rng& rng) {
    if (buffer.size() < config_.batch_size) {
      throw std::logic_error("train_step: buffer holds " + std::to_string(buffer.size()) + " transitions, batch needs " +
                             std::to_string(config_.batch_size));
    }
    std::vector<std::size_t> idx = buffer.sample_indices(config_.batch_size, rng);
    std::vector<replay::Transition> rows;
    rows.reserve(idx.size());
    for (std::size_t i : idx) rows.push_back(buffer.at(i));
    Batch batch = make_batch(rows);
    return train_on_batch(batch, rng);
  }

  TrainStepResult train_on_batch(const Batch& batch, Rng& rng) {
    TrainStepResult r;
    std::vector<double> y = compute_critic_targets(batch, rng);
    r.critic_loss = update_critic(batch, y);
    if (policy_update_due()) {
      r.actor_loss = update_actor(batch, rng);
      update_targets();
    }
    return r;
  }

  std::size_t state_dim() const { return state_dim_; }
  std::size_t action_dim() const { return action_dim_; }
  const AgentConfig& config() const { return config_; }
  const UpdateCounters& counters() const { return counters_; }
  void set_counters(const UpdateCounters& c) { counters_ = c; }

 protected:
  /// Checked after the critic update of a train step.
  virtual bool policy_update_due() const { return true; }

  void check_state(std::span<const double> state) const {
    if (state.size() != state_dim_) {
      throw std::invalid_argument("select_action: state has " + std::to_string(state.size()) + " entries, expected " +
                                  std::to_string(state_dim_));
    }
  }

  static void check_targets(std::span<const double> y) {
    for (double v : y)
      if (!std::isfinite(v)) throw std::domain_error("critic targets: non-finite value");
  }

  std::size_t state_dim_;
  std::size_t action_dim_;
  AgentConfig config_;
  UpdateCounters counters_;
};

/// y_i = r_i + gamma * (1 - d_i) * next_value_i
inline std::vector<double> bellman_targets(const Batch& batch, std::span<const double> next_value, double gamma) {
  std::vector<double> y(batch.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = batch.rewards[i] + gamma * (1.0 - batch.terminals[i]) * next_value[i];
  return y;
}

}  // namespace offpolicy::agents
