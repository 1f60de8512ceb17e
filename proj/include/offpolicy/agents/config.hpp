#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace offpolicy::agents {

enum class Algorithm : std::uint8_t { DDPG = 0, TD3 = 1, SAC = 2 };

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::DDPG: return "ddpg";
    case Algorithm::TD3: return "td3";
    case Algorithm::SAC: return "sac";
  }
  return "unknown";
}

inline std::optional<Algorithm> parse_algorithm(std::string_view s) {
  for (Algorithm a : {Algorithm::DDPG, Algorithm::TD3, Algorithm::SAC})
    if (s == to_string(a)) return a;
  return std::nullopt;
}

/// Hyperparameters shared by all three learners. Layer lists hold hidden widths only;
/// input and output sizes come from the environment.
struct AgentConfig {
  double gamma = 0.98;
  double actor_lr = 1e-4;
  double critic_lr = 1e-4;
  double polyak_rho = 0.05;
  double exploration_noise_std = 0.1;
  double td3_target_noise_std = 0.2;
  double td3_target_noise_clip = 0.5;
  std::size_t td3_policy_delay = 2;
  double sac_entropy_alpha = 0.2;
  std::size_t batch_size = 128;
  std::size_t updates_per_episode = 50;
  std::vector<std::size_t> actor_layers{256, 256, 256};
  std::vector<std::size_t> critic_layers{256, 256, 256};

  /// Full-size settings: three 256-unit hidden layers for DDPG/TD3, two for SAC.
  static AgentConfig full_scale(Algorithm algo) {
    AgentConfig c;
    if (algo == Algorithm::SAC) {
      c.actor_layers = {256, 256};
      c.critic_layers = {256, 256};
    }
    return c;
  }

  void validate() const {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("AgentConfig: gamma must be in (0, 1]");
    if (!(polyak_rho > 0.0 && polyak_rho < 1.0)) throw std::invalid_argument("AgentConfig: polyak_rho must be in (0, 1)");
    if (!(exploration_noise_std >= 0.0) || !(td3_target_noise_std >= 0.0) || !(td3_target_noise_clip >= 0.0)) {
      throw std::invalid_argument("AgentConfig: noise scales must be >= 0");
    }
    if (td3_policy_delay < 1) throw std::invalid_argument("AgentConfig: td3_policy_delay must be >= 1");
    if (!(sac_entropy_alpha >= 0.0)) throw std::invalid_argument("AgentConfig: sac_entropy_alpha must be >= 0");
    if (!(actor_lr > 0.0) || !(critic_lr > 0.0)) throw std::invalid_argument("AgentConfig: learning rates must be > 0");
    if (batch_size < 1) throw std::invalid_argument("AgentConfig: batch_size must be >= 1");
    for (std::size_t w : actor_layers)
      if (w == 0) throw std::invalid_argument("AgentConfig: zero-width actor layer");
    for (std::size_t w : critic_layers)
      if (w == 0) throw std::invalid_argument("AgentConfig: zero-width critic layer");
  }

  bool operator==(const AgentConfig&) const = default;
};

}  // namespace offpolicy::agents
