#pragma once

#include <array>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "offpolicy/agents/ddpg.hpp"
#include "offpolicy/agents/sac.hpp"
#include "offpolicy/agents/td3.hpp"
#include "offpolicy/nn/serialize.hpp"

namespace offpolicy::agents {

inline std::unique_ptr<Agent> make_agent(Algorithm algo, std::size_t state_dim, std::size_t action_dim,
                                         const AgentConfig& config, std::uint64_t seed) {
  switch (algo) {
    case Algorithm::DDPG: return std::make_unique<DdpgAgent>(state_dim, action_dim, config, seed);
    case Algorithm::TD3: return std::make_unique<Td3Agent>(state_dim, action_dim, config, seed);
    case Algorithm::SAC: return std::make_unique<SacAgent>(state_dim, action_dim, config, seed);
  }
  throw std::invalid_argument("make_agent: unknown algorithm");
}

inline constexpr std::array<char, 8> kCheckpointMagic{'O', 'P', 'A', 'G', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

inline void write_sizes(std::ostream& out, const std::vector<std::size_t>& v) {
  nn::io::write_pod<std::uint64_t>(out, v.size());
  for (std::size_t x : v) nn::io::write_pod<std::uint64_t>(out, x);
}

inline std::vector<std::size_t> read_sizes(std::istream& in) {
  const auto n = nn::io::read_pod<std::uint64_t>(in);
  if (n > 64) throw std::runtime_error("checkpoint: layer list too long");
  std::vector<std::size_t> v(n);
  for (auto& x : v) x = nn::io::read_pod<std::uint64_t>(in);
  return v;
}

inline void write_config(std::ostream& out, const AgentConfig& c) {
  using nn::io::write_pod;
  for (double d : {c.gamma, c.actor_lr, c.critic_lr, c.polyak_rho, c.exploration_noise_std, c.td3_target_noise_std,
                   c.td3_target_noise_clip, c.sac_entropy_alpha})
    write_pod<double>(out, d);
  write_pod<std::uint64_t>(out, c.td3_policy_delay);
  write_pod<std::uint64_t>(out, c.batch_size);
  write_pod<std::uint64_t>(out, c.updates_per_episode);
  write_sizes(out, c.actor_layers);
  write_sizes(out, c.critic_layers);
}

inline AgentConfig read_config(std::istream& in) {
  using nn::io::read_pod;
  AgentConfig c;
  for (double* d : {&c.gamma, &c.actor_lr, &c.critic_lr, &c.polyak_rho, &c.exploration_noise_std,
                    &c.td3_target_noise_std, &c.td3_target_noise_clip, &c.sac_entropy_alpha})
    *d = read_pod<double>(in);
  c.td3_policy_delay = read_pod<std::uint64_t>(in);
  c.batch_size = read_pod<std::uint64_t>(in);
  c.updates_per_episode = read_pod<std::uint64_t>(in);
  c.actor_layers = read_sizes(in);
  c.critic_layers = read_sizes(in);
  return c;
}

}  // namespace detail

/// Layout: magic, version, algorithm, dims, config, counters, then every network slot by
/// name as a parameter snapshot followed by its optimizer state when it has one.
inline void write_checkpoint(std::ostream& out, Agent& agent) {
  using nn::io::write_pod;
  out.write(kCheckpointMagic.data(), kCheckpointMagic.size());
  write_pod<std::uint32_t>(out, kCheckpointVersion);
  write_pod<std::uint8_t>(out, static_cast<std::uint8_t>(agent.algorithm()));
  write_pod<std::uint64_t>(out, agent.state_dim());
  write_pod<std::uint64_t>(out, agent.action_dim());
  detail::write_config(out, agent.config());
  write_pod<std::uint64_t>(out, agent.counters().critic_updates);
  write_pod<std::uint64_t>(out, agent.counters().actor_updates);
  write_pod<std::uint64_t>(out, agent.counters().target_updates);
  const auto slots = agent.networks();
  write_pod<std::uint64_t>(out, slots.size());
  for (const NetworkSlot& s : slots) {
    nn::io::write_string(out, s.name);
    nn::write_snapshot(out, *s.network);
    write_pod<std::uint8_t>(out, s.optimizer ? 1 : 0);
    if (s.optimizer) nn::write_adam_state(out, *s.network, *s.optimizer);
  }
  if (!out) throw std::runtime_error("checkpoint: write failed");
}

inline std::unique_ptr<Agent> read_checkpoint(std::istream& in) {
  using nn::io::read_pod;
  nn::io::expect_magic(in, kCheckpointMagic, "checkpoint");
  if (read_pod<std::uint32_t>(in) != kCheckpointVersion) throw std::runtime_error("checkpoint: unsupported version");
  const auto algo_byte = read_pod<std::uint8_t>(in);
  if (algo_byte > static_cast<std::uint8_t>(Algorithm::SAC)) throw std::runtime_error("checkpoint: unknown algorithm");
  const auto sd = read_pod<std::uint64_t>(in);
  const auto ad = read_pod<std::uint64_t>(in);
  AgentConfig config = detail::read_config(in);
  UpdateCounters counters;
  counters.critic_updates = read_pod<std::uint64_t>(in);
  counters.actor_updates = read_pod<std::uint64_t>(in);
  counters.target_updates = read_pod<std::uint64_t>(in);

  std::unique_ptr<Agent> agent = make_agent(static_cast<Algorithm>(algo_byte), sd, ad, config, 0);
  agent->set_counters(counters);
  auto slots = agent->networks();
  if (read_pod<std::uint64_t>(in) != slots.size()) throw std::runtime_error("checkpoint: network count mismatch");
  for (NetworkSlot& s : slots) {
    if (nn::io::read_string(in, 256) != s.name) throw std::runtime_error("checkpoint: expected network " + s.name);
    nn::Mlp net = nn::read_snapshot(in);
    if (!net.same_architecture(*s.network)) throw std::runtime_error("checkpoint: shape mismatch in " + s.name);
    *s.network = std::move(net);
    const bool has_opt = read_pod<std::uint8_t>(in) != 0;
    if (has_opt != (s.optimizer != nullptr)) throw std::runtime_error("checkpoint: optimizer flag mismatch in " + s.name);
    if (s.optimizer) {
      nn::AdamState st = nn::read_adam_state(in);
      if (!st.first_moment.congruent_with(*s.network) || !st.second_moment.congruent_with(*s.network))
        throw std::runtime_error("checkpoint: optimizer shape mismatch in " + s.name);
      *s.optimizer = std::move(st);
    }
  }
  return agent;
}

inline void save_checkpoint(const std::string& path, Agent& agent) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot open " + path);
  write_checkpoint(out, agent);
}

inline std::unique_ptr<Agent> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
  return read_checkpoint(in);
}

inline std::string checkpoint_bytes(Agent& agent) {
  std::ostringstream out(std::ios::binary);
  write_checkpoint(out, agent);
  return out.str();
}

}  // namespace offpolicy::agents
