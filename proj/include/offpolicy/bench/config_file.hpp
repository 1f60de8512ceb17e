#pragma once

// Run configuration files: one `key = value` per line, '#' starts a comment.
// Keys are the field names of AgentConfig, TaskSpec and RunConfig:
//
//   # agent
//   gamma = 0.98            actor_lr, critic_lr, polyak_rho, exploration_noise_std,
//   td3_target_noise_std, td3_target_noise_clip, td3_policy_delay, sac_entropy_alpha,
//   batch_size, updates_per_episode,
//   actor_layers = 64,64,64 critic_layers
//   # task
//   horizon, goal_tolerance, dt, friction, max_speed, contact_radius, grasp_radius,
//   strike_gain, object_range, goal_range
//   # run
//   algorithm = td3         task = push, profile = desk, epochs, episodes_per_epoch,
//   eval_episodes, seed, relabeling_enabled = true|false

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "offpolicy/bench/run.hpp"

namespace offpolicy::bench {

struct ConfigFile {
  std::string source = "config";
  /// key -> (value, line number)
  std::map<std::string, std::pair<std::string, std::size_t>> entries;

  bool has(const std::string& key) const { return entries.count(key) != 0; }
  const std::string& value(const std::string& key) const { return entries.at(key).first; }
};

namespace config_detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double to_real(const std::string& v, const std::string& where) {
  std::size_t used = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (v.empty() || used != v.size()) throw std::invalid_argument(where + ": expected a number, got '" + v + "'");
  return d;
}

inline std::uint64_t to_count(const std::string& v, const std::string& where) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
    throw std::invalid_argument(where + ": expected a non-negative integer, got '" + v + "'");
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw std::invalid_argument(where + ": integer out of range '" + v + "'");
  }
}

inline bool to_flag(const std::string& v, const std::string& where) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument(where + ": expected true or false, got '" + v + "'");
}

inline std::vector<std::size_t> to_layers(const std::string& v, const std::string& where) {
  std::vector<std::size_t> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = v.find(',', start);
    out.push_back(to_count(trim(v.substr(start, comma - start)), where));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace config_detail

inline ConfigFile parse_config(std::istream& in, const std::string& source = "config") {
  ConfigFile cf;
  cf.source = source;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = config_detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(line_no);
    if (eq == std::string::npos) throw std::invalid_argument(where + ": expected key = value");
    const std::string key = config_detail::trim(line.substr(0, eq));
    const std::string val = config_detail::trim(line.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument(where + ": empty key");
    if (cf.has(key)) throw std::invalid_argument(where + ": duplicate key '" + key + "'");
    cf.entries[key] = {val, line_no};
  }
  return cf;
}

inline ConfigFile load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  return parse_config(in, path.string());
}

/// Keys read before the run config exists (they choose the defaults everything else overrides).
inline bool is_selector_key(const std::string& key) { return key == "algorithm" || key == "task" || key == "profile"; }

/// Applies every non-selector key to `c`; unknown keys are an error.
inline void apply_config(const ConfigFile& cf, RunConfig& c) {
  using namespace config_detail;
  auto& a = c.agent_config;
  auto& t = c.task_spec;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  const auto real = [](double& f) -> Setter { return [&f](const std::string& v, const std::string& w) { f = to_real(v, w); }; };
  const auto count = [](std::size_t& f) -> Setter {
    return [&f](const std::string& v, const std::string& w) { f = static_cast<std::size_t>(to_count(v, w)); };
  };
  const std::map<std::string, Setter> setters = {
      {"gamma", real(a.gamma)},
      {"actor_lr", real(a.actor_lr)},
      {"critic_lr", real(a.critic_lr)},
      {"polyak_rho", real(a.polyak_rho)},
      {"exploration_noise_std", real(a.exploration_noise_std)},
      {"td3_target_noise_std", real(a.td3_target_noise_std)},
      {"td3_target_noise_clip", real(a.td3_target_noise_clip)},
      {"td3_policy_delay", count(a.td3_policy_delay)},
      {"sac_entropy_alpha", real(a.sac_entropy_alpha)},
      {"batch_size", count(a.batch_size)},
      {"updates_per_episode", count(a.updates_per_episode)},
      {"actor_layers", [&a](const std::string& v, const std::string& w) { a.actor_layers = to_layers(v, w); }},
      {"critic_layers", [&a](const std::string& v, const std::string& w) { a.critic_layers = to_layers(v, w); }},
      {"horizon", count(t.horizon)},
      {"goal_tolerance", real(t.goal_tolerance)},
      {"dt", real(t.dt)},
      {"friction", real(t.friction)},
      {"max_speed", real(t.max_speed)},
      {"contact_radius", real(t.contact_radius)},
      {"grasp_radius", real(t.grasp_radius)},
      {"strike_gain", real(t.strike_gain)},
      {"object_range", real(t.object_range)},
      {"goal_range", real(t.goal_range)},
      {"epochs", count(c.epochs)},
      {"episodes_per_epoch", count(c.episodes_per_epoch)},
      {"eval_episodes", count(c.eval_episodes)},
      {"seed", [&c](const std::string& v, const std::string& w) { c.seed = to_count(v, w); }},
      {"relabeling_enabled", [&c](const std::string& v, const std::string& w) { c.relabeling_enabled = to_flag(v, w); }},
  };
  for (const auto& [key, entry] : cf.entries) {
    if (is_selector_key(key)) continue;
    const std::string where = cf.source + ":" + std::to_string(entry.second);
    const auto it = setters.find(key);
    if (it == setters.end()) throw std::invalid_argument(where + ": unknown key '" + key + "'");
    it->second(entry.first, where);
  }
}

}  // namespace offpolicy::bench
