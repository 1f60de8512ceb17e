#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "offpolicy/agents/checkpoint.hpp"
#include "offpolicy/env/manipulation.hpp"
#include "offpolicy/replay/replay_buffer.hpp"

namespace offpolicy::bench {

using agents::Rng;

enum class Profile { Desk, Full };

inline std::string_view to_string(Profile p) { return p == Profile::Desk ? "desk" : "full"; }

inline std::optional<Profile> parse_profile(std::string_view s) {
  if (s == "desk") return Profile::Desk;
  if (s == "full") return Profile::Full;
  return std::nullopt;
}

struct RunConfig {
  agents::Algorithm algorithm = agents::Algorithm::DDPG;
  env::Task task = env::Task::Reach;
  std::size_t epochs = 50;
  std::size_t episodes_per_epoch = 10;
  std::size_t eval_episodes = 20;
  std::uint64_t seed = 0;
  agents::AgentConfig agent_config;
  env::TaskSpec task_spec;
  bool relabeling_enabled = false;
  std::filesystem::path output_dir = ".";

  void validate() const {
    if (epochs < 1) throw std::invalid_argument("RunConfig: epochs must be >= 1");
    if (episodes_per_epoch < 1) throw std::invalid_argument("RunConfig: episodes_per_epoch must be >= 1");
    if (eval_episodes < 1) throw std::invalid_argument("RunConfig: eval_episodes must be >= 1");
    if (task_spec.task != task) throw std::invalid_argument("RunConfig: task_spec describes a different task");
    agent_config.validate();
    task_spec.validate();
  }

  /// `<algo>_<task>_seed<k>`, the stem shared by the CSV and checkpoint files.
  std::string run_name() const {
    return std::string(agents::to_string(algorithm)) + "_" + std::string(env::to_string(task)) + "_seed" +
           std::to_string(seed);
  }
};

/// Desk: 50 epochs x 10 episodes, three 64-unit hidden layers for every algorithm, learning
/// rate 1e-3 to make up for 40x fewer gradient steps, exploration noise 0.2.
/// Full: 400 epochs x 50 episodes with the full 256-unit networks at 1e-4.
inline RunConfig make_run_config(Profile profile, agents::Algorithm algo, env::Task task, std::uint64_t seed) {
  RunConfig c;
  c.algorithm = algo;
  c.task = task;
  c.seed = seed;
  c.task_spec = env::TaskSpec::defaults(task);
  c.agent_config = agents::AgentConfig::full_scale(algo);
  if (profile == Profile::Full) {
    c.epochs = 400;
    c.episodes_per_epoch = 50;
  } else {
    c.epochs = 50;
    c.episodes_per_epoch = 10;
    c.agent_config.actor_layers = {64, 64, 64};
    c.agent_config.critic_layers = {64, 64, 64};
    c.agent_config.actor_lr = 1e-3;
    c.agent_config.critic_lr = 1e-3;
    c.agent_config.exploration_noise_std = 0.2;
  }
  c.eval_episodes = 20;
  c.agent_config.updates_per_episode = c.task_spec.horizon;
  return c;
}

struct EpochReport {
  std::size_t epoch = 0;
  double success_rate = 0.0;
  double mean_return = 0.0;
  double wall_clock_seconds = 0.0;
  std::uint64_t env_steps = 0;
};

struct RunResult {
  RunConfig config;
  std::vector<EpochReport> reports;
  double total_seconds = 0.0;
  std::string final_checkpoint;
};

/// Maps a network input vector to an action in [-1, 1]^4.
using Policy = std::function<std::vector<double>(std::span<const double>)>;

struct EpisodeOutcome {
  std::vector<replay::Transition> transitions;
  double episode_return = 0.0;
  bool success = false;
};

/// One full-horizon episode. Success is judged on the final step.
inline EpisodeOutcome run_episode(const env::TaskSpec& spec, const Policy& policy, Rng& env_rng) {
  env::ResetResult start = env::reset(spec, env_rng);
  env::EnvState state = start.state;
  env::GoalObservation obs = start.observation;
  EpisodeOutcome out;
  out.transitions.reserve(spec.horizon);
  for (std::size_t t = 0; t < spec.horizon; ++t) {
    std::vector<double> s = obs.network_input();
    std::vector<double> a = policy(s);
    env::StepResult r = env::step(state, a, spec);
    replay::Transition tr;
    tr.state = std::move(s);
    tr.action = std::move(a);
    tr.reward = r.reward;
    tr.next_state = r.observation.network_input();
    tr.terminal = r.done;
    tr.achieved_goal = obs.achieved_goal;
    tr.next_achieved_goal = r.observation.achieved_goal;
    tr.desired_goal = obs.desired_goal;
    out.transitions.push_back(std::move(tr));
    out.episode_return += r.reward;
    state = r.state;
    obs = r.observation;
  }
  out.success = env::is_success(obs.achieved_goal, obs.desired_goal, spec.goal_tolerance);
  return out;
}

struct Evaluation {
  double success_rate = 0.0;
  double mean_return = 0.0;
};

/// Episodes on environments drawn from `seed`; success_rate is successes / episodes exactly.
inline Evaluation evaluate_policy(const Policy& policy, const env::TaskSpec& spec, std::size_t episodes,
                                  std::uint64_t seed) {
  if (episodes < 1) throw std::invalid_argument("evaluate: eval_episodes must be >= 1");
  Rng env_rng(seed);
  std::size_t successes = 0;
  double total_return = 0.0;
  for (std::size_t e = 0; e < episodes; ++e) {
    EpisodeOutcome o = run_episode(spec, policy, env_rng);
    successes += o.success;
    total_return += o.episode_return;
  }
  const double n = static_cast<double>(episodes);
  return {static_cast<double>(successes) / n, total_return / n};
}

/// Greedy (explore = false) evaluation of an agent.
inline Evaluation evaluate(const agents::Agent& agent, const env::TaskSpec& spec, std::size_t episodes,
                           std::uint64_t seed) {
  Rng unused(0);
  return evaluate_policy([&](std::span<const double> s) { return agent.select_action(s, false, unused); }, spec,
                         episodes, seed);
}

/// Uniform actions in [-1, 1]^4.
inline Policy random_policy(Rng& rng) {
  return [&rng](std::span<const double>) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> a(4);
    for (double& v : a) v = u(rng);
    return a;
  };
}

struct TrainingHooks {
  /// Called after every epoch with the reports so far; used to flush partial results.
  std::function<void(const RunResult&)> on_epoch;
};

/// Epoch loop: training episodes with exploration, each followed by
/// `updates_per_episode` train steps once the buffer holds a batch, then a greedy evaluation.
inline RunResult run_training(const RunConfig& config, const TrainingHooks& hooks = {}) {
  config.validate();
  using Clock = std::chrono::steady_clock;
  const auto run_start = Clock::now();

  const env::TaskSpec& spec = config.task_spec;
  std::unique_ptr<agents::Agent> agent = agents::make_agent(config.algorithm, spec.state_dim(), spec.action_dim,
                                                            config.agent_config, agents::derive_seed(config.seed, 1));
  replay::ReplayBuffer buffer;
  Rng env_rng(agents::derive_seed(config.seed, 2));
  Rng act_rng(agents::derive_seed(config.seed, 3));
  Rng train_rng(agents::derive_seed(config.seed, 4));
  const Policy behaviour = [&](std::span<const double> s) { return agent->select_action(s, true, act_rng); };

  RunResult result;
  result.config = config;
  std::uint64_t env_steps = 0;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto epoch_start = Clock::now();
    for (std::size_t ep = 0; ep < config.episodes_per_epoch; ++ep) {
      EpisodeOutcome o = run_episode(spec, behaviour, env_rng);
      env_steps += o.transitions.size();
      for (const auto& t : o.transitions) buffer.push(t);
      if (config.relabeling_enabled)
        for (const auto& t : replay::relabel_final(o.transitions, spec.goal_tolerance)) buffer.push(t);
      if (buffer.size() >= config.agent_config.batch_size)
        for (std::size_t u = 0; u < config.agent_config.updates_per_episode; ++u) agent->train_step(buffer, train_rng);
    }
    Evaluation ev = evaluate(*agent, spec, config.eval_episodes, agents::derive_seed(config.seed, 1000 + epoch));
    const std::chrono::duration<double> elapsed = Clock::now() - epoch_start;
    result.reports.push_back({epoch, ev.success_rate, ev.mean_return, elapsed.count(), env_steps});
    if (hooks.on_epoch) hooks.on_epoch(result);
  }
  result.final_checkpoint = agents::checkpoint_bytes(*agent);
  result.total_seconds = std::chrono::duration<double>(Clock::now() - run_start).count();
  return result;
}

/// Mean success rate over the last `n` epochs (all epochs if fewer).
inline double tail_success(const std::vector<EpochReport>& reports, std::size_t n = 10) {
  if (reports.empty()) return 0.0;
  const std::size_t k = std::min(n, reports.size());
  double s = 0.0;
  for (std::size_t i = reports.size() - k; i < reports.size(); ++i) s += reports[i].success_rate;
  return s / static_cast<double>(k);
}

inline double mean_epoch_seconds(const std::vector<EpochReport>& reports) {
  double s = 0.0;
  for (const auto& r : reports) s += r.wall_clock_seconds;
  return reports.empty() ? 0.0 : s / static_cast<double>(reports.size());
}

}  // namespace offpolicy::bench
