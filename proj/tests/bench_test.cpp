#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "offpolicy/bench/config_file.hpp"
#include "offpolicy/bench/report.hpp"

namespace bn = offpolicy::bench;
namespace ag = offpolicy::agents;
namespace env = offpolicy::env;
namespace nn = offpolicy::nn;
namespace fs = std::filesystem;

namespace {

bn::RunConfig tiny_run(ag::Algorithm algo, env::Task task, std::uint64_t seed) {
  bn::RunConfig c = bn::make_run_config(bn::Profile::Desk, algo, task, seed);
  c.agent_config.actor_layers = {16, 16};
  c.agent_config.critic_layers = {16, 16};
  c.agent_config.batch_size = 32;
  c.agent_config.updates_per_episode = 10;
  c.epochs = 2;
  c.episodes_per_epoch = 2;
  c.eval_episodes = 4;
  return c;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("offpolicy_bench_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

// CSV text with the wall_clock_s column blanked.
std::string without_timing(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string x; std::getline(ls, x, ',');) f.push_back(x);
    if (f.size() == 5) f[3] = "-";
    for (std::size_t i = 0; i < f.size(); ++i) out += (i ? "," : "") + f[i];
    out += '\n';
  }
  return out;
}

bn::EpochReport report(std::size_t epoch, double success, double ret = -10.0, double secs = 1.0,
                       std::uint64_t steps = 0) {
  return {epoch, success, ret, secs, steps};
}

}  // namespace

// ---- profiles and run config ----

TEST(RunConfig, DeskAndFullProfiles) {
  const auto desk = bn::make_run_config(bn::Profile::Desk, ag::Algorithm::SAC, env::Task::Push, 3);
  EXPECT_EQ(desk.epochs, 50u);
  EXPECT_EQ(desk.episodes_per_epoch, 10u);
  EXPECT_EQ(desk.eval_episodes, 20u);
  EXPECT_EQ(desk.task_spec.horizon, 50u);
  EXPECT_EQ(desk.agent_config.updates_per_episode, 50u);
  const auto full = bn::make_run_config(bn::Profile::Full, ag::Algorithm::SAC, env::Task::Push, 3);
  EXPECT_EQ(full.epochs, 400u);
  EXPECT_EQ(full.episodes_per_epoch, 50u);
  EXPECT_EQ(full.agent_config.actor_layers, (std::vector<std::size_t>{256, 256}));
  EXPECT_DOUBLE_EQ(full.agent_config.actor_lr, 1e-4);
  EXPECT_EQ(desk.run_name(), "sac_push_seed3");
}

TEST(RunConfig, RejectsZeroCounts) {
  auto c = tiny_run(ag::Algorithm::DDPG, env::Task::Reach, 0);
  c.epochs = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = tiny_run(ag::Algorithm::DDPG, env::Task::Reach, 0);
  c.eval_episodes = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = tiny_run(ag::Algorithm::DDPG, env::Task::Reach, 0);
  c.task_spec = env::TaskSpec::defaults(env::Task::Push);
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

// ---- run_training ----

TEST(RunTraining, OneEpochOneEpisodeCountsOneHorizon) {
  auto c = tiny_run(ag::Algorithm::DDPG, env::Task::Reach, 1);
  c.epochs = 1;
  c.episodes_per_epoch = 1;
  const auto r = bn::run_training(c);
  ASSERT_EQ(r.reports.size(), 1u);
  EXPECT_EQ(r.reports[0].epoch, 1u);
  EXPECT_EQ(r.reports[0].env_steps, c.task_spec.horizon);
}

TEST(RunTraining, AccountingAndTiming) {
  auto c = tiny_run(ag::Algorithm::TD3, env::Task::Push, 2);
  c.epochs = 3;
  const auto r = bn::run_training(c);
  ASSERT_EQ(r.reports.size(), 3u);
  double sum = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(r.reports[k].env_steps, (k + 1) * c.episodes_per_epoch * c.task_spec.horizon);
    EXPECT_GT(r.reports[k].wall_clock_seconds, 0.0);
    const double scaled = r.reports[k].success_rate * static_cast<double>(c.eval_episodes);
    EXPECT_EQ(scaled, std::round(scaled));
    sum += r.reports[k].wall_clock_seconds;
  }
  EXPECT_GE(r.total_seconds, sum);
  EXPECT_FALSE(r.final_checkpoint.empty());
}

TEST(RunTraining, SameConfigSameResults) {
  for (ag::Algorithm algo : {ag::Algorithm::DDPG, ag::Algorithm::TD3, ag::Algorithm::SAC}) {
    auto c = tiny_run(algo, env::Task::Push, 5);
    c.relabeling_enabled = true;
    const auto a = bn::run_training(c);
    const auto b = bn::run_training(c);
    ASSERT_EQ(a.reports.size(), b.reports.size());
    for (std::size_t k = 0; k < a.reports.size(); ++k) {
      EXPECT_EQ(a.reports[k].success_rate, b.reports[k].success_rate);
      EXPECT_EQ(a.reports[k].mean_return, b.reports[k].mean_return);
    }
    EXPECT_EQ(a.final_checkpoint, b.final_checkpoint) << ag::to_string(algo);
    EXPECT_EQ(without_timing(bn::csv_text(a.reports)), without_timing(bn::csv_text(b.reports)));
  }
}

TEST(RunTraining, SeedChangesTheRun) {
  const auto a = bn::run_training(tiny_run(ag::Algorithm::DDPG, env::Task::Reach, 1));
  const auto b = bn::run_training(tiny_run(ag::Algorithm::DDPG, env::Task::Reach, 2));
  EXPECT_NE(a.final_checkpoint, b.final_checkpoint);
}

TEST(RunTraining, RelabelingOnlyChangesTheBufferContents) {
  auto c = tiny_run(ag::Algorithm::DDPG, env::Task::Reach, 4);
  const auto plain = bn::run_training(c);
  c.relabeling_enabled = true;
  const auto relabeled = bn::run_training(c);
  EXPECT_EQ(plain.reports.back().env_steps, relabeled.reports.back().env_steps);
  EXPECT_NE(plain.final_checkpoint, relabeled.final_checkpoint);
}

// ---- evaluation ----

TEST(Evaluate, ZeroActorWithGoalAtStartSucceeds) {
  env::TaskSpec spec = env::TaskSpec::defaults(env::Task::Reach);
  const env::Vec3 s = spec.start_position;
  // A workspace this small puts every goal within tolerance of the start pose.
  spec.workspace = {{s[0] - 0.01, s[1] - 0.01, s[2] - 0.01}, {s[0] + 0.01, s[1] + 0.01, s[2] + 0.01}};
  ag::AgentConfig cfg;
  cfg.actor_layers = cfg.critic_layers = {8};
  ag::DdpgAgent agent(spec.state_dim(), spec.action_dim, cfg, 1);
  nn::for_each_parameter(agent.actor(), [](double& p) { p = 0.0; });
  const auto ev = bn::evaluate(agent, spec, 5, 9);
  EXPECT_EQ(ev.success_rate, 1.0);
  EXPECT_EQ(ev.mean_return, 0.0);
}

TEST(Evaluate, ThreeOfFourIsExactlyThreeQuarters) {
  const env::TaskSpec spec = env::TaskSpec::defaults(env::Task::Reach);
  const std::size_t od = spec.observation_dim();
  int episode = -1;
  // Steers straight at the goal, except in the fourth episode where it stands still.
  const bn::Policy policy = [&](std::span<const double> s) {
    if (s[od - 1] == 1.0) ++episode;
    std::vector<double> a(4, 0.0);
    if (episode == 3) return a;
    const double gain = spec.max_speed * spec.dt;
    for (int i = 0; i < 3; ++i) a[i] = std::clamp((s[od + 3 + i] - s[i]) / gain, -1.0, 1.0);
    return a;
  };
  // Seed chosen so the fourth goal is out of tolerance of the start pose.
  std::uint64_t seed = 0;
  for (;; ++seed) {
    env::Rng rng(seed);
    env::ResetResult r{};
    for (int e = 0; e < 4; ++e) r = env::reset(spec, rng);
    if (env::distance(r.state.desired_goal, spec.start_position) > 0.1) break;
  }
  const auto ev = bn::evaluate_policy(policy, spec, 4, seed);
  EXPECT_EQ(ev.success_rate, 0.75);
}

TEST(Evaluate, RejectsZeroEpisodes) {
  const env::TaskSpec spec = env::TaskSpec::defaults(env::Task::Reach);
  std::mt19937_64 rng(1);
  EXPECT_THROW(bn::evaluate_policy(bn::random_policy(rng), spec, 0, 1), std::invalid_argument);
}

// Independent Monte-Carlo model of a uniformly random controller on Reach: box workspace,
// fixed start, per-axis displacement speed*dt*u with u ~ U(-1, 1), clamped to the box,
// success when the final effector position is strictly within tolerance of the goal.
double reach_random_baseline(std::size_t episodes, std::uint64_t seed) {
  const double lo[3] = {-0.1, -0.1, 0.0}, hi[3] = {0.1, 0.1, 0.2};
  const double start[3] = {0.0, 0.0, 0.1};
  const double gain = 0.6 * 0.05, tol = 0.05;
  std::mt19937 rng(static_cast<std::uint32_t>(seed));
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::size_t hits = 0;
  for (std::size_t e = 0; e < episodes; ++e) {
    double g[3], p[3];
    for (int i = 0; i < 3; ++i) {
      g[i] = lo[i] + (hi[i] - lo[i]) * (u(rng) + 1.0) / 2.0;
      p[i] = start[i];
    }
    for (int t = 0; t < 50; ++t)
      for (int i = 0; i < 3; ++i) p[i] = std::min(hi[i], std::max(lo[i], p[i] + gain * u(rng)));
    const double d = std::sqrt((p[0] - g[0]) * (p[0] - g[0]) + (p[1] - g[1]) * (p[1] - g[1]) + (p[2] - g[2]) * (p[2] - g[2]));
    hits += d < tol;
  }
  return static_cast<double>(hits) / static_cast<double>(episodes);
}

TEST(Evaluate, RandomPolicyMatchesMonteCarloBaseline) {
  const double oracle = reach_random_baseline(200000, 12345);
  EXPECT_GT(oracle, 0.01);
  EXPECT_LT(oracle, 0.2);
  const env::TaskSpec spec = env::TaskSpec::defaults(env::Task::Reach);
  std::mt19937_64 rng(77);
  const auto ev = bn::evaluate_policy(bn::random_policy(rng), spec, 1000, 2024);
  EXPECT_NEAR(ev.success_rate, oracle, 0.03);
  RecordProperty("oracle_success", std::to_string(oracle));
  RecordProperty("evaluated_success", std::to_string(ev.success_rate));
}

// ---- CSV ----

TEST(Csv, HeaderRowsAndFormat) {
  const std::vector<bn::EpochReport> rs = {report(1, 0.75, -31.25, 1.2418, 500), report(2, 1.0, 0.0, 0.5, 1000)};
  const std::string text = bn::csv_text(rs);
  EXPECT_EQ(count(text, "\n"), 3u);
  EXPECT_EQ(text.back(), '\n');
  EXPECT_EQ(text.substr(0, text.find('\n')), "epoch,success_rate,mean_return,wall_clock_s,env_steps");
  EXPECT_NE(text.find("\n1,0.750000,-31.2500,1.24180,500\n"), std::string::npos);
  EXPECT_EQ(bn::format_real(0.75), "0.750000");
  EXPECT_EQ(bn::format_real(-45.0), "-45.0000");
}

TEST(Csv, FileRoundTrip) {
  const fs::path dir = scratch_dir("csv");
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<bn::EpochReport> rs;
  for (std::size_t k = 1; k <= 40; ++k)
    rs.push_back(report(k, std::round(u(rng) * 20) / 20, -50.0 * u(rng), 0.01 + 3 * u(rng), k * 500));
  bn::write_csv(rs, dir / "a.csv");
  const auto back = bn::read_csv(dir / "a.csv");
  ASSERT_EQ(back.size(), rs.size());
  for (std::size_t k = 0; k < rs.size(); ++k) {
    EXPECT_EQ(back[k].epoch, rs[k].epoch);
    EXPECT_EQ(back[k].env_steps, rs[k].env_steps);
    EXPECT_NEAR(back[k].success_rate, rs[k].success_rate, 5e-6 * std::abs(rs[k].success_rate) + 1e-12);
    EXPECT_NEAR(back[k].mean_return, rs[k].mean_return, 5e-6 * std::abs(rs[k].mean_return));
    EXPECT_NEAR(back[k].wall_clock_seconds, rs[k].wall_clock_seconds, 5e-6 * rs[k].wall_clock_seconds);
  }
  bn::write_csv(back, dir / "b.csv");
  EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
}

TEST(Csv, ErrorsNameThePath) {
  const fs::path dir = scratch_dir("csv_err");
  const fs::path missing = dir / "no" / "such" / "x.csv";
  try {
    bn::write_csv(std::vector<bn::EpochReport>{report(1, 0.5)}, missing);
    FAIL() << "expected a throw";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find(missing.string()), std::string::npos);
  }
  std::istringstream bad_header("epoch,success\n1,0.5\n");
  EXPECT_THROW(bn::parse_csv(bad_header), std::runtime_error);
  std::istringstream bad_field("epoch,success_rate,mean_return,wall_clock_s,env_steps\n1,zero,0,1,50\n");
  EXPECT_THROW(bn::parse_csv(bad_field), std::runtime_error);
}

// ---- comparison ----

TEST(Compare, SortsByTotalTime) {
  std::vector<bn::RunSummary> rows = {{"sac", env::Task::Push, 140, 0.5, 0.5},
                                      {"ddpg", env::Task::Push, 100, 0.9, 0.8},
                                      {"td3", env::Task::Push, 120, 0.7, 0.6}};
  const std::string t = bn::format_comparison(rows);
  const auto d = t.find("ddpg"), td = t.find("td3"), s = t.find("sac");
  ASSERT_NE(d, std::string::npos);
  EXPECT_LT(d, td);
  EXPECT_LT(td, s);
  EXPECT_NE(t.find("100.00"), std::string::npos);
  EXPECT_EQ(count(t, "\n"), 4u);
}

TEST(Compare, IdenticalInputsGiveIdenticalRows) {
  const bn::RunSummary a{"x", env::Task::Reach, 10, 1, 1};
  const std::string t = bn::format_comparison({a, a});
  std::istringstream in(t);
  std::string header, r1, r2;
  std::getline(in, header);
  std::getline(in, r1);
  std::getline(in, r2);
  EXPECT_EQ(r1, r2);
}

TEST(Compare, RejectsMismatchedOrTooFew) {
  EXPECT_THROW(bn::format_comparison({{"a", env::Task::Reach, 1, 1, 1}}), std::invalid_argument);
  EXPECT_THROW(bn::format_comparison({{"a", env::Task::Reach, 1, 1, 1}, {"b", env::Task::Push, 1, 1, 1}}),
               std::invalid_argument);
}

TEST(Compare, SummaryFromFiles) {
  const fs::path dir = scratch_dir("compare");
  std::vector<bn::EpochReport> slow, fast;
  for (std::size_t k = 1; k <= 12; ++k) {
    slow.push_back(report(k, k <= 2 ? 0.0 : 0.5, -1, 2.0, k * 100));
    fast.push_back(report(k, k == 12 ? 1.0 : 0.0, -1, 1.0, k * 100));
  }
  bn::write_csv(slow, dir / "sac_slide_seed1.csv");
  bn::write_csv(fast, dir / "ddpg_slide_seed1.csv");
  const auto s = bn::summarize_file(dir / "sac_slide_seed1.csv");
  EXPECT_NEAR(s.total_seconds, 24.0, 1e-9);
  EXPECT_DOUBLE_EQ(s.last10_success, 0.5);
  const std::string t = bn::compare_runs({dir / "sac_slide_seed1.csv", dir / "ddpg_slide_seed1.csv"});
  EXPECT_LT(t.find("ddpg_slide_seed1"), t.find("sac_slide_seed1"));
  EXPECT_NE(t.find("0.100"), std::string::npos);  // ddpg last-10 mean
  bn::write_csv(fast, dir / "notarun.csv");
  EXPECT_THROW(bn::summarize_file(dir / "notarun.csv"), std::runtime_error);
}

TEST(RunName, ParsesStems) {
  const auto n = bn::parse_run_name("td3_pickplace_seed42");
  ASSERT_TRUE(n.has_value());
  EXPECT_EQ(n->algorithm, ag::Algorithm::TD3);
  EXPECT_EQ(n->task, env::Task::PickPlace);
  EXPECT_EQ(n->seed, 42u);
  EXPECT_FALSE(bn::parse_run_name("td3_pickplace").has_value());
  EXPECT_FALSE(bn::parse_run_name("dqpg_push_seed1").has_value());
  EXPECT_FALSE(bn::parse_run_name("td3_push_seedx").has_value());
}

// ---- SVG ----

TEST(Svg, SingleEpochSinglePolyline) {
  const std::string svg = bn::svg_chart({{"ddpg_reach_seed1", env::Task::Reach, {report(1, 0.5)}}});
  EXPECT_EQ(count(svg, "<polyline"), 1u);
  const auto p = svg.find("points=\"") + 8;
  const std::string pts = svg.substr(p, svg.find('"', p) - p);
  EXPECT_EQ(count(pts, ","), 1u);
  EXPECT_EQ(count(pts, " "), 0u);
  EXPECT_NE(svg.find("version=\"1.1\""), std::string::npos);
}

TEST(Svg, ThreeRunsThreeLinesThreeLegendEntries) {
  std::vector<bn::ChartSeries> s;
  for (const char* name : {"ddpg_push_seed1", "td3_push_seed1", "sac_push_seed1"}) {
    bn::ChartSeries c{name, env::Task::Push, {}};
    for (std::size_t k = 1; k <= 5; ++k) c.reports.push_back(report(k, 0.2 * static_cast<double>(k)));
    s.push_back(c);
  }
  const std::string svg = bn::svg_chart(s);
  EXPECT_EQ(count(svg, "<polyline"), 3u);
  EXPECT_EQ(count(svg, "class=\"legend-entry\""), 3u);
  for (const auto& c : s) EXPECT_NE(svg.find(">" + c.label + "<"), std::string::npos);
}

TEST(Svg, PointsSpanTheAxes) {
  // success 0 at epoch 0 is the plot origin; success 1 at the last epoch the top-right corner
  const std::string svg = bn::svg_chart({{"a", env::Task::Reach, {report(1, 1.0), report(2, 1.0)}}});
  EXPECT_NE(svg.find("points=\"305.00,40.00 550.00,40.00\""), std::string::npos) << svg;
}

TEST(Svg, RejectsMismatchedRuns) {
  const bn::ChartSeries reach{"a", env::Task::Reach, {report(1, 0.5)}};
  const bn::ChartSeries push{"b", env::Task::Push, {report(1, 0.5)}};
  const bn::ChartSeries longer{"c", env::Task::Reach, {report(1, 0.5), report(2, 0.5)}};
  EXPECT_THROW(bn::svg_chart({reach, push}), std::invalid_argument);
  EXPECT_THROW(bn::svg_chart({reach, longer}), std::invalid_argument);
  EXPECT_THROW(bn::svg_chart({}), std::invalid_argument);
}

TEST(Svg, EscapesLabels) {
  const std::string svg = bn::svg_chart({{"a<b&c", env::Task::Reach, {report(1, 0.5)}}});
  EXPECT_NE(svg.find("a&lt;b&amp;c"), std::string::npos);
}

// ---- config files ----

TEST(ConfigFile, AppliesKnownKeys) {
  std::istringstream in(
      "# desk overrides\n"
      "gamma = 0.95\n"
      "actor_layers = 32, 32\n"
      "batch_size=64   # trailing comment\n"
      "friction = 0.3\n"
      "epochs = 7\n"
      "relabeling_enabled = true\n"
      "seed = 11\n"
      "algorithm = sac\n");
  const auto cf = bn::parse_config(in, "test.cfg");
  auto c = bn::make_run_config(bn::Profile::Desk, ag::Algorithm::SAC, env::Task::Push, 0);
  bn::apply_config(cf, c);
  EXPECT_DOUBLE_EQ(c.agent_config.gamma, 0.95);
  EXPECT_EQ(c.agent_config.actor_layers, (std::vector<std::size_t>{32, 32}));
  EXPECT_EQ(c.agent_config.batch_size, 64u);
  EXPECT_DOUBLE_EQ(c.task_spec.friction, 0.3);
  EXPECT_EQ(c.epochs, 7u);
  EXPECT_TRUE(c.relabeling_enabled);
  EXPECT_EQ(c.seed, 11u);
  EXPECT_EQ(cf.value("algorithm"), "sac");
}

TEST(ConfigFile, ErrorsCarryLineNumbers) {
  const auto error_of = [](const std::string& text) -> std::string {
    std::istringstream in(text);
    try {
      auto c = bn::make_run_config(bn::Profile::Desk, ag::Algorithm::DDPG, env::Task::Reach, 0);
      bn::apply_config(bn::parse_config(in, "f.cfg"), c);
    } catch (const std::invalid_argument& e) {
      return e.what();
    }
    return "";
  };
  EXPECT_NE(error_of("gamma = 0.9\nlearning_rate = 1\n").find("f.cfg:2: unknown key 'learning_rate'"),
            std::string::npos);
  EXPECT_NE(error_of("gamma = fast\n").find("f.cfg:1"), std::string::npos);
  EXPECT_NE(error_of("epochs = -3\n").find("f.cfg:1"), std::string::npos);
  EXPECT_NE(error_of("just words\n").find("f.cfg:1"), std::string::npos);
  EXPECT_NE(error_of("seed = 1\nseed = 2\n").find("duplicate"), std::string::npos);
  EXPECT_NE(error_of("relabeling_enabled = maybe\n").find("true or false"), std::string::npos);
}
