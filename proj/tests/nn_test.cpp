#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "offpolicy/nn/adam.hpp"
#include "offpolicy/nn/grad_check.hpp"
#include "offpolicy/nn/mlp.hpp"
#include "offpolicy/nn/serialize.hpp"

namespace nn = offpolicy::nn;

namespace {

// Independent central-difference gradient of sum_j g_j * f_j(x) with respect to every
// parameter, evaluated with mlp_forward only.
std::vector<double> numeric_param_grads(const nn::Mlp& net, const std::vector<double>& x,
                                        const std::vector<double>& g, double h) {
  auto objective = [&](const nn::Mlp& m) {
    auto out = nn::mlp_forward(m, x).output;
    double s = 0.0;
    for (std::size_t j = 0; j < out.size(); ++j) s += g[j] * out[j];
    return s;
  };
  std::vector<double> result;
  nn::Mlp probe = net;
  nn::for_each_parameter(probe, [&](double& p) {
    const double saved = p;
    p = saved + h;
    const double up = objective(probe);
    p = saved - h;
    const double down = objective(probe);
    p = saved;
    result.push_back((up - down) / (2 * h));
  });
  return result;
}

std::vector<double> flatten(const nn::ParamGrads& g) {
  std::vector<double> out;
  for (std::size_t i = 0; i < g.weights.size(); ++i) {
    out.insert(out.end(), g.weights[i].data.begin(), g.weights[i].data.end());
    out.insert(out.end(), g.biases[i].begin(), g.biases[i].end());
  }
  return out;
}

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

}  // namespace

TEST(MlpInit, DeterministicForSeed) {
  auto a = nn::mlp_init({4, 256, 256, 256, 1}, nn::OutputActivation::Identity, 7);
  auto b = nn::mlp_init({4, 256, 256, 256, 1}, nn::OutputActivation::Identity, 7);
  EXPECT_EQ(a.num_layers(), 4u);
  EXPECT_EQ(a, b);
  auto c = nn::mlp_init({4, 256, 256, 256, 1}, nn::OutputActivation::Identity, 8);
  EXPECT_NE(a, c);
}

TEST(MlpInit, RejectsDegenerateLayouts) {
  EXPECT_THROW(nn::mlp_init({3}, nn::OutputActivation::Identity, 1), std::invalid_argument);
  EXPECT_THROW(nn::mlp_init({}, nn::OutputActivation::Identity, 1), std::invalid_argument);
  EXPECT_THROW(nn::mlp_init({3, 0, 1}, nn::OutputActivation::Identity, 1), std::invalid_argument);
}

TEST(MlpInit, ZeroBiasesAndFanInBound) {
  auto net = nn::mlp_init({2, 2, 1}, nn::OutputActivation::Identity, 0);
  for (const auto& b : net.biases)
    for (double v : b) EXPECT_EQ(v, 0.0);
  auto wide = nn::mlp_init({9, 100, 1}, nn::OutputActivation::Identity, 3);
  for (double w : wide.weights[0].data) EXPECT_LE(std::abs(w), 1.0 / 3.0);
  for (double w : wide.weights[1].data) EXPECT_LE(std::abs(w), 0.1);
  EXPECT_EQ(wide.weights[0].rows, 100u);
  EXPECT_EQ(wide.weights[0].cols, 9u);
}

TEST(MlpForward, ZeroNetworkGivesZero) {
  for (auto head : {nn::OutputActivation::Identity, nn::OutputActivation::Tanh}) {
    auto net = nn::mlp_init({3, 5, 2}, head, 1);
    for (auto& w : net.weights) std::fill(w.data.begin(), w.data.end(), 0.0);
    auto out = nn::mlp_forward(net, std::vector<double>{0.3, -2.0, 7.0}).output;
    ASSERT_EQ(out.size(), 2u);
    EXPECT_EQ(out[0], 0.0);
    EXPECT_EQ(out[1], 0.0);
  }
}

TEST(MlpForward, SingleAffineUnit) {
  auto net = nn::mlp_init({1, 1}, nn::OutputActivation::Identity, 0);
  net.weights[0].data = {2.0};
  net.biases[0] = {0.5};
  EXPECT_DOUBLE_EQ(nn::mlp_forward(net, std::vector<double>{1.0}).output[0], 2.5);
}

TEST(MlpForward, DimensionMismatchThrows) {
  auto net = nn::mlp_init({3, 4, 1}, nn::OutputActivation::Identity, 0);
  EXPECT_THROW(nn::mlp_forward(net, std::vector<double>{1.0, 2.0}), std::invalid_argument);
}

TEST(MlpForward, TanhHeadStaysInsideOpenInterval) {
  std::mt19937_64 rng(11);
  auto net = nn::mlp_init({4, 16, 16, 3}, nn::OutputActivation::Tanh, 5);
  for (auto& w : net.weights)
    for (double& v : w.data) v *= 3.0;
  for (int trial = 0; trial < 200; ++trial) {
    auto out = nn::mlp_forward(net, random_vector(4, rng, -5, 5)).output;
    for (double v : out) {
      EXPECT_GT(v, -1.0);
      EXPECT_LT(v, 1.0);
    }
  }
}

TEST(MlpBackward, ZeroUpstreamGivesZeroGradients) {
  auto net = nn::mlp_init({3, 8, 2}, nn::OutputActivation::Tanh, 2);
  auto fr = nn::mlp_forward(net, std::vector<double>{0.1, 0.2, 0.3});
  auto bw = nn::mlp_backward(net, fr.cache, std::vector<double>{0.0, 0.0});
  for (double v : flatten(bw.grads)) EXPECT_EQ(v, 0.0);
  for (double v : bw.grad_input) EXPECT_EQ(v, 0.0);
}

TEST(MlpBackward, AffineUnitGradients) {
  auto net = nn::mlp_init({1, 1}, nn::OutputActivation::Identity, 0);
  net.weights[0].data = {-1.7};
  auto fr = nn::mlp_forward(net, std::vector<double>{0.8});
  auto bw = nn::mlp_backward(net, fr.cache, std::vector<double>{1.0});
  EXPECT_DOUBLE_EQ(bw.grads.weights[0].data[0], 0.8);
  EXPECT_DOUBLE_EQ(bw.grads.biases[0][0], 1.0);
  EXPECT_DOUBLE_EQ(bw.grad_input[0], -1.7);
}

TEST(MlpBackward, RejectsMismatchedCache) {
  auto a = nn::mlp_init({3, 8, 1}, nn::OutputActivation::Identity, 0);
  auto b = nn::mlp_init({3, 6, 1}, nn::OutputActivation::Identity, 0);
  auto fr = nn::mlp_forward(a, std::vector<double>{1, 2, 3});
  EXPECT_THROW(nn::mlp_backward(b, fr.cache, std::vector<double>{1.0}), std::invalid_argument);
  EXPECT_THROW(nn::mlp_backward(a, fr.cache, std::vector<double>{1.0, 2.0}), std::invalid_argument);
}

TEST(MlpBackward, MatchesCentralDifferencesOn3x16x1) {
  std::mt19937_64 rng(2024);
  int checked = 0;
  for (int trial = 0; trial < 20; ++trial) {
    auto net = nn::mlp_init({3, 16, 1}, nn::OutputActivation::Identity, 100 + trial);
    for (auto& b : net.biases)
      for (double& v : b) v = std::uniform_real_distribution<double>(-0.5, 0.5)(rng);
    auto x = random_vector(3, rng);
    if (nn::relu_kink_margin(net, x) < 1e-3) continue;
    const std::vector<double> g{1.0};
    auto fr = nn::mlp_forward(net, x);
    auto analytic = flatten(nn::mlp_backward(net, fr.cache, g).grads);
    auto numeric = numeric_param_grads(net, x, g, 1e-5);
    ASSERT_EQ(analytic.size(), numeric.size());
    double worst = 0.0;
    for (std::size_t k = 0; k < analytic.size(); ++k)
      worst = std::max(worst, nn::relative_error(analytic[k], numeric[k]));
    EXPECT_LE(worst, 1e-5) << "trial " << trial;
    ++checked;
  }
  EXPECT_GE(checked, 10);
}

TEST(MlpBackward, BatchSumsPerSampleGradients) {
  std::mt19937_64 rng(5);
  auto net = nn::mlp_init({4, 12, 12, 2}, nn::OutputActivation::Tanh, 9);
  std::vector<std::vector<double>> xs, gs;
  for (int i = 0; i < 6; ++i) {
    xs.push_back(random_vector(4, rng));
    gs.push_back(random_vector(2, rng));
  }
  auto cache = nn::mlp_forward_batch(net, nn::stack_rows(xs));
  auto batch = nn::mlp_backward_batch(net, cache, nn::stack_rows(gs));
  std::vector<double> summed(net.parameter_count(), 0.0);
  for (int i = 0; i < 6; ++i) {
    auto fr = nn::mlp_forward(net, xs[i]);
    auto single = nn::mlp_backward(net, fr.cache, gs[i]);
    auto flat = flatten(single.grads);
    for (std::size_t k = 0; k < flat.size(); ++k) summed[k] += flat[k];
    for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(batch.grad_input(i, k), single.grad_input[k], 1e-12);
  }
  auto flat_batch = flatten(batch.grads);
  for (std::size_t k = 0; k < summed.size(); ++k) EXPECT_NEAR(flat_batch[k], summed[k], 1e-12);

  auto input_only = nn::mlp_backward_batch(net, cache, nn::stack_rows(gs), false);
  EXPECT_TRUE(input_only.grads.weights.empty());
  EXPECT_EQ(input_only.grad_input, batch.grad_input);
}

TEST(GradCheck, ZeroNetworkZeroTarget) {
  auto net = nn::mlp_init({3, 4, 1}, nn::OutputActivation::Identity, 0);
  for (auto& w : net.weights) std::fill(w.data.begin(), w.data.end(), 0.0);
  nn::SquaredErrorLoss loss{{0.0}};
  EXPECT_LE(nn::grad_check(net, std::vector<double>{0.5, -0.5, 1.0}, loss), 1e-12);
}

TEST(GradCheck, Random4x8x8x1AwayFromKinks) {
  std::mt19937_64 rng(77);
  int checked = 0;
  for (int trial = 0; trial < 30 && checked < 10; ++trial) {
    auto net = nn::mlp_init({4, 8, 8, 1}, nn::OutputActivation::Identity, 300 + trial);
    auto x = random_vector(4, rng);
    if (nn::relu_kink_margin(net, x) < 1e-3) continue;
    nn::SquaredErrorLoss loss{{0.7}};
    EXPECT_LE(nn::grad_check(net, x, loss), 1e-5);
    ++checked;
  }
  EXPECT_EQ(checked, 10);
}

TEST(GradCheck, KinkInputIsDetectable) {
  // A hidden pre-activation of exactly zero is a ReLU kink; such inputs are excluded
  // from the gradient check rather than asserted on.
  auto net = nn::mlp_init({1, 1, 1}, nn::OutputActivation::Identity, 0);
  net.weights[0].data = {1.0};
  net.weights[1].data = {1.0};
  EXPECT_EQ(nn::relu_kink_margin(net, std::vector<double>{0.0}), 0.0);
}

TEST(GradCheck, NonFiniteReportedAsFailure) {
  auto net = nn::mlp_init({2, 3, 1}, nn::OutputActivation::Identity, 0);
  net.weights[0].data[0] = std::numeric_limits<double>::infinity();
  nn::SquaredErrorLoss loss{{0.0}};
  EXPECT_TRUE(std::isinf(nn::grad_check(net, std::vector<double>{1.0, 1.0}, loss)));
}

TEST(Adam, ZeroGradientIsIdentityOnParameters) {
  auto net = nn::mlp_init({3, 5, 2}, nn::OutputActivation::Identity, 4);
  auto before = net;
  auto state = nn::AdamState::for_network(net);
  for (int i = 0; i < 3; ++i) nn::adam_step(net, nn::ParamGrads::zeros_like(net), state, 0.1);
  EXPECT_EQ(net, before);
  EXPECT_EQ(state.step_count, 3u);
  EXPECT_TRUE(state.first_moment.congruent_with(net));
}

TEST(Adam, FirstStepMovesByLearningRate) {
  // t = 1: m = (1-b1) g, v = (1-b2) g^2, m_hat = g, v_hat = g^2, step = lr * g / (|g| + eps).
  auto net = nn::mlp_init({1, 1}, nn::OutputActivation::Identity, 0);
  net.weights[0].data = {0.0};
  auto state = nn::AdamState::for_network(net);
  auto g = nn::ParamGrads::zeros_like(net);
  g.weights[0].data = {1.0};
  nn::adam_step(net, g, state, 0.1);
  EXPECT_NEAR(net.weights[0].data[0], -0.1 / (1.0 + 1e-8), 1e-15);
  EXPECT_EQ(state.step_count, 1u);
}

TEST(Adam, ConstantPositiveGradientStrictlyDecreases) {
  auto net = nn::mlp_init({1, 1}, nn::OutputActivation::Identity, 0);
  auto state = nn::AdamState::for_network(net);
  auto g = nn::ParamGrads::zeros_like(net);
  g.weights[0].data = {0.37};
  double prev = net.weights[0].data[0];
  for (int i = 0; i < 50; ++i) {
    nn::adam_step(net, g, state, 1e-3);
    EXPECT_LT(net.weights[0].data[0], prev);
    prev = net.weights[0].data[0];
  }
}

TEST(Adam, RejectsNonFiniteAndMismatchedGradients) {
  auto net = nn::mlp_init({2, 2}, nn::OutputActivation::Identity, 0);
  auto state = nn::AdamState::for_network(net);
  auto g = nn::ParamGrads::zeros_like(net);
  g.biases[0][1] = std::nan("");
  auto before = net;
  EXPECT_THROW(nn::adam_step(net, g, state, 0.1), std::domain_error);
  EXPECT_EQ(net, before);
  EXPECT_EQ(state.step_count, 0u);
  auto other = nn::ParamGrads::zeros_like(nn::mlp_init({2, 3}, nn::OutputActivation::Identity, 0));
  EXPECT_THROW(nn::adam_step(net, other, state, 0.1), std::invalid_argument);
}

TEST(Snapshot, RoundTripIsBitExact) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 5; ++trial) {
    auto net = nn::mlp_init({3, 7, 5, 2}, trial % 2 ? nn::OutputActivation::Tanh : nn::OutputActivation::Identity,
                            trial);
    for (auto& b : net.biases)
      for (double& v : b) v = std::normal_distribution<double>(0, 1e3)(rng);
    net.weights[0].data[0] = -0.0;
    net.weights[1].data[0] = std::numeric_limits<double>::denorm_min();
    auto bytes = nn::snapshot_bytes(net);
    auto back = nn::snapshot_from_bytes(bytes);
    EXPECT_EQ(nn::snapshot_bytes(back), bytes);
    EXPECT_TRUE(std::signbit(back.weights[0].data[0]));
    EXPECT_EQ(back.layer_sizes, net.layer_sizes);
    EXPECT_EQ(back.output_activation, net.output_activation);
  }
}

TEST(Snapshot, HeaderLayout) {
  auto net = nn::mlp_init({2, 3}, nn::OutputActivation::Tanh, 0);
  auto bytes = nn::snapshot_bytes(net);
  EXPECT_EQ(bytes.substr(0, 8), "OPMLPSNP");
  // magic + version + count + 2 sizes + 2 enum bytes + 6 weights + 3 biases
  EXPECT_EQ(bytes.size(), 8u + 4 + 8 + 16 + 2 + 8 * 9);
}

TEST(Snapshot, RejectsCorruptInput) {
  auto bytes = nn::snapshot_bytes(nn::mlp_init({2, 3}, nn::OutputActivation::Tanh, 0));
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(nn::snapshot_from_bytes(bad_magic), std::runtime_error);
  auto bad_version = bytes;
  bad_version[8] = 9;
  EXPECT_THROW(nn::snapshot_from_bytes(bad_version), std::runtime_error);
  EXPECT_THROW(nn::snapshot_from_bytes(bytes.substr(0, bytes.size() - 1)), std::runtime_error);
}

TEST(Snapshot, AdamStateRoundTrip) {
  auto net = nn::mlp_init({2, 4, 1}, nn::OutputActivation::Identity, 3);
  auto state = nn::AdamState::for_network(net);
  auto g = nn::ParamGrads::zeros_like(net);
  g.weights[0].data[1] = 0.25;
  nn::adam_step(net, g, state, 0.01);
  std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
  nn::write_adam_state(ss, net, state);
  EXPECT_EQ(nn::read_adam_state(ss), state);
}
