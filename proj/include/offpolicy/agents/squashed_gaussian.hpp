#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "offpolicy/nn/matrix.hpp"

namespace offpolicy::agents {

inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;

/// log(1 + exp(x)) without overflow.
inline double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

/// log(1 - tanh(u)^2), evaluated as 2 (log 2 - u - softplus(-2u)), finite for every finite u.
inline double log_tanh_jacobian(double u) { return 2.0 * (std::numbers::ln2 - u - softplus(-2.0 * u)); }

/// The same quantity evaluated literally; underflows to -inf once tanh(u) rounds to +-1.
inline double log_tanh_jacobian_naive(double u) {
  const double t = std::tanh(u);
  return std::log(1.0 - t * t);
}

/// tanh kept strictly inside (-1, 1).
inline double squash(double u) {
  constexpr double kBelowOne = 1.0 - 0x1p-53;
  return std::clamp(std::tanh(u), -kBelowOne, kBelowOne);
}

/// Log-density of a = tanh(u) where u ~ N(mean, exp(log_std)^2), per-dimension independent.
inline double sac_log_prob(std::span<const double> mean, std::span<const double> log_std,
                           std::span<const double> pre_squash) {
  if (mean.size() != log_std.size() || mean.size() != pre_squash.size()) {
    throw std::invalid_argument("sac_log_prob: dimension mismatch");
  }
  constexpr double kHalfLog2Pi = 0.91893853320467274178;
  double lp = 0.0;
  for (std::size_t i = 0; i < mean.size(); ++i) {
    const double ls = std::clamp(log_std[i], kLogStdMin, kLogStdMax);
    const double z = (pre_squash[i] - mean[i]) / std::exp(ls);
    lp += -0.5 * z * z - ls - kHalfLog2Pi - log_tanh_jacobian(pre_squash[i]);
  }
  return lp;
}

/// Policy network output (mean ++ raw log_std per row) split and clamped.
struct GaussianHead {
  nn::Matrix mean;
  nn::Matrix log_std;
  /// 1 where the raw log_std was inside the clamp range (gradient passes), else 0.
  nn::Matrix log_std_active;
};

inline GaussianHead split_gaussian_head(const nn::Matrix& policy_output, std::size_t action_dim) {
  if (policy_output.cols != 2 * action_dim) throw std::invalid_argument("policy output width must be 2 * action_dim");
  GaussianHead h{nn::Matrix(policy_output.rows, action_dim), nn::Matrix(policy_output.rows, action_dim),
                 nn::Matrix(policy_output.rows, action_dim)};
  for (std::size_t r = 0; r < policy_output.rows; ++r) {
    for (std::size_t j = 0; j < action_dim; ++j) {
      h.mean(r, j) = policy_output(r, j);
      const double raw = policy_output(r, action_dim + j);
      h.log_std(r, j) = std::clamp(raw, kLogStdMin, kLogStdMax);
      h.log_std_active(r, j) = (raw >= kLogStdMin && raw <= kLogStdMax) ? 1.0 : 0.0;
    }
  }
  return h;
}

/// Reparameterized sample: u = mean + std * noise, action = tanh(u), with log pi(action).
struct SquashedSample {
  nn::Matrix pre_squash;
  nn::Matrix actions;
  std::vector<double> log_prob;
};

inline SquashedSample squashed_sample(const GaussianHead& head, const nn::Matrix& noise) {
  if (!noise.same_shape(head.mean)) throw std::invalid_argument("squashed_sample: noise shape mismatch");
  SquashedSample s{nn::Matrix(noise.rows, noise.cols), nn::Matrix(noise.rows, noise.cols),
                   std::vector<double>(noise.rows)};
  for (std::size_t r = 0; r < noise.rows; ++r) {
    for (std::size_t j = 0; j < noise.cols; ++j) {
      const double u = head.mean(r, j) + std::exp(head.log_std(r, j)) * noise(r, j);
      s.pre_squash(r, j) = u;
      s.actions(r, j) = squash(u);
    }
    s.log_prob[r] = sac_log_prob(head.mean.row(r), head.log_std.row(r), s.pre_squash.row(r));
  }
  return s;
}

template <typename Urbg>
nn::Matrix standard_normal(std::size_t rows, std::size_t cols, Urbg& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  nn::Matrix m(rows, cols);
  for (double& v : m.data) v = n(rng);
  return m;
}

}  // namespace offpolicy::agents
