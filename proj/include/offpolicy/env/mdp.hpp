#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace offpolicy::env {

/// Finite MDP with dense tables. transition[(s * n_actions + a) * n_states + s2] = P(s2 | s, a),
/// reward[s * n_actions + a] = r(s, a).
struct DiscreteMdp {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  std::vector<double> transition;
  std::vector<double> reward;
  double gamma = 0.9;

  DiscreteMdp() = default;
  DiscreteMdp(std::size_t states, std::size_t actions, double discount)
      : n_states(states),
        n_actions(actions),
        transition(states * actions * states, 0.0),
        reward(states * actions, 0.0),
        gamma(discount) {}

  double& p(std::size_t s, std::size_t a, std::size_t s2) { return transition[(s * n_actions + a) * n_states + s2]; }
  double p(std::size_t s, std::size_t a, std::size_t s2) const {
    return transition[(s * n_actions + a) * n_states + s2];
  }
  double& r(std::size_t s, std::size_t a) { return reward[s * n_actions + a]; }
  double r(std::size_t s, std::size_t a) const { return reward[s * n_actions + a]; }

  void validate(double row_tolerance = 1e-9) const {
    if (n_states == 0 || n_actions == 0) throw std::invalid_argument("DiscreteMdp: empty state or action set");
    if (transition.size() != n_states * n_actions * n_states || reward.size() != n_states * n_actions) {
      throw std::invalid_argument("DiscreteMdp: table sizes do not match dimensions");
    }
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("DiscreteMdp: gamma outside [0, 1]");
    for (std::size_t s = 0; s < n_states; ++s) {
      for (std::size_t a = 0; a < n_actions; ++a) {
        double sum = 0.0;
        for (std::size_t s2 = 0; s2 < n_states; ++s2) {
          const double v = p(s, a, s2);
          if (v < 0.0 || !std::isfinite(v)) throw std::invalid_argument("DiscreteMdp: invalid transition probability");
          sum += v;
        }
        if (std::abs(sum - 1.0) > row_tolerance) {
          throw std::invalid_argument("DiscreteMdp: transition row (" + std::to_string(s) + ", " + std::to_string(a) +
                                      ") sums to " + std::to_string(sum));
        }
      }
    }
  }
};

struct QTable {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  std::vector<double> values;

  QTable() = default;
  QTable(std::size_t s, std::size_t a) : n_states(s), n_actions(a), values(s * a, 0.0) {}

  double& operator()(std::size_t s, std::size_t a) { return values[s * n_actions + a]; }
  double operator()(std::size_t s, std::size_t a) const { return values[s * n_actions + a]; }

  double state_value(std::size_t s) const {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < n_actions; ++a) best = std::max(best, (*this)(s, a));
    return best;
  }
};

/// (BQ)(s, a) = r(s, a) + gamma * sum_s2 P(s2 | s, a) max_a2 Q(s2, a2)
inline QTable bellman_backup(const DiscreteMdp& mdp, const QTable& q) {
  std::vector<double> v(mdp.n_states);
  for (std::size_t s = 0; s < mdp.n_states; ++s) v[s] = q.state_value(s);
  QTable out(mdp.n_states, mdp.n_actions);
  for (std::size_t s = 0; s < mdp.n_states; ++s) {
    for (std::size_t a = 0; a < mdp.n_actions; ++a) {
      double expected = 0.0;
      for (std::size_t s2 = 0; s2 < mdp.n_states; ++s2) expected += mdp.p(s, a, s2) * v[s2];
      out(s, a) = mdp.r(s, a) + mdp.gamma * expected;
    }
  }
  return out;
}

inline double bellman_residual(const DiscreteMdp& mdp, const QTable& q) {
  QTable b = bellman_backup(mdp, q);
  double worst = 0.0;
  for (std::size_t k = 0; k < q.values.size(); ++k) worst = std::max(worst, std::abs(b.values[k] - q.values[k]));
  return worst;
}

/// Iterates Q <- BQ from zero until successive iterates differ by at most `tolerance`
/// in the max norm. The returned table then has Bellman residual <= gamma * tolerance.
inline QTable value_iteration(const DiscreteMdp& mdp, double tolerance, std::size_t max_iterations = 1'000'000) {
  if (!(tolerance > 0.0)) throw std::invalid_argument("value_iteration: tolerance must be > 0");
  mdp.validate();
  QTable q(mdp.n_states, mdp.n_actions);
  for (std::size_t it = 0; it < max_iterations; ++it) {
    QTable next = bellman_backup(mdp, q);
    double delta = 0.0;
    for (std::size_t k = 0; k < q.values.size(); ++k) delta = std::max(delta, std::abs(next.values[k] - q.values[k]));
    q = std::move(next);
    if (delta <= tolerance) return q;
  }
  throw std::runtime_error("value_iteration: no convergence within iteration budget");
}

}  // namespace offpolicy::env
