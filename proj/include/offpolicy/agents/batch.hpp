#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "offpolicy/nn/matrix.hpp"
#include "offpolicy/replay/replay_buffer.hpp"

namespace offpolicy::agents {

/// Minibatch packed row-wise for the networks.
struct Batch {
  nn::Matrix states;
  nn::Matrix actions;
  std::vector<double> rewards;
  nn::Matrix next_states;
  std::vector<double> terminals;

  std::size_t size() const { return rewards.size(); }
};

inline Batch make_batch(std::span<const replay::Transition> transitions) {
  if (transitions.empty()) throw std::invalid_argument("make_batch: empty batch");
  const std::size_t n = transitions.size();
  const std::size_t ds = transitions.front().state.size();
  const std::size_t da = transitions.front().action.size();
  Batch b;
  b.states = nn::Matrix(n, ds);
  b.next_states = nn::Matrix(n, ds);
  b.actions = nn::Matrix(n, da);
  b.rewards.resize(n);
  b.terminals.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& t = transitions[i];
    if (t.state.size() != ds || t.next_state.size() != ds || t.action.size() != da) {
      throw std::invalid_argument("make_batch: transitions differ in shape");
    }
    std::copy(t.state.begin(), t.state.end(), b.states.row(i).begin());
    std::copy(t.next_state.begin(), t.next_state.end(), b.next_states.row(i).begin());
    std::copy(t.action.begin(), t.action.end(), b.actions.row(i).begin());
    b.rewards[i] = t.reward;
    b.terminals[i] = t.terminal ? 1.0 : 0.0;
  }
  return b;
}

}  // namespace offpolicy::agents
