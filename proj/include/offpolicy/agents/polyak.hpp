#pragma once

#include <stdexcept>

#include "offpolicy/nn/mlp.hpp"

namespace offpolicy::agents {

/// target <- (1 - rho) * target + rho * online. rho weights the online network.
inline void polyak_update(nn::Mlp& target, const nn::Mlp& online, double rho) {
  if (!target.same_architecture(online)) throw std::invalid_argument("polyak_update: network shapes differ");
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("polyak_update: rho must be in (0, 1)");
  // Written as t + rho * (o - t) so that equal networks are an exact fixed point.
  for (std::size_t i = 0; i < target.num_layers(); ++i) {
    auto& tw = target.weights[i].data;
    const auto& ow = online.weights[i].data;
    for (std::size_t k = 0; k < tw.size(); ++k) tw[k] += rho * (ow[k] - tw[k]);
    auto& tb = target.biases[i];
    const auto& ob = online.biases[i];
    for (std::size_t k = 0; k < tb.size(); ++k) tb[k] += rho * (ob[k] - tb[k]);
  }
}

}  // namespace offpolicy::agents
