#pragma once

#include <stdexcept>

#include "offpolicy/env/task.hpp"

namespace offpolicy::env {

/// 0 when the achieved goal lies strictly within `tolerance` of the desired goal, else -1.
inline double sparse_reward(const Vec3& achieved, const Vec3& desired, double tolerance) {
  if (!(tolerance > 0.0)) throw std::invalid_argument("sparse_reward: tolerance must be > 0");
  return distance(achieved, desired) < tolerance ? 0.0 : -1.0;
}

inline bool is_success(const Vec3& achieved, const Vec3& desired, double tolerance) {
  return sparse_reward(achieved, desired, tolerance) == 0.0;
}

}  // namespace offpolicy::env
