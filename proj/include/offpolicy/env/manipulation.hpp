#pragma once

#include <algorithm>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "offpolicy/env/reward.hpp"
#include "offpolicy/env/task.hpp"

namespace offpolicy::env {

using Rng = std::mt19937_64;

struct EnvState {
  Vec3 effector_position{};
  Vec3 effector_velocity{};
  double gripper_open = 1.0;
  Vec3 object_position{};
  Vec3 object_velocity{};
  bool grasped = false;
  Vec3 desired_goal{};
  std::size_t step_index = 0;

  bool operator==(const EnvState&) const = default;
};

struct GoalObservation {
  std::vector<double> observation;
  Vec3 achieved_goal{};
  Vec3 desired_goal{};

  /// observation ++ achieved_goal ++ desired_goal, the vector fed to the networks.
  std::vector<double> network_input() const {
    std::vector<double> v = observation;
    v.insert(v.end(), achieved_goal.begin(), achieved_goal.end());
    v.insert(v.end(), desired_goal.begin(), desired_goal.end());
    return v;
  }
};

inline Vec3 achieved_goal(const EnvState& s, const TaskSpec& spec) {
  return spec.task == Task::Reach ? s.effector_position : s.object_position;
}

/// Observation layout: effector position (3), effector velocity (3), gripper opening (1),
/// then for every task except Reach object position (3), object velocity (3) and object position
/// relative to the effector (3), and last the
/// fraction of the episode remaining, 1 - step_index / horizon. Episodes end with d = 1 at the
/// horizon, so without the clock the final transition is not a function of the observation.
inline GoalObservation observe(const EnvState& s, const TaskSpec& spec) {
  GoalObservation o;
  o.observation.reserve(spec.observation_dim());
  o.observation.insert(o.observation.end(), s.effector_position.begin(), s.effector_position.end());
  o.observation.insert(o.observation.end(), s.effector_velocity.begin(), s.effector_velocity.end());
  o.observation.push_back(s.gripper_open);
  if (spec.task != Task::Reach) {
    o.observation.insert(o.observation.end(), s.object_position.begin(), s.object_position.end());
    o.observation.insert(o.observation.end(), s.object_velocity.begin(), s.object_velocity.end());
    const Vec3 rel = s.object_position - s.effector_position;
    o.observation.insert(o.observation.end(), rel.begin(), rel.end());
  }
  o.observation.push_back(1.0 - static_cast<double>(s.step_index) / static_cast<double>(spec.horizon));
  o.achieved_goal = achieved_goal(s, spec);
  o.desired_goal = s.desired_goal;
  return o;
}

struct ResetResult {
  EnvState state;
  GoalObservation observation;
};

namespace detail {

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

inline Vec3 table_point_near(Rng& rng, const Vec3& center, double half_width, const TaskSpec& spec) {
  Vec3 p{center[0] + uniform(rng, -half_width, half_width), center[1] + uniform(rng, -half_width, half_width),
         kTableHeight};
  return spec.workspace.clamp(p);
}

}  // namespace detail

/// Sampling regions, relative to the fixed start pose:
///  Reach     goal uniform over the (small) Reach workspace, no object.
///  Push      object uniform within +-object_range of the start on the table; goal within
///            +-goal_range of the object.
///  Slide     object just in front of the effector; goal uniform in goal_region, beyond the effector's reach.
///  PickPlace object and goal as Push, the goal lifted to z in [0.03, 0.15]
///            with probability 0.5, on the table otherwise.
inline ResetResult reset(const TaskSpec& spec, Rng& rng) {
  spec.validate();
  using detail::uniform;
  EnvState s;
  s.effector_position = spec.start_position;
  s.gripper_open = spec.task == Task::Push ? 0.0 : 1.0;
  const Vec3& start = spec.start_position;
  switch (spec.task) {
    case Task::Reach: {
      const Box& w = spec.workspace;
      s.desired_goal = {uniform(rng, w.lo[0], w.hi[0]), uniform(rng, w.lo[1], w.hi[1]), uniform(rng, w.lo[2], w.hi[2])};
      // No object in Reach; park it on the table under the start pose.
      s.object_position = {start[0], start[1], kTableHeight};
      break;
    }
    case Task::Push: {
      s.object_position = detail::table_point_near(rng, {start[0], start[1], kTableHeight}, spec.object_range, spec);
      s.desired_goal = detail::table_point_near(rng, s.object_position, spec.goal_range, spec);
      break;
    }
    case Task::Slide: {
      s.object_position = spec.workspace.clamp(
          {start[0] + uniform(rng, 0.1, 0.15), start[1] + uniform(rng, -0.05, 0.05), kTableHeight});
      const Box& g = spec.goal_region;
      s.desired_goal = spec.workspace.clamp(
          {uniform(rng, g.lo[0], g.hi[0]), uniform(rng, g.lo[1], g.hi[1]), uniform(rng, g.lo[2], g.hi[2])});
      break;
    }
    case Task::PickPlace: {
      s.object_position = detail::table_point_near(rng, {start[0], start[1], kTableHeight}, spec.object_range, spec);
      Vec3 g = detail::table_point_near(rng, s.object_position, spec.goal_range, spec);
      const bool in_air = uniform(rng, 0.0, 1.0) < 0.5;
      if (in_air) g[2] = uniform(rng, 0.03, 0.15);
      s.desired_goal = spec.workspace.clamp(g);
      break;
    }
  }
  return {s, observe(s, spec)};
}

struct StepResult {
  EnvState state;
  GoalObservation observation;
  double reward = -1.0;
  bool done = false;
};

inline void validate_action(std::span<const double> action, std::size_t action_dim) {
  if (action.size() != action_dim) {
    throw std::invalid_argument("step: action has " + std::to_string(action.size()) + " components, expected " +
                                std::to_string(action_dim));
  }
  for (double a : action) {
    if (!(a >= -1.0 && a <= 1.0)) throw std::invalid_argument("step: action component outside [-1, 1]");
  }
}

/// Advances one control step. Effector: position += max_speed * dt * action[0:3], clamped
/// to the workspace (the strike zone for Slide). Gripper opening = (action[3] + 1) / 2,
/// except Push where it is held closed. Object behaviour per task:
///  Push      while within contact_radius the object follows the effector's horizontal
///            displacement scaled by (1 - friction).
///  Slide     contact with a moving effector sets object velocity to strike_gain times the
///            effector's horizontal velocity; the object then coasts, position += velocity * dt,
///            and velocity *= (1 - friction) every step.
///  PickPlace a closing command (action[3] < 0) within grasp_radius grabs the object, which
///            then rides at effector + grasp_offset until the gripper opens and it drops to the table.
inline StepResult step(const EnvState& state, std::span<const double> action, const TaskSpec& spec) {
  validate_action(action, spec.action_dim);
  if (state.step_index >= spec.horizon) throw std::logic_error("step: episode already finished");

  EnvState s = state;
  const double gain = spec.max_speed * spec.dt;
  const Vec3 previous = s.effector_position;
  Vec3 target = previous + gain * Vec3{action[0], action[1], action[2]};
  target = spec.workspace.clamp(target);
  if (spec.task == Task::Slide) target = spec.strike_zone.clamp(target);
  s.effector_position = target;
  const Vec3 displacement = s.effector_position - previous;
  s.effector_velocity = (1.0 / spec.dt) * displacement;
  s.gripper_open = spec.task == Task::Push ? 0.0 : (action[3] + 1.0) / 2.0;

  const Vec3 object_before = s.object_position;
  switch (spec.task) {
    case Task::Reach:
      break;
    case Task::Push: {
      if (distance(s.effector_position, s.object_position) < spec.contact_radius) {
        const double k = 1.0 - spec.friction;
        s.object_position = spec.workspace.clamp(
            {s.object_position[0] + k * displacement[0], s.object_position[1] + k * displacement[1], kTableHeight});
      }
      s.object_velocity = (1.0 / spec.dt) * (s.object_position - object_before);
      break;
    }
    case Task::Slide: {
      const bool moving = norm(displacement) > 0.0;
      if (moving && distance(s.effector_position, s.object_position) < spec.contact_radius) {
        s.object_velocity = {spec.strike_gain * s.effector_velocity[0], spec.strike_gain * s.effector_velocity[1], 0.0};
      }
      Vec3 next = s.object_position + spec.dt * s.object_velocity;
      const Vec3 clamped = spec.workspace.clamp(next);
      for (int i = 0; i < 3; ++i) {
        if (clamped[i] != next[i]) s.object_velocity[i] = 0.0;
      }
      s.object_position = clamped;
      s.object_velocity = (1.0 - spec.friction) * s.object_velocity;
      break;
    }
    case Task::PickPlace: {
      const bool closing = action[3] < 0.0;
      if (!closing) {
        s.grasped = false;
      } else if (!s.grasped && distance(s.effector_position, s.object_position) < spec.grasp_radius) {
        s.grasped = true;
      }
      if (s.grasped) {
        s.object_position = spec.workspace.clamp(s.effector_position + spec.grasp_offset);
      } else {
        s.object_position[2] = kTableHeight;
      }
      s.object_velocity = (1.0 / spec.dt) * (s.object_position - object_before);
      break;
    }
  }

  s.step_index += 1;
  StepResult r;
  r.observation = observe(s, spec);
  r.reward = sparse_reward(r.observation.achieved_goal, r.observation.desired_goal, spec.goal_tolerance);
  r.done = s.step_index == spec.horizon;
  r.state = s;
  return r;
}

}  // namespace offpolicy::env
