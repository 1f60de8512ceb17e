#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace offpolicy::env {

using Vec3 = std::array<double, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline double norm(const Vec3& a) { return std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]); }
inline double distance(const Vec3& a, const Vec3& b) { return norm(a - b); }

/// Axis-aligned box [lo, hi] per axis.
struct Box {
  Vec3 lo{};
  Vec3 hi{};

  bool contains(const Vec3& p) const {
    for (int i = 0; i < 3; ++i)
      if (p[i] < lo[i] || p[i] > hi[i]) return false;
    return true;
  }
  Vec3 clamp(const Vec3& p) const {
    return {std::clamp(p[0], lo[0], hi[0]), std::clamp(p[1], lo[1], hi[1]), std::clamp(p[2], lo[2], hi[2])};
  }
  bool valid() const { return lo[0] <= hi[0] && lo[1] <= hi[1] && lo[2] <= hi[2]; }
};

enum class Task : std::uint8_t { Reach = 0, Push = 1, Slide = 2, PickPlace = 3 };

inline constexpr std::array<Task, 4> kAllTasks{Task::Reach, Task::Push, Task::Slide, Task::PickPlace};

inline std::string_view to_string(Task t) {
  switch (t) {
    case Task::Reach: return "reach";
    case Task::Push: return "push";
    case Task::Slide: return "slide";
    case Task::PickPlace: return "pickplace";
  }
  return "unknown";
}

inline std::optional<Task> parse_task(std::string_view s) {
  for (Task t : kAllTasks)
    if (s == to_string(t)) return t;
  if (s == "pick_place" || s == "pick-place") return Task::PickPlace;
  return std::nullopt;
}

/// Height of the table surface; resting objects sit at this z.
inline constexpr double kTableHeight = 0.0;

/// Static description of one task. Geometry is in distance units (think metres),
/// time in seconds. The effector moves by `max_speed * dt * action` per step.
struct TaskSpec {
  Task task = Task::Reach;
  std::size_t horizon = 50;
  double goal_tolerance = 0.05;
  Box workspace{{-0.3, -0.3, 0.0}, {0.3, 0.3, 0.3}};
  double dt = 0.05;
  double friction = 0.0;
  std::size_t action_dim = 4;

  double max_speed = 0.6;
  Vec3 start_position{0.0, 0.0, 0.1};
  /// Effector-object distance below which they interact (Push/Slide).
  double contact_radius = 0.05;
  /// Effector-object distance below which a closing gripper grabs (PickPlace).
  double grasp_radius = 0.04;
  /// Grasped object position = effector position + grasp_offset.
  Vec3 grasp_offset{0.0, 0.0, 0.0};
  /// Slide: object velocity set on contact = strike_gain * effector velocity.
  double strike_gain = 3.0;
  /// Push/PickPlace: object drawn within +-object_range of the start pose on the table,
  /// goal within +-goal_range of the object.
  double object_range = 0.1;
  double goal_range = 0.15;
  /// Slide: region the effector is confined to.
  Box strike_zone{{-0.3, -0.1, 0.0}, {0.0, 0.1, 0.1}};
  /// Slide: goals are drawn uniformly from this box.
  Box goal_region{{0.45, -0.15, kTableHeight}, {0.70, 0.15, kTableHeight}};

  static TaskSpec defaults(Task task) {
    TaskSpec s;
    s.task = task;
    switch (task) {
      case Task::Reach:
        s.workspace = {{-0.1, -0.1, 0.0}, {0.1, 0.1, 0.2}};
        break;
      case Task::Push:
        s.start_position = {0.0, 0.0, 0.02};
        s.friction = 0.2;
        s.contact_radius = 0.08;
        s.object_range = 0.05;
        break;
      case Task::Slide:
        s.workspace = {{-0.3, -0.3, 0.0}, {1.0, 0.3, 0.3}};
        s.start_position = {-0.2, 0.0, 0.02};
        s.friction = 0.2;
        s.goal_region = {{0.15, -0.15, kTableHeight}, {0.35, 0.15, kTableHeight}};
        break;
      case Task::PickPlace:
        break;
    }
    return s;
  }

  void validate() const {
    if (!(goal_tolerance > 0.0)) throw std::invalid_argument("TaskSpec: goal_tolerance must be > 0");
    if (horizon < 1) throw std::invalid_argument("TaskSpec: horizon must be >= 1");
    if (!(friction >= 0.0 && friction < 1.0)) throw std::invalid_argument("TaskSpec: friction must be in [0, 1)");
    if (!(dt > 0.0) || !(max_speed > 0.0)) throw std::invalid_argument("TaskSpec: dt and max_speed must be > 0");
    if (action_dim != 4) throw std::invalid_argument("TaskSpec: action_dim must be 4");
    if (!workspace.valid() || !workspace.contains(start_position)) {
      throw std::invalid_argument("TaskSpec: start position outside workspace");
    }
    if (task == Task::Slide && (!strike_zone.valid() || !strike_zone.contains(start_position))) {
      throw std::invalid_argument("TaskSpec: Slide start position outside strike zone");
    }
    if (task == Task::Slide && !goal_region.valid()) throw std::invalid_argument("TaskSpec: Slide goal region is empty");
    if (!(contact_radius > 0.0) || !(grasp_radius > 0.0)) throw std::invalid_argument("TaskSpec: radii must be > 0");
    if (!(object_range >= 0.0) || !(goal_range >= 0.0)) throw std::invalid_argument("TaskSpec: sampling ranges must be >= 0");
  }

  /// Length of the proprioceptive observation vector.
  std::size_t observation_dim() const { return task == Task::Reach ? 8 : 17; }
  /// Length of the network input: observation, achieved goal, desired goal.
  std::size_t state_dim() const { return observation_dim() + 6; }
};

/// Largest distance from the start pose at which the Slide effector can touch
/// anything: the farthest strike-zone corner plus the contact radius.
inline double slide_reach_radius(const TaskSpec& spec) {
  double worst = 0.0;
  for (int mask = 0; mask < 8; ++mask) {
    Vec3 corner{mask & 1 ? spec.strike_zone.hi[0] : spec.strike_zone.lo[0],
                mask & 2 ? spec.strike_zone.hi[1] : spec.strike_zone.lo[1],
                mask & 4 ? spec.strike_zone.hi[2] : spec.strike_zone.lo[2]};
    worst = std::max(worst, distance(corner, spec.start_position));
  }
  return worst + spec.contact_radius;
}

}  // namespace offpolicy::env
