#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "offpolicy/env/reward.hpp"
#include "offpolicy/nn/serialize.hpp"

namespace offpolicy::replay {

using env::Vec3;

/// One environment step. `state` and `next_state` are network inputs whose trailing
/// three entries are the desired goal.
struct Transition {
  std::vector<double> state;
  std::vector<double> action;
  double reward = -1.0;
  std::vector<double> next_state;
  bool terminal = false;
  Vec3 achieved_goal{};
  Vec3 next_achieved_goal{};
  Vec3 desired_goal{};

  bool operator==(const Transition&) const = default;
};

inline constexpr std::size_t kGoalDim = 3;

/// Throws std::invalid_argument naming the first violated invariant.
inline void validate_transition(const Transition& t) {
  if (t.reward != 0.0 && t.reward != -1.0) {
    throw std::invalid_argument("transition: reward " + std::to_string(t.reward) + " is not in {-1, 0}");
  }
  for (double a : t.action) {
    if (!(a >= -1.0 && a <= 1.0)) throw std::invalid_argument("transition: action component outside [-1, 1]");
  }
  if (t.state.size() != t.next_state.size()) throw std::invalid_argument("transition: state/next_state size mismatch");
  if (t.state.size() < kGoalDim) throw std::invalid_argument("transition: state too short to carry a goal");
  if (t.action.empty()) throw std::invalid_argument("transition: empty action");
}

/// Fixed-capacity FIFO ring of transitions.
class ReplayBuffer {
 public:
  static constexpr std::size_t kDefaultCapacity = 1'000'000;

  explicit ReplayBuffer(std::size_t capacity = kDefaultCapacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
  }

  void push(Transition t) {
    validate_transition(t);
    if (!storage_.empty()) {
      const Transition& ref = storage_.front();
      if (t.state.size() != ref.state.size() || t.action.size() != ref.action.size()) {
        throw std::invalid_argument("ReplayBuffer: transition shape differs from stored transitions");
      }
    }
    if (storage_.size() < capacity_) {
      storage_.push_back(std::move(t));
    } else {
      storage_[write_cursor_] = std::move(t);
    }
    write_cursor_ = (write_cursor_ + 1) % capacity_;
  }

  /// Uniform draws with replacement.
  template <typename Urbg>
  std::vector<Transition> sample(std::size_t batch_size, Urbg& rng) const {
    if (storage_.empty()) throw std::logic_error("ReplayBuffer: cannot sample from an empty buffer");
    std::uniform_int_distribution<std::size_t> pick(0, storage_.size() - 1);
    std::vector<Transition> batch;
    batch.reserve(batch_size);
    for (std::size_t i = 0; i < batch_size; ++i) batch.push_back(storage_[pick(rng)]);
    return batch;
  }

  template <typename Urbg>
  std::vector<std::size_t> sample_indices(std::size_t batch_size, Urbg& rng) const {
    if (storage_.empty()) throw std::logic_error("ReplayBuffer: cannot sample from an empty buffer");
    std::uniform_int_distribution<std::size_t> pick(0, storage_.size() - 1);
    std::vector<std::size_t> idx(batch_size);
    for (auto& i : idx) i = pick(rng);
    return idx;
  }

  std::size_t size() const { return storage_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return storage_.empty(); }
  std::size_t write_cursor() const { return write_cursor_; }

  /// i-th stored transition in raw storage order.
  const Transition& at(std::size_t i) const { return storage_.at(i); }

  /// Stored transitions from oldest to newest.
  std::vector<Transition> in_order() const {
    std::vector<Transition> out;
    out.reserve(storage_.size());
    const std::size_t start = storage_.size() < capacity_ ? 0 : write_cursor_;
    for (std::size_t k = 0; k < storage_.size(); ++k) out.push_back(storage_[(start + k) % storage_.size()]);
    return out;
  }

 private:
  std::size_t capacity_;
  std::vector<Transition> storage_;
  std::size_t write_cursor_ = 0;
};

/// Copy of `episode` whose desired goal is the episode's final achieved goal. The
/// goal slots of state/next_state are rewritten and rewards recomputed with the
/// sparse rule at `tolerance`.
inline std::vector<Transition> relabel_final(std::span<const Transition> episode, double tolerance) {
  if (episode.empty()) throw std::invalid_argument("relabel_final: empty episode");
  const Vec3 goal = episode.back().next_achieved_goal;
  std::vector<Transition> out(episode.begin(), episode.end());
  for (Transition& t : out) {
    t.desired_goal = goal;
    std::copy(goal.begin(), goal.end(), t.state.end() - kGoalDim);
    std::copy(goal.begin(), goal.end(), t.next_state.end() - kGoalDim);
    t.reward = env::sparse_reward(t.next_achieved_goal, goal, tolerance);
  }
  return out;
}

// Buffer dump, reusing the snapshot stream conventions:
//   magic "OPRPLBUF", u32 version, u64 capacity, u64 write_cursor, u64 count,
//   then per transition (raw storage order): vectors as u64 length + f64s,
//   reward f64, terminal u8, three goals as 3 x f64.
inline constexpr std::array<char, 8> kBufferMagic{'O', 'P', 'R', 'P', 'L', 'B', 'U', 'F'};
inline constexpr std::uint32_t kBufferVersion = 1;

namespace detail {

inline void write_vec(std::ostream& out, std::span<const double> v) {
  nn::io::write_pod<std::uint64_t>(out, v.size());
  nn::io::write_doubles(out, v);
}

inline std::vector<double> read_vec(std::istream& in) {
  const auto n = nn::io::read_pod<std::uint64_t>(in);
  if (n > (1u << 20)) throw std::runtime_error("replay dump: implausible vector length");
  std::vector<double> v(n);
  nn::io::read_doubles(in, v);
  return v;
}

}  // namespace detail

inline void write_buffer(std::ostream& out, const ReplayBuffer& buffer) {
  out.write(kBufferMagic.data(), kBufferMagic.size());
  nn::io::write_pod<std::uint32_t>(out, kBufferVersion);
  nn::io::write_pod<std::uint64_t>(out, buffer.capacity());
  nn::io::write_pod<std::uint64_t>(out, buffer.write_cursor());
  nn::io::write_pod<std::uint64_t>(out, buffer.size());
  for (const Transition& t : buffer.in_order()) {
    detail::write_vec(out, t.state);
    detail::write_vec(out, t.action);
    nn::io::write_pod<double>(out, t.reward);
    detail::write_vec(out, t.next_state);
    nn::io::write_pod<std::uint8_t>(out, t.terminal ? 1 : 0);
    nn::io::write_doubles(out, t.achieved_goal);
    nn::io::write_doubles(out, t.next_achieved_goal);
    nn::io::write_doubles(out, t.desired_goal);
  }
  if (!out) throw std::runtime_error("replay dump: write failed");
}

/// Rebuilds a buffer with identical contents and oldest-to-newest order.
inline ReplayBuffer read_buffer(std::istream& in) {
  nn::io::expect_magic(in, kBufferMagic, "replay dump");
  const auto version = nn::io::read_pod<std::uint32_t>(in);
  if (version != kBufferVersion) throw std::runtime_error("replay dump: unsupported version");
  const auto capacity = nn::io::read_pod<std::uint64_t>(in);
  nn::io::read_pod<std::uint64_t>(in);  // cursor is implied by the push order
  const auto count = nn::io::read_pod<std::uint64_t>(in);
  if (count > capacity) throw std::runtime_error("replay dump: more transitions than capacity");
  ReplayBuffer buffer(capacity);
  for (std::uint64_t i = 0; i < count; ++i) {
    Transition t;
    t.state = detail::read_vec(in);
    t.action = detail::read_vec(in);
    t.reward = nn::io::read_pod<double>(in);
    t.next_state = detail::read_vec(in);
    t.terminal = nn::io::read_pod<std::uint8_t>(in) != 0;
    nn::io::read_doubles(in, t.achieved_goal);
    nn::io::read_doubles(in, t.next_achieved_goal);
    nn::io::read_doubles(in, t.desired_goal);
    buffer.push(std::move(t));
  }
  return buffer;
}

}  // namespace offpolicy::replay
