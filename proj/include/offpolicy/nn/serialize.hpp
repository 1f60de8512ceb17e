#pragma once

// Parameter snapshot format (little-endian):
//
//   magic        8 bytes  "OPMLPSNP"
//   version      u32      kSnapshotVersion
//   n_sizes      u64
//   layer_sizes  n_sizes x u64
//   hidden_act   u8       HiddenActivation
//   output_act   u8       OutputActivation
//   per layer:   weights (rows*cols f64, row-major) then biases (rows f64)
//
// Doubles are written as their raw IEEE-754 bit patterns so a round trip is exact.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "offpolicy/nn/adam.hpp"
#include "offpolicy/nn/mlp.hpp"

namespace offpolicy::nn {

static_assert(std::endian::native == std::endian::little, "snapshot format assumes a little-endian host");

inline constexpr std::array<char, 8> kSnapshotMagic{'O', 'P', 'M', 'L', 'P', 'S', 'N', 'P'};
inline constexpr std::uint32_t kSnapshotVersion = 1;

namespace io {

template <typename T>
void write_pod(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  static_assert(std::is_trivially_copyable_v<T>);
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw std::runtime_error("snapshot: unexpected end of stream");
  return value;
}

inline void write_doubles(std::ostream& out, std::span<const double> values) {
  out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size_bytes()));
}

inline void read_doubles(std::istream& in, std::span<double> values) {
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size_bytes()));
  if (!in) throw std::runtime_error("snapshot: unexpected end of stream");
}

inline void write_string(std::ostream& out, std::string_view s) {
  write_pod<std::uint64_t>(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_string(std::istream& in, std::size_t max_len = 1 << 20) {
  const auto n = read_pod<std::uint64_t>(in);
  if (n > max_len) throw std::runtime_error("snapshot: string length out of range");
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  if (!in) throw std::runtime_error("snapshot: unexpected end of stream");
  return s;
}

template <std::size_t N>
void expect_magic(std::istream& in, const std::array<char, N>& magic, std::string_view what) {
  std::array<char, N> got{};
  in.read(got.data(), N);
  if (!in || got != magic) throw std::runtime_error(std::string(what) + ": bad magic header");
}

}  // namespace io

inline void write_snapshot(std::ostream& out, const Mlp& net) {
  out.write(kSnapshotMagic.data(), kSnapshotMagic.size());
  io::write_pod<std::uint32_t>(out, kSnapshotVersion);
  io::write_pod<std::uint64_t>(out, net.layer_sizes.size());
  for (std::size_t s : net.layer_sizes) io::write_pod<std::uint64_t>(out, s);
  io::write_pod<std::uint8_t>(out, static_cast<std::uint8_t>(net.hidden_activation));
  io::write_pod<std::uint8_t>(out, static_cast<std::uint8_t>(net.output_activation));
  for (std::size_t i = 0; i < net.num_layers(); ++i) {
    io::write_doubles(out, net.weights[i].data);
    io::write_doubles(out, net.biases[i]);
  }
  if (!out) throw std::runtime_error("snapshot: write failed");
}

inline Mlp read_snapshot(std::istream& in) {
  io::expect_magic(in, kSnapshotMagic, "snapshot");
  const auto version = io::read_pod<std::uint32_t>(in);
  if (version != kSnapshotVersion) {
    throw std::runtime_error("snapshot: unsupported format version " + std::to_string(version));
  }
  const auto n = io::read_pod<std::uint64_t>(in);
  if (n < 2 || n > 1024) throw std::runtime_error("snapshot: implausible layer count");
  std::vector<std::size_t> sizes(n);
  for (auto& s : sizes) {
    s = io::read_pod<std::uint64_t>(in);
    if (s == 0 || s > (1u << 20)) throw std::runtime_error("snapshot: implausible layer size");
  }
  const auto hidden = io::read_pod<std::uint8_t>(in);
  const auto output = io::read_pod<std::uint8_t>(in);
  if (hidden != static_cast<std::uint8_t>(HiddenActivation::ReLU)) throw std::runtime_error("snapshot: unknown hidden activation");
  if (output > static_cast<std::uint8_t>(OutputActivation::Tanh)) throw std::runtime_error("snapshot: unknown output activation");

  Mlp net;
  net.layer_sizes = sizes;
  net.hidden_activation = static_cast<HiddenActivation>(hidden);
  net.output_activation = static_cast<OutputActivation>(output);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    Matrix w(sizes[i + 1], sizes[i]);
    io::read_doubles(in, w.data);
    std::vector<double> b(sizes[i + 1]);
    io::read_doubles(in, b);
    net.weights.push_back(std::move(w));
    net.biases.push_back(std::move(b));
  }
  return net;
}

inline std::string snapshot_bytes(const Mlp& net) {
  std::ostringstream out(std::ios::binary);
  write_snapshot(out, net);
  return std::move(out).str();
}

inline Mlp snapshot_from_bytes(const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  return read_snapshot(in);
}

/// Optimizer moments use the same layout as parameters, so they are stored as
/// two snapshots of a shape-identical network plus the scalar state.
inline void write_adam_state(std::ostream& out, const Mlp& shape, const AdamState& s) {
  auto as_net = [&](const ParamGrads& g) {
    Mlp m = shape;
    m.weights = g.weights;
    m.biases = g.biases;
    return m;
  };
  write_snapshot(out, as_net(s.first_moment));
  write_snapshot(out, as_net(s.second_moment));
  io::write_pod<std::uint64_t>(out, s.step_count);
  io::write_pod<double>(out, s.beta1);
  io::write_pod<double>(out, s.beta2);
  io::write_pod<double>(out, s.epsilon);
}

inline AdamState read_adam_state(std::istream& in) {
  AdamState s;
  Mlp m1 = read_snapshot(in);
  Mlp m2 = read_snapshot(in);
  s.first_moment = {std::move(m1.weights), std::move(m1.biases)};
  s.second_moment = {std::move(m2.weights), std::move(m2.biases)};
  s.step_count = io::read_pod<std::uint64_t>(in);
  s.beta1 = io::read_pod<double>(in);
  s.beta2 = io::read_pod<double>(in);
  s.epsilon = io::read_pod<double>(in);
  return s;
}

}  // namespace offpolicy::nn
