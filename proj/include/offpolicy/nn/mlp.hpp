#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "offpolicy/nn/matrix.hpp"

namespace offpolicy::nn {

enum class HiddenActivation : std::uint8_t { ReLU = 0 };
enum class OutputActivation : std::uint8_t { Identity = 0, Tanh = 1 };

/// Fully connected feed-forward network. Layer i maps layer_sizes[i] inputs to
/// layer_sizes[i+1] outputs through weights[i] (out x in) and biases[i].
struct Mlp {
  std::vector<std::size_t> layer_sizes;
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;
  HiddenActivation hidden_activation = HiddenActivation::ReLU;
  OutputActivation output_activation = OutputActivation::Identity;

  std::size_t num_layers() const { return weights.size(); }
  std::size_t input_size() const { return layer_sizes.front(); }
  std::size_t output_size() const { return layer_sizes.back(); }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) n += weights[i].size() + biases[i].size();
    return n;
  }

  bool same_architecture(const Mlp& other) const {
    return layer_sizes == other.layer_sizes && hidden_activation == other.hidden_activation &&
           output_activation == other.output_activation;
  }

  bool operator==(const Mlp&) const = default;
};

/// Gradients with the same shapes as the network parameters.
struct ParamGrads {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;

  static ParamGrads zeros_like(const Mlp& net) {
    ParamGrads g;
    g.weights.reserve(net.num_layers());
    g.biases.reserve(net.num_layers());
    for (std::size_t i = 0; i < net.num_layers(); ++i) {
      g.weights.emplace_back(net.weights[i].rows, net.weights[i].cols);
      g.biases.emplace_back(net.biases[i].size(), 0.0);
    }
    return g;
  }

  bool congruent_with(const Mlp& net) const {
    if (weights.size() != net.num_layers() || biases.size() != net.num_layers()) return false;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (!weights[i].same_shape(net.weights[i]) || biases[i].size() != net.biases[i].size()) return false;
    }
    return true;
  }

  bool finite() const {
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (!all_finite(weights[i].data) || !all_finite(biases[i])) return false;
    }
    return true;
  }
};

/// Per-layer values kept by the forward pass. layer_inputs[0] is the network
/// input; outputs[i] is the post-activation of layer i. Each row is one sample.
struct ForwardCache {
  std::vector<Matrix> layer_inputs;
  std::vector<Matrix> pre_activations;
  std::vector<Matrix> outputs;

  std::size_t batch_size() const { return layer_inputs.empty() ? 0 : layer_inputs.front().rows; }
  const Matrix& output() const { return outputs.back(); }
};

inline void validate_layer_sizes(std::span<const std::size_t> layer_sizes) {
  if (layer_sizes.size() < 2) {
    throw std::invalid_argument("mlp: need at least 2 layer sizes, got " + std::to_string(layer_sizes.size()));
  }
  for (std::size_t s : layer_sizes) {
    if (s == 0) throw std::invalid_argument("mlp: zero-sized layer");
  }
}

/// Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases zero.
inline Mlp mlp_init(std::span<const std::size_t> layer_sizes, OutputActivation output_activation,
                    std::uint64_t seed) {
  validate_layer_sizes(layer_sizes);
  Mlp net;
  net.layer_sizes.assign(layer_sizes.begin(), layer_sizes.end());
  net.output_activation = output_activation;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i + 1 < layer_sizes.size(); ++i) {
    const std::size_t fan_in = layer_sizes[i];
    const std::size_t fan_out = layer_sizes[i + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Matrix w(fan_out, fan_in);
    for (double& v : w.data) v = dist(rng);
    net.weights.push_back(std::move(w));
    net.biases.emplace_back(fan_out, 0.0);
  }
  return net;
}

inline Mlp mlp_init(std::initializer_list<std::size_t> layer_sizes, OutputActivation output_activation,
                    std::uint64_t seed) {
  return mlp_init(std::span<const std::size_t>(layer_sizes.begin(), layer_sizes.size()), output_activation, seed);
}

/// Batched forward pass; each row of `input` is one sample.
inline ForwardCache mlp_forward_batch(const Mlp& net, Matrix input) {
  if (input.cols != net.input_size()) {
    throw std::invalid_argument("mlp_forward: input width " + std::to_string(input.cols) + " != " +
                                std::to_string(net.input_size()));
  }
  ForwardCache cache;
  const std::size_t n = net.num_layers();
  cache.layer_inputs.reserve(n);
  cache.pre_activations.reserve(n);
  cache.outputs.reserve(n);
  cache.layer_inputs.push_back(std::move(input));
  for (std::size_t i = 0; i < n; ++i) {
    const Matrix& x = cache.layer_inputs.back();
    const Matrix& w = net.weights[i];
    Matrix z(x.rows, w.rows);
    auto zm = z.map();
    zm.noalias() = x.map() * w.map().transpose();
    zm.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(net.biases[i].data(), static_cast<Eigen::Index>(w.rows));

    Matrix y = z;
    const bool last = (i + 1 == n);
    if (!last) {
      for (double& v : y.data) v = v > 0.0 ? v : 0.0;
    } else if (net.output_activation == OutputActivation::Tanh) {
      // tanh rounds to +-1 in double precision past |z| ~ 19; keep outputs strictly inside (-1, 1).
      constexpr double kBelowOne = 1.0 - 0x1p-53;
      for (double& v : y.data) v = std::clamp(std::tanh(v), -kBelowOne, kBelowOne);
    }
    cache.pre_activations.push_back(std::move(z));
    if (!last) cache.layer_inputs.push_back(y);
    cache.outputs.push_back(std::move(y));
  }
  return cache;
}

struct ForwardResult {
  std::vector<double> output;
  ForwardCache cache;
};

inline ForwardResult mlp_forward(const Mlp& net, std::span<const double> input) {
  ForwardResult result;
  result.cache = mlp_forward_batch(net, Matrix(1, input.size(), std::vector<double>(input.begin(), input.end())));
  result.output = result.cache.output().data;
  return result;
}

/// Output only, no cache retained beyond the call.
inline Matrix mlp_predict(const Mlp& net, Matrix input) {
  ForwardCache cache = mlp_forward_batch(net, std::move(input));
  return std::move(cache.outputs.back());
}

struct BackwardResult {
  ParamGrads grads;
  Matrix grad_input;
};

/// Reverse-mode pass for the scalar sum over samples of <output_row, grad_output_row>.
/// Parameter gradients are summed over the batch. With `want_param_grads` false only
/// the input gradient is produced.
inline BackwardResult mlp_backward_batch(const Mlp& net, const ForwardCache& cache, const Matrix& grad_output,
                                         bool want_param_grads = true) {
  const std::size_t n = net.num_layers();
  if (cache.pre_activations.size() != n || cache.layer_inputs.size() != n) {
    throw std::invalid_argument("mlp_backward: cache depth does not match network");
  }
  if (!grad_output.same_shape(cache.outputs.back())) {
    throw std::invalid_argument("mlp_backward: grad_output shape does not match cached output");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (cache.pre_activations[i].cols != net.weights[i].rows || cache.layer_inputs[i].cols != net.weights[i].cols) {
      throw std::invalid_argument("mlp_backward: cache was produced by a different network");
    }
  }

  BackwardResult result;
  if (want_param_grads) {
    result.grads.weights.resize(n);
    result.grads.biases.resize(n);
  }
  Matrix delta = grad_output;
  for (std::size_t li = n; li-- > 0;) {
    const Matrix& z = cache.pre_activations[li];
    const bool last = (li + 1 == n);
    if (!last) {
      for (std::size_t k = 0; k < delta.data.size(); ++k) {
        if (!(z.data[k] > 0.0)) delta.data[k] = 0.0;
      }
    } else if (net.output_activation == OutputActivation::Tanh) {
      const Matrix& y = cache.outputs[li];
      for (std::size_t k = 0; k < delta.data.size(); ++k) delta.data[k] *= 1.0 - y.data[k] * y.data[k];
    }

    const Matrix& x = cache.layer_inputs[li];
    const Matrix& w = net.weights[li];
    if (want_param_grads) {
      Matrix gw(w.rows, w.cols);
      gw.map().noalias() = delta.map().transpose() * x.map();
      std::vector<double> gb(w.rows, 0.0);
      Eigen::Map<Eigen::RowVectorXd>(gb.data(), static_cast<Eigen::Index>(w.rows)) = delta.map().colwise().sum();
      result.grads.weights[li] = std::move(gw);
      result.grads.biases[li] = std::move(gb);
    }
    Matrix prev(delta.rows, w.cols);
    prev.map().noalias() = delta.map() * w.map();
    delta = std::move(prev);
  }
  result.grad_input = std::move(delta);
  return result;
}

struct VectorBackwardResult {
  ParamGrads grads;
  std::vector<double> grad_input;
};

inline VectorBackwardResult mlp_backward(const Mlp& net, const ForwardCache& cache, std::span<const double> grad_output) {
  if (cache.batch_size() != 1) throw std::invalid_argument("mlp_backward: expected a single-sample cache");
  Matrix g(1, grad_output.size(), std::vector<double>(grad_output.begin(), grad_output.end()));
  BackwardResult r = mlp_backward_batch(net, cache, g);
  return {std::move(r.grads), std::move(r.grad_input.data)};
}

/// Visits every parameter in a fixed order: per layer, weights row-major then biases.
template <typename Fn>
void for_each_parameter(Mlp& net, Fn&& fn) {
  for (std::size_t i = 0; i < net.num_layers(); ++i) {
    for (double& v : net.weights[i].data) fn(v);
    for (double& v : net.biases[i]) fn(v);
  }
}

}  // namespace offpolicy::nn
