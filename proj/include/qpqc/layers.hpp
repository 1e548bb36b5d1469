#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qpqc/random.hpp"
#include "qpqc/tensor.hpp"

namespace qpqc {

enum class LayerKind : std::uint8_t { Conv2D, Dense, ReLU, LeakyReLU, MaxPool2D, GlobalAvgPool, Flatten, Softmax };

/// Weights: Conv2D W[out][in][k][k] then bias[out]; Dense W[out][in] then bias[out].
struct LayerSpec {
  LayerKind kind = LayerKind::ReLU;
  int in_channels = 0;   // Conv2D
  int out_channels = 0;  // Conv2D
  int kernel = 3;        // Conv2D, MaxPool2D
  int stride = 1;        // Conv2D, MaxPool2D
  int padding = 0;       // Conv2D
  int in_features = 0;   // Dense
  int out_features = 0;  // Dense
  double slope = 0.01;   // LeakyReLU

  static LayerSpec conv2d(int in, int out, int kernel, int stride = 1, int padding = 0);
  static LayerSpec dense(int in, int out);
  static LayerSpec relu();
  static LayerSpec leaky_relu(double slope = 0.01);
  static LayerSpec max_pool(int kernel, int stride);
  static LayerSpec global_avg_pool();
  static LayerSpec flatten();
  static LayerSpec softmax();

  std::size_t weight_count() const;
  std::size_t fan_in() const;
  /// Throws ShapeError when the input shape does not fit the layer.
  std::vector<std::size_t> output_shape(std::span<const std::size_t> input) const;
};

std::string to_string(LayerKind kind);

/// What backward needs from forward.
struct LayerCache {
  LayerKind kind = LayerKind::ReLU;
  Tensor input;
  Tensor output;
  std::vector<std::size_t> argmax;  // MaxPool2D
};

Tensor layer_forward(const LayerSpec& spec, std::span<const double> weights, const Tensor& input,
                     LayerCache* cache = nullptr);

struct LayerGrad {
  Tensor d_input;
  std::vector<double> d_weights;
};

/// Throws StateError when the cache does not come from this layer kind.
LayerGrad layer_backward(const LayerSpec& spec, std::span<const double> weights, const LayerCache& cache,
                         const Tensor& d_output);

/// Normal(0, 2 / fan_in) weights, zero biases. Throws ShapeError on zero fan-in.
std::vector<double> he_init(const LayerSpec& spec, Rng& rng);
std::vector<double> he_init(const LayerSpec& spec, std::uint64_t seed);

}  // namespace qpqc
