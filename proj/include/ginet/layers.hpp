#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "ginet/diff/conv.hpp"
#include "ginet/diff/tensor.hpp"
#include "ginet/util.hpp"

namespace ginet {

template <typename T>
using NamedTensors = std::vector<std::pair<std::string, diff::Tensor<T>>>;

// Trainable tensor filled with U(-bound, bound).
template <typename T>
diff::Tensor<T> uniform_param(diff::Shape shape, double bound, Rng& rng) {
  diff::Tensor<T> t(std::move(shape), true);
  for (auto& v : t.mutable_values()) v = static_cast<T>(uniform(rng, -bound, bound));
  return t;
}

// Square-kernel convolution with bias and "same" zero padding.
template <typename T>
struct ConvLayer {
  diff::Tensor<T> weight;  // [out, in, k, k]
  diff::Tensor<T> bias;    // [out]

  static ConvLayer init(std::size_t in, std::size_t out, std::size_t kernel, Rng& rng) {
    const double bound = 1.0 / std::sqrt(double(in * kernel * kernel));
    ConvLayer layer;
    layer.weight = uniform_param<T>({out, in, kernel, kernel}, bound, rng);
    layer.bias = diff::Tensor<T>({out}, true);
    return layer;
  }

  diff::Tensor<T> operator()(const diff::Tensor<T>& x) const {
    return diff::conv2d(x, weight, bias, (weight.dim(2) - 1) / 2);
  }

  std::size_t out_channels() const { return weight.dim(0); }
  std::size_t param_count() const { return weight.numel() + bias.numel(); }

  void collect(const std::string& prefix, NamedTensors<T>& out) const {
    out.emplace_back(prefix + ".weight", weight);
    out.emplace_back(prefix + ".bias", bias);
  }
};

}  // namespace ginet
