#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ginet/diff/tensor.hpp"

namespace ginet::diff {

struct AdamOptions {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename T>
struct AdamState {
  std::vector<T> m;
  std::vector<T> v;
  std::uint64_t t = 0;
};

// One bias-corrected Adam update of `params` in place.
template <typename T>
void adam_step(std::span<T> params, std::span<const T> grads, AdamState<T>& state,
               const AdamOptions& opts);

// Adam over a fixed set of leaf tensors; reads their accumulated gradients.
template <typename T>
class Adam {
 public:
  Adam(std::vector<Tensor<T>> params, AdamOptions opts);

  void step();
  void zero_grad();
  const AdamOptions& options() const { return opts_; }

 private:
  std::vector<Tensor<T>> params_;
  std::vector<AdamState<T>> states_;
  AdamOptions opts_;
};

}  // namespace ginet::diff
