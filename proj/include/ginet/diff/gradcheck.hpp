#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ginet/diff/tensor.hpp"

namespace ginet::diff {

struct GradCheckOptions {
  double eps = 1e-6;
  double tol = 1e-4;
  std::size_t max_coords = 64;  // per input; 0 checks every coordinate
  std::uint64_t seed = 1;
  // Multiplies the analytic gradient before comparing. Only for testing the
  // checker itself.
  double corrupt = 1.0;
  // Drop coordinates whose one-sided differences disagree (a ReLU or abs
  // kink inside [x - eps, x + eps]); they are counted in `skipped`.
  bool skip_kinks = false;
  double kink_tol = 1e-3;
};

struct GradCheckResult {
  double rel_error = 0.0;  // ||analytic - numeric|| / max(||analytic||, ||numeric||)
  std::size_t coords = 0;
  std::size_t skipped = 0;
  bool ok = false;
};

// Central differences of `loss_fn` w.r.t. the sampled coordinates of
// `inputs` (leaves with requires_grad), compared against backward().
GradCheckResult grad_check(const std::function<Tensor<double>()>& loss_fn,
                           std::vector<Tensor<double>> inputs, const GradCheckOptions& opts = {});

// Random-projection scalar <out, r> with r ~ U(-1, 1) from `seed`, so that
// every output element contributes to the checked gradient.
Tensor<double> random_projection(const Tensor<double>& out, std::uint64_t seed);

// A leaf with U(-scale, scale) entries.
Tensor<double> random_tensor(Shape shape, std::uint64_t seed, double scale = 1.0,
                             bool requires_grad = true);

}  // namespace ginet::diff
