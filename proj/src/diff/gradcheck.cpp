#include "ginet/diff/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "ginet/diff/ops.hpp"
#include "ginet/util.hpp"

namespace ginet::diff {

GradCheckResult grad_check(const std::function<Tensor<double>()>& loss_fn,
                           std::vector<Tensor<double>> inputs, const GradCheckOptions& opts) {
  for (auto& t : inputs) t.zero_grad();
  backward(loss_fn());

  Rng rng(opts.seed);
  double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
  GradCheckResult r;
  NoGradGuard no_grad;
  const double center = opts.skip_kinks ? loss_fn().item() : 0.0;
  for (auto& t : inputs) {
    const std::vector<double> analytic(t.grad().begin(), t.grad().end());
    std::vector<std::size_t> coords(t.numel());
    for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = i;
    if (opts.max_coords && coords.size() > opts.max_coords) {
      shuffle(coords, rng);
      coords.resize(opts.max_coords);
    }
    auto values = t.mutable_values();
    for (std::size_t i : coords) {
      const double saved = values[i];
      values[i] = saved + opts.eps;
      const double up = loss_fn().item();
      values[i] = saved - opts.eps;
      const double down = loss_fn().item();
      values[i] = saved;
      if (opts.skip_kinks) {
        const double fwd = (up - center) / opts.eps, bwd = (center - down) / opts.eps;
        // Rounding noise in the one-sided differences grows like |loss| / eps.
        const double floor = 1e-11 * (1.0 + std::abs(center)) / opts.eps;
        if (std::abs(fwd - bwd) > opts.kink_tol * std::max(std::abs(fwd), std::abs(bwd)) + floor) {
          ++r.skipped;
          continue;
        }
      }
      const double numeric = (up - down) / (2 * opts.eps);
      const double a = analytic.empty() ? 0.0 : analytic[i] * opts.corrupt;
      diff2 += (a - numeric) * (a - numeric);
      a2 += a * a;
      n2 += numeric * numeric;
      ++r.coords;
    }
  }
  const double scale = std::max({std::sqrt(a2), std::sqrt(n2), 1e-12});
  r.rel_error = std::sqrt(diff2) / scale;
  r.ok = r.rel_error <= opts.tol;
  return r;
}

Tensor<double> random_projection(const Tensor<double>& out, std::uint64_t seed) {
  const auto r = random_tensor(out.shape(), seed, 1.0, false);
  return sum(mul(out, r));
}

Tensor<double> random_tensor(Shape shape, std::uint64_t seed, double scale, bool requires_grad) {
  Tensor<double> t(std::move(shape), requires_grad);
  Rng rng(seed);
  for (auto& v : t.mutable_values()) v = uniform(rng, -scale, scale);
  return t;
}

}  // namespace ginet::diff
