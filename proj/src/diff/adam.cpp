#include "ginet/diff/adam.hpp"

#include <cmath>

#include "ginet/error.hpp"

namespace ginet::diff {

template <typename T>
void adam_step(std::span<T> params, std::span<const T> grads, AdamState<T>& state,
               const AdamOptions& opts) {
  if (params.size() != grads.size()) {
    throw Error(ErrorCode::kShapeMismatch, "adam_step: params and grads differ in length");
  }
  if (state.m.size() != params.size()) {
    state.m.assign(params.size(), T(0));
    state.v.assign(params.size(), T(0));
  }
  ++state.t;
  const double c1 = 1.0 - std::pow(opts.beta1, double(state.t));
  const double c2 = 1.0 - std::pow(opts.beta2, double(state.t));
  const T b1 = T(opts.beta1), b2 = T(opts.beta2);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const T g = grads[i];
    state.m[i] = b1 * state.m[i] + (T(1) - b1) * g;
    state.v[i] = b2 * state.v[i] + (T(1) - b2) * g * g;
    const double m_hat = double(state.m[i]) / c1;
    const double v_hat = double(state.v[i]) / c2;
    params[i] -= static_cast<T>(opts.lr * m_hat / (std::sqrt(v_hat) + opts.eps));
  }
}

template <typename T>
Adam<T>::Adam(std::vector<Tensor<T>> params, AdamOptions opts)
    : params_(std::move(params)), states_(params_.size()), opts_(opts) {
  if (!(opts_.lr > 0.0)) throw Error(ErrorCode::kInvalidArgument, "learning rate must be positive");
}

template <typename T>
void Adam<T>::step() {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& p = params_[i];
    if (!p.has_grad()) p.mutable_grad();  // untouched this step: zero gradient
    adam_step<T>(p.mutable_values(), p.grad(), states_[i], opts_);
  }
}

template <typename T>
void Adam<T>::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

template void adam_step(std::span<float>, std::span<const float>, AdamState<float>&,
                        const AdamOptions&);
template void adam_step(std::span<double>, std::span<const double>, AdamState<double>&,
                        const AdamOptions&);
template class Adam<float>;
template class Adam<double>;

}  // namespace ginet::diff
