#pragma once

#include "ginet/diff/tensor.hpp"

namespace ginet::diff {

// Cross-correlation with zero padding and stride 1.
//   x [C,H,W], w [O,C,kh,kw], b [O] or undefined -> [O, H+2p-kh+1, W+2p-kw+1]
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, std::size_t pad);

// One kernel per channel, no bias. x [C,H,W], w [C,kh,kw].
template <typename T>
Tensor<T> depthwise_conv2d(const Tensor<T>& x, const Tensor<T>& w, std::size_t pad);

// Depthwise stride-2 transposed convolution with a 3x3 kernel, padding 1 and
// output padding 1, so [C,h,w] -> [C,2h,2w]:
//   out[c, 2i+ky-1, 2j+kx-1] += x[c,i,j] * w[c,ky,kx]
template <typename T>
Tensor<T> transposed_conv2d_s2(const Tensor<T>& x, const Tensor<T>& w);

// The adjoint of transposed_conv2d_s2 in x: a depthwise stride-2 correlation
// [C,2h,2w] -> [C,h,w]. Value-only (no graph).
template <typename T>
Tensor<T> strided_conv2d_s2(const Tensor<T>& y, const Tensor<T>& w);

// Zero-padded patch neighbourhoods flattened into channels:
// [C,H,W] -> [C*p*p,H,W], channel (c*p + dy)*p + dx. patch must be odd.
template <typename T>
Tensor<T> unfold_patches(const Tensor<T>& x, std::size_t patch);

// Catmull-Rom cubic (a = -0.5) 2x upsampling, half-pixel centers, symmetric
// borders. [C,h,w] -> [C,2h,2w].
inline constexpr double kBicubicA = -0.5;
template <typename T>
Tensor<T> bicubic_up2(const Tensor<T>& x);

// Cubic convolution kernel weight at offset t.
double cubic_weight(double t, double a = kBicubicA);

}  // namespace ginet::diff
