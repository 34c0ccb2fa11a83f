#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ginet/diff/tensor.hpp"

namespace ginet::diff {

// Elementwise; shapes must match exactly.
template <typename T> Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> scale(const Tensor<T>& a, T s);
template <typename T> Tensor<T> relu(const Tensor<T>& a);
// d|x|/dx is taken as 0 at x == 0.
template <typename T> Tensor<T> abs(const Tensor<T>& a);
template <typename T> Tensor<T> square(const Tensor<T>& a);

// Reductions to a one-element tensor. Accumulation runs in double, in index
// order, so results are reproducible.
template <typename T> Tensor<T> sum(const Tensor<T>& a);
template <typename T> Tensor<T> mean(const Tensor<T>& a);

template <typename T> Tensor<T> reshape(const Tensor<T>& a, Shape shape);

// [C_i,H,W]... -> [sum C_i,H,W]
template <typename T> Tensor<T> concat_channels(std::span<const Tensor<T>> parts);
template <typename T> Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b);
// Channels [begin, begin + count) of a [C,H,W] tensor.
template <typename T> Tensor<T> slice_channels(const Tensor<T>& a, std::size_t begin, std::size_t count);
// x[C,H,W] * p[1,H,W], broadcast over channels.
template <typename T> Tensor<T> mul_channel(const Tensor<T>& x, const Tensor<T>& p);

// Row-wise softmax of an [n,m] tensor, stabilized by the row maximum.
template <typename T> Tensor<T> softmax_rows(const Tensor<T>& x);
// Softmax across channels at each pixel of a [C,H,W] tensor.
template <typename T> Tensor<T> softmax_channels(const Tensor<T>& x);

// 2x2 non-overlapping mean. H and W must be even.
template <typename T> Tensor<T> avg_pool2(const Tensor<T>& x);

// Pixels of a [C,H,W] tensor at flat positions `index`, as [C,1,n].
template <typename T>
Tensor<T> gather_pixels(const Tensor<T>& x, std::span<const std::uint32_t> index);
// Inverse placement: [C,1,n] written to `index` of a zero [C,H,W] tensor.
template <typename T>
Tensor<T> scatter_pixels(const Tensor<T>& x, std::span<const std::uint32_t> index, std::size_t height,
                         std::size_t width);

}  // namespace ginet::diff
