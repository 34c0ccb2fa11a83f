#include "ginet/diff/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ginet/error.hpp"

namespace ginet::diff {

namespace {

template <typename T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw Error(ErrorCode::kShapeMismatch,
                std::string(op) + ": " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  }
}

template <typename T>
void require_chw(const Tensor<T>& a, const char* op) {
  if (a.rank() != 3) {
    throw Error(ErrorCode::kShapeMismatch, std::string(op) + " expects [C,H,W], got " +
                                               to_string(a.shape()));
  }
}

// Accumulate g into the parent's grad when the parent wants one.
template <typename T, typename F>
void accumulate(Node<T>& parent, F&& contribution) {
  if (!parent.requires_grad) return;
  auto& g = parent.ensure_grad();
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += contribution(i);
}

}  // namespace

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "add");
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] + b.values()[i];
  return make_result<T>(a.shape(), std::move(out), {a, b}, [](Node<T>& self) {
    accumulate(*self.parents[0], [&](std::size_t i) { return self.grad[i]; });
    accumulate(*self.parents[1], [&](std::size_t i) { return self.grad[i]; });
  });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "sub");
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] - b.values()[i];
  return make_result<T>(a.shape(), std::move(out), {a, b}, [](Node<T>& self) {
    accumulate(*self.parents[0], [&](std::size_t i) { return self.grad[i]; });
    accumulate(*self.parents[1], [&](std::size_t i) { return -self.grad[i]; });
  });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "mul");
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] * b.values()[i];
  return make_result<T>(a.shape(), std::move(out), {a, b}, [](Node<T>& self) {
    const auto& av = self.parents[0]->value;
    const auto& bv = self.parents[1]->value;
    accumulate(*self.parents[0], [&](std::size_t i) { return self.grad[i] * bv[i]; });
    accumulate(*self.parents[1], [&](std::size_t i) { return self.grad[i] * av[i]; });
  });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T s) {
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] * s;
  return make_result<T>(a.shape(), std::move(out), {a}, [s](Node<T>& self) {
    accumulate(*self.parents[0], [&](std::size_t i) { return self.grad[i] * s; });
  });
}

template <typename T>
Tensor<T> relu(const Tensor<T>& a) {
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(a.values()[i], T(0));
  return make_result<T>(a.shape(), std::move(out), {a}, [](Node<T>& self) {
    const auto& av = self.parents[0]->value;
    accumulate(*self.parents[0], [&](std::size_t i) { return av[i] > T(0) ? self.grad[i] : T(0); });
  });
}

template <typename T>
Tensor<T> abs(const Tensor<T>& a) {
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::abs(a.values()[i]);
  return make_result<T>(a.shape(), std::move(out), {a}, [](Node<T>& self) {
    const auto& av = self.parents[0]->value;
    accumulate(*self.parents[0], [&](std::size_t i) {
      return av[i] > T(0) ? self.grad[i] : av[i] < T(0) ? -self.grad[i] : T(0);
    });
  });
}

template <typename T>
Tensor<T> square(const Tensor<T>& a) {
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] * a.values()[i];
  return make_result<T>(a.shape(), std::move(out), {a}, [](Node<T>& self) {
    const auto& av = self.parents[0]->value;
    accumulate(*self.parents[0], [&](std::size_t i) { return T(2) * av[i] * self.grad[i]; });
  });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& a) {
  double acc = 0.0;
  for (T v : a.values()) acc += double(v);
  return make_result<T>(Shape{1}, {static_cast<T>(acc)}, {a}, [](Node<T>& self) {
    const T g = self.grad[0];
    accumulate(*self.parents[0], [&](std::size_t) { return g; });
  });
}

template <typename T>
Tensor<T> mean(const Tensor<T>& a) {
  double acc = 0.0;
  for (T v : a.values()) acc += double(v);
  const double n = double(a.numel());
  return make_result<T>(Shape{1}, {static_cast<T>(acc / n)}, {a}, [n](Node<T>& self) {
    const T g = static_cast<T>(double(self.grad[0]) / n);
    accumulate(*self.parents[0], [&](std::size_t) { return g; });
  });
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& a, Shape shape) {
  if (numel(shape) != a.numel()) {
    throw Error(ErrorCode::kShapeMismatch,
                "reshape " + to_string(a.shape()) + " -> " + to_string(shape));
  }
  std::vector<T> out(a.values().begin(), a.values().end());
  return make_result<T>(std::move(shape), std::move(out), {a}, [](Node<T>& self) {
    accumulate(*self.parents[0], [&](std::size_t i) { return self.grad[i]; });
  });
}

template <typename T>
Tensor<T> concat_channels(std::span<const Tensor<T>> parts) {
  if (parts.empty()) throw Error(ErrorCode::kInvalidArgument, "concat of nothing");
  const std::size_t h = parts[0].dim(1);
  const std::size_t w = parts[0].dim(2);
  std::size_t channels = 0;
  for (const auto& p : parts) {
    require_chw(p, "concat_channels");
    if (p.dim(1) != h || p.dim(2) != w) {
      throw Error(ErrorCode::kShapeMismatch, "concat_channels: spatial size differs");
    }
    channels += p.dim(0);
  }
  std::vector<T> out;
  out.reserve(channels * h * w);
  for (const auto& p : parts) out.insert(out.end(), p.values().begin(), p.values().end());
  return make_result<T>(Shape{channels, h, w}, std::move(out),
                        std::vector<Tensor<T>>(parts.begin(), parts.end()), [](Node<T>& self) {
                          std::size_t offset = 0;
                          for (auto& parent : self.parents) {
                            const std::size_t n = parent->value.size();
                            accumulate(*parent,
                                       [&](std::size_t i) { return self.grad[offset + i]; });
                            offset += n;
                          }
                        });
}

template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
  const Tensor<T> parts[] = {a, b};
  return concat_channels<T>(std::span<const Tensor<T>>(parts));
}

template <typename T>
Tensor<T> slice_channels(const Tensor<T>& a, std::size_t begin, std::size_t count) {
  require_chw(a, "slice_channels");
  if (begin + count > a.dim(0)) {
    throw Error(ErrorCode::kShapeMismatch, "slice_channels out of range");
  }
  const std::size_t plane = a.dim(1) * a.dim(2);
  std::vector<T> out(a.values().begin() + begin * plane,
                     a.values().begin() + (begin + count) * plane);
  return make_result<T>(Shape{count, a.dim(1), a.dim(2)}, std::move(out), {a},
                        [offset = begin * plane](Node<T>& self) {
                          Node<T>& parent = *self.parents[0];
                          if (!parent.requires_grad) return;
                          auto& g = parent.ensure_grad();
                          for (std::size_t i = 0; i < self.grad.size(); ++i) {
                            g[offset + i] += self.grad[i];
                          }
                        });
}

template <typename T>
Tensor<T> mul_channel(const Tensor<T>& x, const Tensor<T>& p) {
  require_chw(x, "mul_channel");
  require_chw(p, "mul_channel");
  if (p.dim(0) != 1 || p.dim(1) != x.dim(1) || p.dim(2) != x.dim(2)) {
    throw Error(ErrorCode::kShapeMismatch,
                "mul_channel: " + to_string(x.shape()) + " by " + to_string(p.shape()));
  }
  const std::size_t plane = x.dim(1) * x.dim(2);
  std::vector<T> out(x.numel());
  for (std::size_t c = 0; c < x.dim(0); ++c) {
    for (std::size_t i = 0; i < plane; ++i) {
      out[c * plane + i] = x.values()[c * plane + i] * p.values()[i];
    }
  }
  return make_result<T>(x.shape(), std::move(out), {x, p}, [plane](Node<T>& self) {
    Node<T>& xn = *self.parents[0];
    Node<T>& pn = *self.parents[1];
    const std::size_t channels = xn.shape[0];
    if (xn.requires_grad) {
      auto& g = xn.ensure_grad();
      for (std::size_t c = 0; c < channels; ++c) {
        for (std::size_t i = 0; i < plane; ++i) {
          g[c * plane + i] += self.grad[c * plane + i] * pn.value[i];
        }
      }
    }
    if (pn.requires_grad) {
      auto& g = pn.ensure_grad();
      for (std::size_t c = 0; c < channels; ++c) {
        for (std::size_t i = 0; i < plane; ++i) {
          g[i] += self.grad[c * plane + i] * xn.value[c * plane + i];
        }
      }
    }
  });
}

namespace {

// Softmax over `m` entries spaced `stride` apart, starting at `base`.
template <typename T>
void softmax_strided(const T* in, T* out, std::size_t base, std::size_t m, std::size_t stride) {
  T peak = -std::numeric_limits<T>::infinity();
  for (std::size_t j = 0; j < m; ++j) peak = std::max(peak, in[base + j * stride]);
  T total = 0;
  for (std::size_t j = 0; j < m; ++j) {
    const T e = std::exp(in[base + j * stride] - peak);
    out[base + j * stride] = e;
    total += e;
  }
  for (std::size_t j = 0; j < m; ++j) out[base + j * stride] /= total;
}

// dx = y * (dy - <dy, y>) along the same strided row.
template <typename T>
void softmax_strided_backward(const T* y, const T* dy, T* dx, std::size_t base, std::size_t m,
                              std::size_t stride) {
  T dot = 0;
  for (std::size_t j = 0; j < m; ++j) dot += dy[base + j * stride] * y[base + j * stride];
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t k = base + j * stride;
    dx[k] += y[k] * (dy[k] - dot);
  }
}

}  // namespace

template <typename T>
Tensor<T> softmax_rows(const Tensor<T>& x) {
  if (x.rank() != 2) {
    throw Error(ErrorCode::kShapeMismatch, "softmax_rows expects [n,m], got " + to_string(x.shape()));
  }
  const std::size_t n = x.dim(0);
  const std::size_t m = x.dim(1);
  std::vector<T> out(x.numel());
  for (std::size_t r = 0; r < n; ++r) softmax_strided(x.values().data(), out.data(), r * m, m, 1);
  auto result = make_result<T>(x.shape(), std::move(out), {x}, {});
  if (result.requires_grad()) {
    result.node()->backward_fn = [n, m](Node<T>& self) {
      Node<T>& parent = *self.parents[0];
      if (!parent.requires_grad) return;
      auto& g = parent.ensure_grad();
      for (std::size_t r = 0; r < n; ++r) {
        softmax_strided_backward(self.value.data(), self.grad.data(), g.data(), r * m, m, 1);
      }
    };
  }
  return result;
}

template <typename T>
Tensor<T> softmax_channels(const Tensor<T>& x) {
  require_chw(x, "softmax_channels");
  const std::size_t c = x.dim(0);
  const std::size_t plane = x.dim(1) * x.dim(2);
  std::vector<T> out(x.numel());
  for (std::size_t i = 0; i < plane; ++i) softmax_strided(x.values().data(), out.data(), i, c, plane);
  auto result = make_result<T>(x.shape(), std::move(out), {x}, {});
  if (result.requires_grad()) {
    result.node()->backward_fn = [c, plane](Node<T>& self) {
      Node<T>& parent = *self.parents[0];
      if (!parent.requires_grad) return;
      auto& g = parent.ensure_grad();
      for (std::size_t i = 0; i < plane; ++i) {
        softmax_strided_backward(self.value.data(), self.grad.data(), g.data(), i, c, plane);
      }
    };
  }
  return result;
}

template <typename T>
Tensor<T> avg_pool2(const Tensor<T>& x) {
  require_chw(x, "avg_pool2");
  const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  if (h % 2 || w % 2) {
    throw Error(ErrorCode::kOddDimensions, "avg_pool2 needs even dims, got " + to_string(x.shape()));
  }
  const std::size_t oh = h / 2, ow = w / 2;
  std::vector<T> out(c * oh * ow);
  const T* in = x.values().data();
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t xx = 0; xx < ow; ++xx) {
        const T* p = in + ch * h * w + (2 * y) * w + 2 * xx;
        out[(ch * oh + y) * ow + xx] = (p[0] + p[1] + p[w] + p[w + 1]) * T(0.25);
      }
    }
  }
  return make_result<T>(Shape{c, oh, ow}, std::move(out), {x}, [c, h, w](Node<T>& self) {
    Node<T>& parent = *self.parents[0];
    if (!parent.requires_grad) return;
    auto& g = parent.ensure_grad();
    const std::size_t oh = h / 2, ow = w / 2;
    for (std::size_t ch = 0; ch < c; ++ch) {
      for (std::size_t y = 0; y < oh; ++y) {
        for (std::size_t xx = 0; xx < ow; ++xx) {
          const T d = self.grad[(ch * oh + y) * ow + xx] * T(0.25);
          T* p = g.data() + ch * h * w + (2 * y) * w + 2 * xx;
          p[0] += d;
          p[1] += d;
          p[w] += d;
          p[w + 1] += d;
        }
      }
    }
  });
}

template <typename T>
Tensor<T> gather_pixels(const Tensor<T>& x, std::span<const std::uint32_t> index) {
  require_chw(x, "gather_pixels");
  const std::size_t c = x.dim(0);
  const std::size_t plane = x.dim(1) * x.dim(2);
  const std::size_t n = index.size();
  std::vector<T> out(c * n);
  for (std::size_t j = 0; j < n; ++j) {
    if (index[j] >= plane) throw Error(ErrorCode::kShapeMismatch, "gather_pixels index out of range");
    for (std::size_t ch = 0; ch < c; ++ch) out[ch * n + j] = x.values()[ch * plane + index[j]];
  }
  std::vector<std::uint32_t> idx(index.begin(), index.end());
  return make_result<T>(Shape{c, 1, n}, std::move(out), {x},
                        [idx = std::move(idx), c, plane](Node<T>& self) {
                          Node<T>& parent = *self.parents[0];
                          if (!parent.requires_grad) return;
                          auto& g = parent.ensure_grad();
                          const std::size_t n = idx.size();
                          for (std::size_t j = 0; j < n; ++j) {
                            for (std::size_t ch = 0; ch < c; ++ch) {
                              g[ch * plane + idx[j]] += self.grad[ch * n + j];
                            }
                          }
                        });
}

template <typename T>
Tensor<T> scatter_pixels(const Tensor<T>& x, std::span<const std::uint32_t> index, std::size_t height,
                         std::size_t width) {
  if (x.rank() != 3 || x.dim(1) != 1 || x.dim(2) != index.size()) {
    throw Error(ErrorCode::kShapeMismatch, "scatter_pixels expects [C,1,n] matching the index");
  }
  const std::size_t c = x.dim(0);
  const std::size_t plane = height * width;
  const std::size_t n = index.size();
  std::vector<T> out(c * plane, T(0));
  for (std::size_t j = 0; j < n; ++j) {
    if (index[j] >= plane) throw Error(ErrorCode::kShapeMismatch, "scatter_pixels index out of range");
    for (std::size_t ch = 0; ch < c; ++ch) out[ch * plane + index[j]] = x.values()[ch * n + j];
  }
  std::vector<std::uint32_t> idx(index.begin(), index.end());
  return make_result<T>(Shape{c, height, width}, std::move(out), {x},
                        [idx = std::move(idx), c, plane](Node<T>& self) {
                          Node<T>& parent = *self.parents[0];
                          if (!parent.requires_grad) return;
                          auto& g = parent.ensure_grad();
                          const std::size_t n = idx.size();
                          for (std::size_t j = 0; j < n; ++j) {
                            for (std::size_t ch = 0; ch < c; ++ch) {
                              g[ch * n + j] += self.grad[ch * plane + idx[j]];
                            }
                          }
                        });
}

#define GINET_INSTANTIATE(T)                                                                     \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                                    \
  template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                                    \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                                    \
  template Tensor<T> scale(const Tensor<T>&, T);                                                 \
  template Tensor<T> relu(const Tensor<T>&);                                                     \
  template Tensor<T> abs(const Tensor<T>&);                                                      \
  template Tensor<T> square(const Tensor<T>&);                                                   \
  template Tensor<T> sum(const Tensor<T>&);                                                      \
  template Tensor<T> mean(const Tensor<T>&);                                                     \
  template Tensor<T> reshape(const Tensor<T>&, Shape);                                           \
  template Tensor<T> concat_channels(std::span<const Tensor<T>>);                                \
  template Tensor<T> concat_channels(const Tensor<T>&, const Tensor<T>&);                        \
  template Tensor<T> slice_channels(const Tensor<T>&, std::size_t, std::size_t);                 \
  template Tensor<T> mul_channel(const Tensor<T>&, const Tensor<T>&);                            \
  template Tensor<T> softmax_rows(const Tensor<T>&);                                             \
  template Tensor<T> softmax_channels(const Tensor<T>&);                                         \
  template Tensor<T> avg_pool2(const Tensor<T>&);                                                \
  template Tensor<T> gather_pixels(const Tensor<T>&, std::span<const std::uint32_t>);            \
  template Tensor<T> scatter_pixels(const Tensor<T>&, std::span<const std::uint32_t>, std::size_t, \
                                    std::size_t);

GINET_INSTANTIATE(float)
GINET_INSTANTIATE(double)

}  // namespace ginet::diff
