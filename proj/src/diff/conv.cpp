#include "ginet/diff/conv.hpp"

#include <Eigen/Core>
#include <cmath>

#include "ginet/diff/ops.hpp"
#include "ginet/error.hpp"
#include "ginet/util.hpp"

namespace ginet::diff {

namespace {

template <typename T>
using MatR = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using Map = Eigen::Map<MatR<T>>;
template <typename T>
using CMap = Eigen::Map<const MatR<T>>;

struct ConvGeom {
  std::size_t c, h, w;    // input
  std::size_t kh, kw, pad;
  std::size_t oh, ow;     // output
  std::size_t rows() const { return c * kh * kw; }
  std::size_t cols() const { return oh * ow; }
  bool trivial() const { return kh == 1 && kw == 1 && pad == 0; }
};

// col[(c*kh + ky)*kw + kx, oy*ow + ox] = x[c, oy+ky-pad, ox+kx-pad]
template <typename T>
void im2col(const T* x, const ConvGeom& g, T* col) {
  for (std::size_t c = 0; c < g.c; ++c) {
    for (std::size_t ky = 0; ky < g.kh; ++ky) {
      for (std::size_t kx = 0; kx < g.kw; ++kx) {
        T* row = col + ((c * g.kh + ky) * g.kw + kx) * g.cols();
        for (std::size_t oy = 0; oy < g.oh; ++oy) {
          const std::ptrdiff_t iy = std::ptrdiff_t(oy + ky) - std::ptrdiff_t(g.pad);
          T* dst = row + oy * g.ow;
          if (iy < 0 || iy >= std::ptrdiff_t(g.h)) {
            std::fill(dst, dst + g.ow, T(0));
            continue;
          }
          const T* src = x + (c * g.h + std::size_t(iy)) * g.w;
          for (std::size_t ox = 0; ox < g.ow; ++ox) {
            const std::ptrdiff_t ix = std::ptrdiff_t(ox + kx) - std::ptrdiff_t(g.pad);
            dst[ox] = (ix < 0 || ix >= std::ptrdiff_t(g.w)) ? T(0) : src[ix];
          }
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const T* col, const ConvGeom& g, T* x) {
  for (std::size_t c = 0; c < g.c; ++c) {
    for (std::size_t ky = 0; ky < g.kh; ++ky) {
      for (std::size_t kx = 0; kx < g.kw; ++kx) {
        const T* row = col + ((c * g.kh + ky) * g.kw + kx) * g.cols();
        for (std::size_t oy = 0; oy < g.oh; ++oy) {
          const std::ptrdiff_t iy = std::ptrdiff_t(oy + ky) - std::ptrdiff_t(g.pad);
          if (iy < 0 || iy >= std::ptrdiff_t(g.h)) continue;
          T* dst = x + (c * g.h + std::size_t(iy)) * g.w;
          const T* src = row + oy * g.ow;
          for (std::size_t ox = 0; ox < g.ow; ++ox) {
            const std::ptrdiff_t ix = std::ptrdiff_t(ox + kx) - std::ptrdiff_t(g.pad);
            if (ix >= 0 && ix < std::ptrdiff_t(g.w)) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

ConvGeom make_geom(std::size_t c, std::size_t h, std::size_t w, std::size_t kh, std::size_t kw,
                   std::size_t pad, const char* op) {
  if (h + 2 * pad < kh || w + 2 * pad < kw) {
    throw Error(ErrorCode::kShapeMismatch, std::string(op) + ": kernel larger than padded input");
  }
  return ConvGeom{c, h, w, kh, kw, pad, h + 2 * pad - kh + 1, w + 2 * pad - kw + 1};
}

template <typename T>
void require_rank(const Tensor<T>& t, std::size_t rank, const char* op, const char* what) {
  if (!t.defined() || t.rank() != rank) {
    throw Error(ErrorCode::kShapeMismatch, std::string(op) + ": bad " + what + " shape " +
                                               (t.defined() ? to_string(t.shape()) : "<none>"));
  }
}

}  // namespace

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, std::size_t pad) {
  require_rank(x, 3, "conv2d", "input");
  require_rank(w, 4, "conv2d", "weight");
  if (w.dim(1) != x.dim(0)) {
    throw Error(ErrorCode::kShapeMismatch, "conv2d: weight " + to_string(w.shape()) +
                                               " does not match input channels " +
                                               std::to_string(x.dim(0)));
  }
  const std::size_t o = w.dim(0);
  if (b.defined() && (b.rank() != 1 || b.dim(0) != o)) {
    throw Error(ErrorCode::kShapeMismatch, "conv2d: bias must be [" + std::to_string(o) + "]");
  }
  const ConvGeom g = make_geom(x.dim(0), x.dim(1), x.dim(2), w.dim(2), w.dim(3), pad, "conv2d");

  std::vector<T> out(o * g.cols());
  {
    std::vector<T> col;
    const T* colp = x.values().data();
    if (!g.trivial()) {
      col.resize(g.rows() * g.cols());
      im2col(x.values().data(), g, col.data());
      colp = col.data();
    }
    Map<T> y(out.data(), o, g.cols());
    y.noalias() = CMap<T>(w.values().data(), o, g.rows()) * CMap<T>(colp, g.rows(), g.cols());
    if (b.defined()) {
      for (std::size_t r = 0; r < o; ++r) y.row(r).array() += b.values()[r];
    }
  }

  std::vector<Tensor<T>> inputs{x, w};
  if (b.defined()) inputs.push_back(b);
  return make_result<T>(Shape{o, g.oh, g.ow}, std::move(out), std::move(inputs),
                        [g, o](Node<T>& self) {
                          Node<T>& xn = *self.parents[0];
                          Node<T>& wn = *self.parents[1];
                          CMap<T> dy(self.grad.data(), o, g.cols());
                          std::vector<T> col;
                          const T* colp = xn.value.data();
                          if (!g.trivial()) {
                            col.resize(g.rows() * g.cols());
                            im2col(xn.value.data(), g, col.data());
                            colp = col.data();
                          }
                          if (wn.requires_grad) {
                            Map<T> dw(wn.ensure_grad().data(), o, g.rows());
                            dw.noalias() += dy * CMap<T>(colp, g.rows(), g.cols()).transpose();
                          }
                          if (self.parents.size() > 2 && self.parents[2]->requires_grad) {
                            auto& db = self.parents[2]->ensure_grad();
                            // Fixed summation order regardless of buffer alignment.
                            const std::size_t n = g.cols();
                            for (std::size_t r = 0; r < o; ++r) {
                              T acc = T(0);
                              for (std::size_t i = 0; i < n; ++i) acc += self.grad[r * n + i];
                              db[r] += acc;
                            }
                          }
                          if (xn.requires_grad) {
                            auto& dx = xn.ensure_grad();
                            const CMap<T> wm(wn.value.data(), o, g.rows());
                            if (g.trivial()) {
                              Map<T>(dx.data(), g.rows(), g.cols()).noalias() += wm.transpose() * dy;
                            } else {
                              Map<T> dcol(col.data(), g.rows(), g.cols());
                              dcol.noalias() = wm.transpose() * dy;
                              col2im_add(col.data(), g, dx.data());
                            }
                          }
                        });
}

template <typename T>
Tensor<T> depthwise_conv2d(const Tensor<T>& x, const Tensor<T>& w, std::size_t pad) {
  require_rank(x, 3, "depthwise_conv2d", "input");
  require_rank(w, 3, "depthwise_conv2d", "weight");
  if (w.dim(0) != x.dim(0)) {
    throw Error(ErrorCode::kShapeMismatch, "depthwise_conv2d: weight " + to_string(w.shape()) +
                                               " vs input " + to_string(x.shape()));
  }
  const ConvGeom g = make_geom(x.dim(0), x.dim(1), x.dim(2), w.dim(1), w.dim(2), pad,
                               "depthwise_conv2d");
  // Visits every (output, tap) pair with a valid input position.
  auto for_taps = [g](auto&& fn) {
    for (std::size_t c = 0; c < g.c; ++c) {
      for (std::size_t oy = 0; oy < g.oh; ++oy) {
        for (std::size_t ox = 0; ox < g.ow; ++ox) {
          for (std::size_t ky = 0; ky < g.kh; ++ky) {
            const std::ptrdiff_t iy = std::ptrdiff_t(oy + ky) - std::ptrdiff_t(g.pad);
            if (iy < 0 || iy >= std::ptrdiff_t(g.h)) continue;
            for (std::size_t kx = 0; kx < g.kw; ++kx) {
              const std::ptrdiff_t ix = std::ptrdiff_t(ox + kx) - std::ptrdiff_t(g.pad);
              if (ix < 0 || ix >= std::ptrdiff_t(g.w)) continue;
              fn((c * g.oh + oy) * g.ow + ox, (c * g.h + std::size_t(iy)) * g.w + std::size_t(ix),
                 (c * g.kh + ky) * g.kw + kx);
            }
          }
        }
      }
    }
  };
  std::vector<T> out(g.c * g.oh * g.ow, T(0));
  const T* xv = x.values().data();
  const T* wv = w.values().data();
  for_taps([&](std::size_t o, std::size_t i, std::size_t k) { out[o] += xv[i] * wv[k]; });
  return make_result<T>(Shape{g.c, g.oh, g.ow}, std::move(out), {x, w},
                        [for_taps](Node<T>& self) {
                          Node<T>& xn = *self.parents[0];
                          Node<T>& wn = *self.parents[1];
                          const T* dy = self.grad.data();
                          if (xn.requires_grad) {
                            T* dx = xn.ensure_grad().data();
                            const T* wv = wn.value.data();
                            for_taps([&](std::size_t o, std::size_t i, std::size_t k) {
                              dx[i] += dy[o] * wv[k];
                            });
                          }
                          if (wn.requires_grad) {
                            T* dw = wn.ensure_grad().data();
                            const T* xv = xn.value.data();
                            for_taps([&](std::size_t o, std::size_t i, std::size_t k) {
                              dw[k] += dy[o] * xv[i];
                            });
                          }
                        });
}

namespace {

// Visits (low-res index, high-res index, tap) triples of the stride-2, 3x3,
// pad-1 transposed convolution.
template <typename F>
void for_s2_taps(std::size_t c, std::size_t h, std::size_t w, F&& fn) {
  const std::size_t oh = 2 * h, ow = 2 * w;
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t i = 0; i < h; ++i) {
      for (std::size_t ky = 0; ky < 3; ++ky) {
        const std::ptrdiff_t oy = std::ptrdiff_t(2 * i + ky) - 1;
        if (oy < 0 || oy >= std::ptrdiff_t(oh)) continue;
        for (std::size_t j = 0; j < w; ++j) {
          for (std::size_t kx = 0; kx < 3; ++kx) {
            const std::ptrdiff_t ox = std::ptrdiff_t(2 * j + kx) - 1;
            if (ox < 0 || ox >= std::ptrdiff_t(ow)) continue;
            fn((ch * h + i) * w + j, (ch * oh + std::size_t(oy)) * ow + std::size_t(ox),
               ch * 9 + ky * 3 + kx);
          }
        }
      }
    }
  }
}

template <typename T>
void check_s2_weight(const Tensor<T>& w, std::size_t channels, const char* op) {
  if (!w.defined() || w.rank() != 3 || w.dim(0) != channels || w.dim(1) != 3 || w.dim(2) != 3) {
    throw Error(ErrorCode::kShapeMismatch,
                std::string(op) + ": weight must be [" + std::to_string(channels) + ",3,3]");
  }
}

}  // namespace

template <typename T>
Tensor<T> transposed_conv2d_s2(const Tensor<T>& x, const Tensor<T>& w) {
  require_rank(x, 3, "transposed_conv2d_s2", "input");
  const std::size_t c = x.dim(0), h = x.dim(1), wd = x.dim(2);
  check_s2_weight(w, c, "transposed_conv2d_s2");
  std::vector<T> out(c * 4 * h * wd, T(0));
  const T* xv = x.values().data();
  const T* wv = w.values().data();
  for_s2_taps(c, h, wd, [&](std::size_t lo, std::size_t hi, std::size_t k) {
    out[hi] += xv[lo] * wv[k];
  });
  return make_result<T>(Shape{c, 2 * h, 2 * wd}, std::move(out), {x, w},
                        [c, h, wd](Node<T>& self) {
                          Node<T>& xn = *self.parents[0];
                          Node<T>& wn = *self.parents[1];
                          const T* dy = self.grad.data();
                          if (xn.requires_grad) {
                            T* dx = xn.ensure_grad().data();
                            const T* wv = wn.value.data();
                            for_s2_taps(c, h, wd, [&](std::size_t lo, std::size_t hi, std::size_t k) {
                              dx[lo] += dy[hi] * wv[k];
                            });
                          }
                          if (wn.requires_grad) {
                            T* dw = wn.ensure_grad().data();
                            const T* xv = xn.value.data();
                            for_s2_taps(c, h, wd, [&](std::size_t lo, std::size_t hi, std::size_t k) {
                              dw[k] += dy[hi] * xv[lo];
                            });
                          }
                        });
}

template <typename T>
Tensor<T> strided_conv2d_s2(const Tensor<T>& y, const Tensor<T>& w) {
  require_rank(y, 3, "strided_conv2d_s2", "input");
  if (y.dim(1) % 2 || y.dim(2) % 2) {
    throw Error(ErrorCode::kOddDimensions, "strided_conv2d_s2 needs even dims");
  }
  const std::size_t c = y.dim(0), h = y.dim(1) / 2, wd = y.dim(2) / 2;
  check_s2_weight(w, c, "strided_conv2d_s2");
  Tensor<T> out(Shape{c, h, wd});
  T* ov = out.mutable_values().data();
  const T* yv = y.values().data();
  const T* wv = w.values().data();
  for_s2_taps(c, h, wd, [&](std::size_t lo, std::size_t hi, std::size_t k) {
    ov[lo] += yv[hi] * wv[k];
  });
  return out;
}

template <typename T>
Tensor<T> unfold_patches(const Tensor<T>& x, std::size_t patch) {
  require_rank(x, 3, "unfold_patches", "input");
  if (patch % 2 == 0) throw Error(ErrorCode::kInvalidArgument, "patch size must be odd");
  const ConvGeom g =
      make_geom(x.dim(0), x.dim(1), x.dim(2), patch, patch, (patch - 1) / 2, "unfold_patches");
  if (patch == 1) return reshape(x, x.shape());
  std::vector<T> out(g.rows() * g.cols());
  im2col(x.values().data(), g, out.data());
  return make_result<T>(Shape{g.rows(), g.oh, g.ow}, std::move(out), {x}, [g](Node<T>& self) {
    Node<T>& xn = *self.parents[0];
    if (!xn.requires_grad) return;
    col2im_add(self.grad.data(), g, xn.ensure_grad().data());
  });
}

double cubic_weight(double t, double a) {
  t = std::abs(t);
  if (t <= 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
  if (t < 2.0) return ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a;
  return 0.0;
}

template <typename T>
Tensor<T> bicubic_up2(const Tensor<T>& x) {
  require_rank(x, 3, "bicubic_up2", "input");
  const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  if (h < 2 || w < 2) throw Error(ErrorCode::kShapeMismatch, "bicubic_up2 needs h, w >= 2");
  // Output 2i sits at source i - 0.25, output 2i+1 at i + 0.25.
  static const double even[4] = {cubic_weight(1.75), cubic_weight(0.75), cubic_weight(0.25),
                                 cubic_weight(1.25)};  // taps i-2 .. i+1
  static const double odd[4] = {cubic_weight(1.25), cubic_weight(0.25), cubic_weight(0.75),
                                cubic_weight(1.75)};   // taps i-1 .. i+2
  auto taps = [](std::size_t o, std::ptrdiff_t n, std::ptrdiff_t idx[4], const double*& wt) {
    const std::ptrdiff_t i = std::ptrdiff_t(o / 2);
    const std::ptrdiff_t first = (o % 2 == 0) ? i - 2 : i - 1;
    wt = (o % 2 == 0) ? even : odd;
    for (int k = 0; k < 4; ++k) idx[k] = reflect_index(first + k, n);
  };

  const std::size_t oh = 2 * h, ow = 2 * w;
  std::vector<double> rows(h * ow);
  std::vector<T> out(c * oh * ow);
  T* ov = out.data();
  const T* xv = x.values().data();
  std::ptrdiff_t idx[4] = {};
  const double* wt = nullptr;
  for (std::size_t ch = 0; ch < c; ++ch) {
    const T* src = xv + ch * h * w;
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        taps(ox, std::ptrdiff_t(w), idx, wt);
        double acc = 0.0;
        for (int k = 0; k < 4; ++k) acc += wt[k] * double(src[y * w + idx[k]]);
        rows[y * ow + ox] = acc;
      }
    }
    for (std::size_t oy = 0; oy < oh; ++oy) {
      taps(oy, std::ptrdiff_t(h), idx, wt);
      for (std::size_t ox = 0; ox < ow; ++ox) {
        double acc = 0.0;
        for (int k = 0; k < 4; ++k) acc += wt[k] * rows[idx[k] * ow + ox];
        ov[(ch * oh + oy) * ow + ox] = static_cast<T>(acc);
      }
    }
  }
  return make_result<T>(Shape{c, oh, ow}, std::move(out), {x}, [=](Node<T>& self) mutable {
    Node<T>& xn = *self.parents[0];
    if (!xn.requires_grad) return;
    T* gx = xn.ensure_grad().data();
    const T* gy = self.grad.data();
    std::vector<double> grows(h * ow);
    for (std::size_t ch = 0; ch < c; ++ch) {
      std::fill(grows.begin(), grows.end(), 0.0);
      for (std::size_t oy = 0; oy < oh; ++oy) {
        taps(oy, std::ptrdiff_t(h), idx, wt);
        for (std::size_t ox = 0; ox < ow; ++ox) {
          const double g = double(gy[(ch * oh + oy) * ow + ox]);
          for (int k = 0; k < 4; ++k) grows[idx[k] * ow + ox] += wt[k] * g;
        }
      }
      T* dst = gx + ch * h * w;
      for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t ox = 0; ox < ow; ++ox) {
          taps(ox, std::ptrdiff_t(w), idx, wt);
          for (int k = 0; k < 4; ++k) dst[y * w + idx[k]] += static_cast<T>(wt[k] * grows[y * ow + ox]);
        }
      }
    }
  });
}

#define GINET_INSTANTIATE(T)                                                                  \
  template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, std::size_t); \
  template Tensor<T> depthwise_conv2d(const Tensor<T>&, const Tensor<T>&, std::size_t);       \
  template Tensor<T> transposed_conv2d_s2(const Tensor<T>&, const Tensor<T>&);                \
  template Tensor<T> strided_conv2d_s2(const Tensor<T>&, const Tensor<T>&);                   \
  template Tensor<T> unfold_patches(const Tensor<T>&, std::size_t);                           \
  template Tensor<T> bicubic_up2(const Tensor<T>&);

GINET_INSTANTIATE(float)
GINET_INSTANTIATE(double)

}  // namespace ginet::diff
