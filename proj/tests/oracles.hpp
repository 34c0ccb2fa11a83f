#pragma once

// Brute-force reference implementations. Each is written from the textbook
// definition with plain loops and shares no code with the library.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

// Flat [C,H,W] buffer.
struct Cube {
  std::size_t c = 0, h = 0, w = 0;
  std::vector<double> v;

  Cube() = default;
  Cube(std::size_t c_, std::size_t h_, std::size_t w_) : c(c_), h(h_), w(w_), v(c_ * h_ * w_, 0.0) {}
  double& at(std::size_t k, std::size_t y, std::size_t x) { return v[(k * h + y) * w + x]; }
  double at(std::size_t k, std::size_t y, std::size_t x) const { return v[(k * h + y) * w + x]; }
  // Zero outside the image.
  double zpad(std::size_t k, long y, long x) const {
    if (y < 0 || x < 0 || y >= long(h) || x >= long(w)) return 0.0;
    return at(k, std::size_t(y), std::size_t(x));
  }
};

inline std::vector<double> random_values(std::size_t n, std::uint64_t seed, double lo = -1, double hi = 1) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> out(n);
  for (auto& x : out) x = d(rng);
  return out;
}

// out[o,y,x] = b[o] + sum_{c,i,j} w[o,c,i,j] x[c, y+i-pad, x+j-pad]
inline Cube conv2d(const Cube& x, const std::vector<double>& w, const std::vector<double>& b,
                   std::size_t out_c, std::size_t k, std::size_t pad) {
  const std::size_t oh = x.h + 2 * pad - k + 1, ow = x.w + 2 * pad - k + 1;
  Cube out(out_c, oh, ow);
  for (std::size_t o = 0; o < out_c; ++o)
    for (std::size_t y = 0; y < oh; ++y)
      for (std::size_t xx = 0; xx < ow; ++xx) {
        double acc = b.empty() ? 0.0 : b[o];
        for (std::size_t c = 0; c < x.c; ++c)
          for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j)
              acc += w[((o * x.c + c) * k + i) * k + j] *
                     x.zpad(c, long(y + i) - long(pad), long(xx + j) - long(pad));
        out.at(o, y, xx) = acc;
      }
  return out;
}

inline Cube depthwise(const Cube& x, const std::vector<double>& w, std::size_t k, std::size_t pad) {
  Cube out(x.c, x.h + 2 * pad - k + 1, x.w + 2 * pad - k + 1);
  for (std::size_t c = 0; c < x.c; ++c)
    for (std::size_t y = 0; y < out.h; ++y)
      for (std::size_t xx = 0; xx < out.w; ++xx) {
        double acc = 0;
        for (std::size_t i = 0; i < k; ++i)
          for (std::size_t j = 0; j < k; ++j)
            acc += w[(c * k + i) * k + j] * x.zpad(c, long(y + i) - long(pad), long(xx + j) - long(pad));
        out.at(c, y, xx) = acc;
      }
  return out;
}

// Stride-2 transposed convolution, 3x3, padding 1, output padding 1, by
// scattering every input pixel.
inline Cube transposed_s2(const Cube& x, const std::vector<double>& w) {
  Cube out(x.c, 2 * x.h, 2 * x.w);
  for (std::size_t c = 0; c < x.c; ++c)
    for (std::size_t i = 0; i < x.h; ++i)
      for (std::size_t j = 0; j < x.w; ++j)
        for (long ky = 0; ky < 3; ++ky)
          for (long kx = 0; kx < 3; ++kx) {
            const long y = 2 * long(i) + ky - 1, xx = 2 * long(j) + kx - 1;
            if (y < 0 || xx < 0 || y >= long(out.h) || xx >= long(out.w)) continue;
            out.at(c, std::size_t(y), std::size_t(xx)) += x.at(c, i, j) * w[(c * 3 + ky) * 3 + kx];
          }
  return out;
}

inline Cube avg_pool2(const Cube& x) {
  Cube out(x.c, x.h / 2, x.w / 2);
  for (std::size_t c = 0; c < x.c; ++c)
    for (std::size_t y = 0; y < out.h; ++y)
      for (std::size_t xx = 0; xx < out.w; ++xx)
        out.at(c, y, xx) = 0.25 * (x.at(c, 2 * y, 2 * xx) + x.at(c, 2 * y, 2 * xx + 1) +
                                   x.at(c, 2 * y + 1, 2 * xx) + x.at(c, 2 * y + 1, 2 * xx + 1));
  return out;
}

// Keys cubic kernel.
inline double keys(double t, double a = -0.5) {
  t = std::abs(t);
  if (t < 1) return (a + 2) * t * t * t - (a + 3) * t * t + 1;
  if (t < 2) return a * t * t * t - 5 * a * t * t + 8 * a * t - 4 * a;
  return 0;
}

// Half-sample symmetric index.
inline long mirror(long i, long n) {
  while (i < 0 || i >= n) i = i < 0 ? -i - 1 : 2 * n - i - 1;
  return i;
}

// 2x bicubic with pixel centers at (i + 0.5) / 2 - 0.5 in source coordinates:
// the output pixel is a 4x4 weighted sum of its source neighbours.
inline Cube bicubic_up2(const Cube& x) {
  Cube out(x.c, 2 * x.h, 2 * x.w);
  for (std::size_t c = 0; c < x.c; ++c)
    for (std::size_t oy = 0; oy < out.h; ++oy)
      for (std::size_t ox = 0; ox < out.w; ++ox) {
        const double sy = (oy + 0.5) / 2 - 0.5, sx = (ox + 0.5) / 2 - 0.5;
        const long y0 = long(std::floor(sy)), x0 = long(std::floor(sx));
        double acc = 0;
        for (long dy = -1; dy <= 2; ++dy)
          for (long dx = -1; dx <= 2; ++dx) {
            const double wgt = keys(sy - double(y0 + dy)) * keys(sx - double(x0 + dx));
            acc += wgt * x.at(c, std::size_t(mirror(y0 + dy, long(x.h))),
                              std::size_t(mirror(x0 + dx, long(x.w))));
          }
        out.at(c, oy, ox) = acc;
      }
  return out;
}

// Dense per-tile attention: for each non-overlapping window x window tile
// (clipped at the border), softmax over exp(<q_i, k_j>) and average v.
inline Cube window_attention(const Cube& q, const Cube& k, const Cube& v, std::size_t window) {
  Cube out(v.c, v.h, v.w);
  for (std::size_t ty = 0; ty < q.h; ty += window)
    for (std::size_t tx = 0; tx < q.w; tx += window) {
      std::vector<std::pair<std::size_t, std::size_t>> pix;
      for (std::size_t y = ty; y < std::min(q.h, ty + window); ++y)
        for (std::size_t x = tx; x < std::min(q.w, tx + window); ++x) pix.push_back({y, x});
      for (auto [yi, xi] : pix) {
        std::vector<double> s;
        for (auto [yj, xj] : pix) {
          double d = 0;
          for (std::size_t c = 0; c < q.c; ++c) d += q.at(c, yi, xi) * k.at(c, yj, xj);
          s.push_back(d);
        }
        double total = 0;
        for (double& e : s) total += (e = std::exp(e));
        for (std::size_t c = 0; c < v.c; ++c) {
          double acc = 0;
          for (std::size_t j = 0; j < pix.size(); ++j) acc += s[j] / total * v.at(c, pix[j].first, pix[j].second);
          out.at(c, yi, xi) = acc;
        }
      }
    }
  return out;
}

// --- metrics ------------------------------------------------------------------

inline double psnr(const Cube& p, const Cube& r, double range = 1.0) {
  double se = 0;
  for (std::size_t i = 0; i < p.v.size(); ++i) se += (p.v[i] - r.v[i]) * (p.v[i] - r.v[i]);
  const double mse = se / double(p.v.size());
  return 10 * std::log10(range * range / mse);
}

// SSIM by explicitly visiting every 11x11 window with 2-D Gaussian weights.
inline double ssim(const Cube& p, const Cube& r, double range = 1.0) {
  const int k = 11;
  const double sigma = 1.5;
  std::vector<double> g(k * k);
  double gs = 0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) gs += g[i * k + j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / (2 * sigma * sigma));
  for (auto& x : g) x /= gs;
  const double c1 = std::pow(0.01 * range, 2), c2 = std::pow(0.03 * range, 2);
  double total = 0;
  for (std::size_t c = 0; c < p.c; ++c) {
    double band = 0;
    std::size_t count = 0;
    for (std::size_t y = 0; y + k <= p.h; ++y)
      for (std::size_t x = 0; x + k <= p.w; ++x) {
        double mx = 0, my = 0;
        for (int i = 0; i < k; ++i)
          for (int j = 0; j < k; ++j) {
            mx += g[i * k + j] * p.at(c, y + i, x + j);
            my += g[i * k + j] * r.at(c, y + i, x + j);
          }
        double vx = 0, vy = 0, cxy = 0;
        for (int i = 0; i < k; ++i)
          for (int j = 0; j < k; ++j) {
            const double a = p.at(c, y + i, x + j) - mx, b = r.at(c, y + i, x + j) - my;
            vx += g[i * k + j] * a * a;
            vy += g[i * k + j] * b * b;
            cxy += g[i * k + j] * a * b;
          }
        band += (2 * mx * my + c1) * (2 * cxy + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2));
        ++count;
      }
    total += band / double(count);
  }
  return total / double(p.c);
}

inline double sam_degrees(const Cube& p, const Cube& r) {
  double acc = 0;
  for (std::size_t y = 0; y < p.h; ++y)
    for (std::size_t x = 0; x < p.w; ++x) {
      double d = 0, a = 0, b = 0;
      for (std::size_t c = 0; c < p.c; ++c) {
        d += p.at(c, y, x) * r.at(c, y, x);
        a += p.at(c, y, x) * p.at(c, y, x);
        b += r.at(c, y, x) * r.at(c, y, x);
      }
      if (a == 0 || b == 0) continue;
      acc += std::acos(std::max(-1.0, std::min(1.0, d / std::sqrt(a * b))));
    }
  return acc / double(p.h * p.w) * 180 / std::numbers::pi;
}

inline double ergas(const Cube& p, const Cube& r, double ratio = 2) {
  double acc = 0;
  for (std::size_t c = 0; c < p.c; ++c) {
    double se = 0, mu = 0;
    for (std::size_t y = 0; y < p.h; ++y)
      for (std::size_t x = 0; x < p.w; ++x) {
        se += std::pow(p.at(c, y, x) - r.at(c, y, x), 2);
        mu += r.at(c, y, x);
      }
    const double n = double(p.h * p.w);
    acc += (se / n) / ((mu / n) * (mu / n));
  }
  return 100 / ratio * std::sqrt(acc / double(p.c));
}

// Central finite difference of f at x along coordinate i.
inline double central_difference(const std::function<double()>& f, double& xi, double eps) {
  const double saved = xi;
  xi = saved + eps;
  const double up = f();
  xi = saved - eps;
  const double down = f();
  xi = saved;
  return (up - down) / (2 * eps);
}

}  // namespace oracle
