#include "ginet/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "ginet/error.hpp"
#include "ginet/util.hpp"

namespace ginet::synth {

using raster::BandId;
using raster::BandStack;

namespace {

constexpr std::size_t kAllBands = 10;

struct Wave {
  double fx, fy, phase, amp;
};

// Plausible shapes: vegetation is bright in the NIR, water dark past the
// visible, built-up surfaces flat and bright in the SWIR.
std::array<double, kAllBands> base_signature(int kind) {
  switch (kind) {
    case 0: return {0.04, 0.07, 0.05, 0.12, 0.28, 0.33, 0.36, 0.38, 0.22, 0.12};  // vegetation
    case 1: return {0.06, 0.05, 0.03, 0.02, 0.015, 0.012, 0.01, 0.01, 0.005, 0.004};  // water
    case 2: return {0.12, 0.14, 0.16, 0.18, 0.20, 0.21, 0.22, 0.23, 0.28, 0.25};  // built-up
    case 3: return {0.10, 0.13, 0.17, 0.20, 0.23, 0.25, 0.27, 0.28, 0.34, 0.30};  // bare soil
    default: return {0.05, 0.08, 0.09, 0.14, 0.20, 0.23, 0.25, 0.27, 0.26, 0.18};  // crops
  }
}

std::vector<int> material_kinds(dataset::Landscape l) {
  switch (l) {
    case dataset::Landscape::kUrban: return {2, 2, 3, 0, 4};
    case dataset::Landscape::kRural: return {0, 4, 4, 3, 0};
    case dataset::Landscape::kCoastal: return {1, 1, 3, 0, 2};
    case dataset::Landscape::kMixed: break;
  }
  return {0, 1, 2, 3, 4};
}

}  // namespace

Scene make_scene(std::uint32_t size, std::uint64_t seed, dataset::Landscape landscape) {
  if (size == 0 || size % 2) {
    throw Error(ErrorCode::kOddDimensions, "synthetic scene size must be even and positive");
  }
  Rng rng(seed);
  const double n = size;

  const auto kinds = material_kinds(landscape);
  std::vector<std::array<double, kAllBands>> signatures;
  for (int k : kinds) {
    auto s = base_signature(k);
    const double gain = uniform(rng, 0.8, 1.2);
    for (auto& v : s) v *= gain * uniform(rng, 0.92, 1.08);
    signatures.push_back(s);
  }

  const std::size_t cells = std::max<std::size_t>(4, std::size_t(n * n / (22.0 * 22.0)));
  std::vector<std::array<double, 2>> sites(cells);
  std::vector<std::size_t> site_material(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    sites[i] = {uniform(rng, 0, n), uniform(rng, 0, n)};
    site_material[i] = uniform_index(rng, kinds.size());
  }

  auto waves = [&](std::size_t count, double fmin, double fmax) {
    std::vector<Wave> w(count);
    for (auto& v : w) {
      const double f = uniform(rng, fmin, fmax), a = uniform(rng, 0.0, 2 * std::numbers::pi);
      v = {f * std::cos(a), f * std::sin(a), uniform(rng, 0.0, 2 * std::numbers::pi),
           uniform(rng, 0.5, 1.0)};
    }
    return w;
  };
  const auto warp_x = waves(3, 0.01, 0.04), warp_y = waves(3, 0.01, 0.04);
  const auto texture = waves(6, 0.05, 0.6);
  std::array<double, kAllBands> band_texture_gain;
  for (auto& g : band_texture_gain) g = uniform(rng, 0.6, 1.4);

  auto eval = [](const std::vector<Wave>& w, double x, double y) {
    double acc = 0;
    for (const auto& v : w) acc += v.amp * std::sin(2 * std::numbers::pi * (v.fx * x + v.fy * y) + v.phase);
    return acc / double(w.size());
  };

  const std::size_t plane = std::size_t(size) * size;
  std::vector<float> fine(kAllBands * plane);
  for (std::uint32_t y = 0; y < size; ++y) {
    for (std::uint32_t x = 0; x < size; ++x) {
      const double wx = x + 6.0 * eval(warp_x, x, y), wy = y + 6.0 * eval(warp_y, x, y);
      std::size_t best = 0;
      double best_d = 1e300;
      for (std::size_t i = 0; i < cells; ++i) {
        const double dx = wx - sites[i][0], dy = wy - sites[i][1];
        const double d = dx * dx + dy * dy;
        if (d < best_d) best_d = d, best = i;
      }
      const auto& sig = signatures[site_material[best]];
      const double t = eval(texture, x, y);
      const double shade = 0.03 * std::sin(0.7 * double(best));
      for (std::size_t b = 0; b < kAllBands; ++b) {
        const double v = sig[b] * (1.0 + 0.25 * band_texture_gain[b] * t) + shade * sig[b];
        fine[b * plane + std::size_t(y) * size + x] = float(std::clamp(v, 0.0, 1.0));
      }
    }
  }

  Scene s;
  const std::vector<BandId> hr_ids(raster::kBands10m.begin(), raster::kBands10m.end());
  const std::vector<BandId> lr_ids(raster::kBands20m.begin(), raster::kBands20m.end());
  s.hr10 = BandStack(hr_ids, size, size, dataset::kGsd10m);
  for (std::size_t i = 0; i < hr_ids.size(); ++i) {
    const std::size_t b = std::size_t(hr_ids[i]);
    std::copy_n(fine.begin() + b * plane, plane, s.hr10.plane(i).begin());
  }
  const std::uint32_t half = size / 2;
  s.lr20 = BandStack(lr_ids, half, half, dataset::kGsd20m);
  for (std::size_t i = 0; i < lr_ids.size(); ++i) {
    const float* src = fine.data() + std::size_t(lr_ids[i]) * plane;
    auto dst = s.lr20.plane(i);
    for (std::uint32_t y = 0; y < half; ++y) {
      for (std::uint32_t x = 0; x < half; ++x) {
        const std::size_t p = std::size_t(2 * y) * size + 2 * x;
        dst[std::size_t(y) * half + x] = 0.25f * (src[p] + src[p + 1] + src[p + size] + src[p + size + 1]);
      }
    }
  }
  return s;
}

}  // namespace ginet::synth
