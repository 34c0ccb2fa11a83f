#pragma once

#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <functional>
#include <string>
#include <unistd.h>

#include "ginet/diff/tensor.hpp"
#include "ginet/error.hpp"
#include "ginet/raster.hpp"
#include "oracles.hpp"

namespace testing_util {

namespace fs = std::filesystem;
using ginet::ErrorCode;
using ginet::raster::BandId;
using ginet::raster::BandStack;

// Fresh directory under the build's temp area, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("ginet_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline BandStack constant_stack(std::vector<BandId> bands, std::uint32_t h, std::uint32_t w,
                                std::uint32_t gsd, float value) {
  const std::size_t n = bands.size() * h * w;
  return BandStack(std::move(bands), h, w, gsd, std::vector<float>(n, value));
}

inline BandStack filled_stack(std::vector<BandId> bands, std::uint32_t h, std::uint32_t w,
                              std::uint32_t gsd, const std::function<float(std::size_t, std::size_t, std::size_t)>& f) {
  std::vector<float> data(bands.size() * h * w);
  for (std::size_t b = 0; b < bands.size(); ++b)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) data[(b * h + y) * w + x] = f(b, y, x);
  return BandStack(std::move(bands), h, w, gsd, std::move(data));
}

inline BandStack random_stack(std::vector<BandId> bands, std::uint32_t h, std::uint32_t w,
                              std::uint32_t gsd, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  const auto v = oracle::random_values(bands.size() * h * w, seed, lo, hi);
  std::vector<float> data(v.begin(), v.end());
  return BandStack(std::move(bands), h, w, gsd, std::move(data));
}

template <typename T>
oracle::Cube to_cube(const ginet::diff::Tensor<T>& t) {
  oracle::Cube c(t.dim(0), t.dim(1), t.dim(2));
  for (std::size_t i = 0; i < c.v.size(); ++i) c.v[i] = double(t.values()[i]);
  return c;
}

template <typename T>
ginet::diff::Tensor<T> from_cube(const oracle::Cube& c, bool requires_grad = false) {
  std::vector<T> v(c.v.begin(), c.v.end());
  return ginet::diff::Tensor<T>({c.c, c.h, c.w}, std::move(v), requires_grad);
}

inline oracle::Cube random_cube(std::size_t c, std::size_t h, std::size_t w, std::uint64_t seed,
                                double lo = -1, double hi = 1) {
  oracle::Cube out(c, h, w);
  out.v = oracle::random_values(out.v.size(), seed, lo, hi);
  return out;
}

template <typename T>
double max_abs_diff(const ginet::diff::Tensor<T>& t, const oracle::Cube& c) {
  double m = 0;
  for (std::size_t i = 0; i < c.v.size(); ++i) m = std::max(m, std::abs(double(t.values()[i]) - c.v[i]));
  return m;
}

// Runs `f` and reports the ErrorCode it threw.
inline std::optional<ErrorCode> error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ginet::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace testing_util

#define EXPECT_ERROR(code, stmt) \
  EXPECT_EQ(::testing_util::error_of([&] { (void)(stmt); }), std::optional<ginet::ErrorCode>(code))
