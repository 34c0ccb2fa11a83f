#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "ginet/raster.hpp"
#include "helpers.hpp"

using namespace ginet::raster;
using ginet::ErrorCode;
using testing_util::constant_stack;
using testing_util::filled_stack;
using testing_util::random_stack;

namespace {

std::vector<BandId> bands20() { return {kBands20m.begin(), kBands20m.end()}; }
std::vector<BandId> bands10() { return {kBands10m.begin(), kBands10m.end()}; }

std::vector<std::uint8_t> slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST(RasterFile, RoundTripIsByteExact) {
  testing_util::TempDir dir;
  const auto stack = random_stack(bands20(), 17, 23, 200, 3);
  write_raster(stack, dir / "a.s2sr");
  const auto back = read_raster(dir / "a.s2sr");
  EXPECT_EQ(back, stack);
  write_raster(back, dir / "b.s2sr");
  EXPECT_EQ(slurp(dir / "a.s2sr"), slurp(dir / "b.s2sr"));
}

TEST(RasterFile, SixBand120FileSize) {
  testing_util::TempDir dir;
  write_raster(constant_stack(bands20(), 120, 120, 200, 0.25f), dir / "s.s2sr");
  EXPECT_EQ(std::filesystem::file_size(dir / "s.s2sr"), 345630u);
}

TEST(RasterFile, DistinctDecodeErrors) {
  auto bytes = encode_raster(random_stack(bands10(), 4, 4, 100, 1));

  auto bad_magic = bytes;
  std::memcpy(bad_magic.data(), "XXXX", 4);
  EXPECT_ERROR(ErrorCode::kBadMagic, decode_raster(bad_magic));

  auto truncated = bytes;
  truncated.resize(truncated.size() - 3);
  EXPECT_ERROR(ErrorCode::kTruncated, decode_raster(truncated));
  EXPECT_ERROR(ErrorCode::kTruncated, decode_raster(std::span(bytes.data(), 10)));

  auto unknown = bytes;
  unknown[24] = 0xEE;  // first band code
  EXPECT_ERROR(ErrorCode::kUnknownBand, decode_raster(unknown));

  auto nan = bytes;
  const float q = std::numeric_limits<float>::quiet_NaN();
  std::memcpy(nan.data() + 24 + 4 + 8, &q, 4);
  EXPECT_ERROR(ErrorCode::kNonFinite, decode_raster(nan));

  auto version = bytes;
  version[4] = 9;
  EXPECT_ERROR(ErrorCode::kBadVersion, decode_raster(version));
}

TEST(RasterFile, MissingFileIsIoError) {
  EXPECT_ERROR(ErrorCode::kIo, read_raster("/nonexistent/dir/x.s2sr"));
}

TEST(BandStackTest, RejectsInconsistentLength) {
  EXPECT_ERROR(ErrorCode::kShapeMismatch, BandStack({BandId::kB2}, 2, 2, 100, std::vector<float>(3)));
}

TEST(BandStackTest, BandLookup) {
  const auto s = filled_stack(bands10(), 2, 2, 100, [](auto b, auto, auto) { return float(b); });
  EXPECT_EQ(s.band(BandId::kB8)[0], 3.0f);
  EXPECT_ERROR(ErrorCode::kMissingBand, s.band(BandId::kB11));
  EXPECT_EQ(parse_band("b8A"), BandId::kB8a);
  EXPECT_FALSE(band_from_code(10).has_value());
}

TEST(SpectralIndex, NdwiSymmetricNumeratorIsZero) {
  const auto s = random_stack({BandId::kB3, BandId::kB8a}, 5, 5, 200, 2);
  auto copy = s;
  auto b8a = copy.plane(1);
  auto b3 = copy.plane(0);
  std::copy(b3.begin(), b3.end(), b8a.begin());
  for (float v : compute_index(copy, IndexKind::kNdwi).values) EXPECT_EQ(v, 0.0f);
}

TEST(SpectralIndex, PointValues) {
  const BandStack ndwi({BandId::kB3, BandId::kB8a}, 1, 1, 200, {0.6f, 0.2f});
  EXPECT_NEAR(compute_index(ndwi, IndexKind::kNdwi).values[0], 0.5, 1e-6);
  const BandStack ndmi({BandId::kB8a, BandId::kB11}, 1, 1, 200, {0.3f, 0.3f});
  EXPECT_EQ(compute_index(ndmi, IndexKind::kNdmi).values[0], 0.0f);
  const BandStack zero({BandId::kB3, BandId::kB8a}, 1, 1, 200, {0.0f, 0.0f});
  EXPECT_EQ(compute_index(zero, IndexKind::kNdwi).values[0], 0.0f);
}

TEST(SpectralIndex, BoundedForNonnegativeInputs) {
  const auto s = random_stack({BandId::kB3, BandId::kB8a, BandId::kB11}, 9, 9, 200, 5, 0.0, 1.0);
  for (auto kind : {IndexKind::kNdwi, IndexKind::kNdmi})
    for (float v : compute_index(s, kind).values) {
      EXPECT_GE(v, -1.0f);
      EXPECT_LE(v, 1.0f);
    }
}

TEST(SpectralIndex, SourceErrors) {
  const BandStack b3({BandId::kB3}, 2, 2, 100, std::vector<float>(4, 0.1f));
  const BandStack b8a({BandId::kB8a}, 2, 2, 200, std::vector<float>(4, 0.1f));
  const std::vector<BandStack> mixed{b3, b8a};
  EXPECT_ERROR(ErrorCode::kMixedGsd, compute_index(mixed, IndexKind::kNdwi));
  EXPECT_ERROR(ErrorCode::kMissingBand, compute_index(b3, IndexKind::kNdwi));
}

TEST(Composite, ChannelOrderAndNoMutation) {
  std::vector<BandId> all = bands10();
  const auto twenty = bands20();
  all.insert(all.end(), twenty.begin(), twenty.end());
  const auto s = random_stack(all, 3, 4, 200, 8);
  const auto check = [&](CompositeKind kind, std::array<BandId, 3> expected) {
    EXPECT_EQ(composite_bands(kind), expected);
    const auto rgb = compose(s, kind);
    for (int c = 0; c < 3; ++c) {
      const auto src = s.band(expected[c]);
      for (std::size_t i = 0; i < src.size(); ++i) EXPECT_EQ(rgb.pixels[3 * i + c], src[i]);
    }
  };
  check(CompositeKind::kTrueColor, {BandId::kB4, BandId::kB3, BandId::kB2});
  check(CompositeKind::kUrbanFalseColor, {BandId::kB12, BandId::kB11, BandId::kB4});
}

TEST(Composite, SwirWithoutB12Fails) {
  const auto s = random_stack({BandId::kB8a, BandId::kB11, BandId::kB4}, 2, 2, 200, 1);
  EXPECT_ERROR(ErrorCode::kMissingBand, compose(s, CompositeKind::kSwirComposite));
}

TEST(RenderVisual, ConstantChannelRendersBlack) {
  RgbComposite rgb{CompositeKind::kTrueColor, 4, 4, std::vector<float>(48, 0.3f)};
  for (auto v : render_visual(rgb).pixels) EXPECT_EQ(v, 0);
}

TEST(RenderVisual, GammaOneIsIdentityOnUnitRange) {
  RgbComposite rgb{CompositeKind::kTrueColor, 1, 256, std::vector<float>(768)};
  for (std::size_t i = 0; i < 256; ++i)
    for (int c = 0; c < 3; ++c) rgb.pixels[3 * i + c] = float(i) / 255.0f;
  const auto out = render_visual(rgb, {0.0, 100.0, 1.0});
  for (std::size_t i = 0; i < 256; ++i) EXPECT_EQ(out.pixels[3 * i], i);
}

TEST(RenderVisual, MidpointUnderGamma) {
  std::vector<float> ramp(256);
  for (std::size_t i = 0; i < 256; ++i) ramp[i] = float(i) / 255.0f;
  const auto st = Stretch::fit(ramp, {0.0, 100.0, 2.2});
  EXPECT_EQ(st.apply(0.5), 186);
}

TEST(RenderVisual, MonotonePerChannel) {
  const auto values = oracle::random_values(300, 11, -0.2, 1.3);
  RgbComposite rgb{CompositeKind::kTrueColor, 10, 10, std::vector<float>(values.begin(), values.end())};
  const auto out = render_visual(rgb);
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < 100; ++i)
      for (std::size_t j = 0; j < 100; ++j)
        if (rgb.pixels[3 * i + c] < rgb.pixels[3 * j + c]) EXPECT_LE(out.pixels[3 * i + c], out.pixels[3 * j + c]);
}

TEST(RenderVisual, RejectsBadOptionsAndEmptyInput) {
  RgbComposite rgb{CompositeKind::kTrueColor, 1, 1, {0.f, 0.f, 0.f}};
  EXPECT_ERROR(ErrorCode::kInvalidArgument, render_visual(rgb, {50.0, 10.0, 2.2}));
  RgbComposite empty{CompositeKind::kTrueColor, 0, 0, {}};
  EXPECT_ERROR(ErrorCode::kInvalidArgument, render_visual(empty));
}

TEST(RenderIndex, ZeroIsMidGray) {
  const Plane p{2, 2, std::vector<float>(4, 0.0f)};
  for (auto v : render_index(p).pixels) EXPECT_EQ(v, 128);
}

TEST(ErrorMap, Cases) {
  const auto ref = random_stack(bands20(), 3, 3, 200, 4);
  for (float v : error_map(ref, ref, 0.05f).values) EXPECT_EQ(v, 0.0f);

  const BandStack a({BandId::kB5}, 2, 2, 200, std::vector<float>(4, 0.10f));
  const BandStack b({BandId::kB5}, 2, 2, 200, std::vector<float>(4, 0.12f));
  for (float v : error_map(a, b, 0.01f).values) EXPECT_EQ(v, 1.0f);

  const BandStack p2({BandId::kB5, BandId::kB6}, 1, 1, 200, {0.11f, 0.53f});
  const BandStack r2({BandId::kB5, BandId::kB6}, 1, 1, 200, {0.10f, 0.50f});
  EXPECT_NEAR(error_map(p2, r2, 0.04f).values[0], 0.5, 1e-5);

  EXPECT_ERROR(ErrorCode::kShapeMismatch, error_map(a, p2, 0.1f));
}
