#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace ginet::raster {

// On-disk codes are the enumerator values; do not reorder.
enum class BandId : std::uint8_t {
  kB2 = 0,
  kB3 = 1,
  kB4 = 2,
  kB5 = 3,
  kB6 = 4,
  kB7 = 5,
  kB8 = 6,
  kB8a = 7,
  kB11 = 8,
  kB12 = 9,
};

inline constexpr std::array<BandId, 4> kBands10m = {BandId::kB2, BandId::kB3,
                                                    BandId::kB4, BandId::kB8};
inline constexpr std::array<BandId, 6> kBands20m = {
    BandId::kB5, BandId::kB6, BandId::kB7, BandId::kB8a, BandId::kB11, BandId::kB12};

std::string_view band_name(BandId id);
std::optional<BandId> band_from_code(std::uint8_t code);
std::optional<BandId> parse_band(std::string_view name);
bool is_10m_band(BandId id);
bool is_20m_band(BandId id);

// Single-channel real image, row-major.
struct Plane {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::vector<float> values;

  float at(std::uint32_t y, std::uint32_t x) const { return values[std::size_t(y) * width + x]; }
};

// Multi-band reflectance raster. Planar storage, band-major then row-major.
// gsd is kept in decimeters so that it round-trips exactly through the file.
class BandStack {
 public:
  BandStack() = default;
  BandStack(std::vector<BandId> bands, std::uint32_t height, std::uint32_t width,
            std::uint32_t gsd_dm);
  BandStack(std::vector<BandId> bands, std::uint32_t height, std::uint32_t width,
            std::uint32_t gsd_dm, std::vector<float> data);

  const std::vector<BandId>& bands() const { return bands_; }
  std::size_t band_count() const { return bands_.size(); }
  std::uint32_t height() const { return height_; }
  std::uint32_t width() const { return width_; }
  std::uint32_t gsd_dm() const { return gsd_dm_; }
  double gsd_m() const { return gsd_dm_ / 10.0; }
  std::size_t plane_size() const { return std::size_t(height_) * width_; }

  std::span<const float> data() const { return data_; }
  std::span<float> data() { return data_; }

  std::optional<std::size_t> index_of(BandId id) const;
  bool has(BandId id) const { return index_of(id).has_value(); }

  std::span<const float> plane(std::size_t index) const;
  std::span<float> plane(std::size_t index);
  // Throws MissingBand.
  std::span<const float> band(BandId id) const;

  // Throws ShapeMismatch / NonFinite if the stack invariants are violated.
  void validate() const;

  bool operator==(const BandStack&) const = default;

 private:
  std::vector<BandId> bands_;
  std::uint32_t height_ = 0;
  std::uint32_t width_ = 0;
  std::uint32_t gsd_dm_ = 0;
  std::vector<float> data_;
};

// Bands of the given ids, in that order, copied out of `stack`.
BandStack select_bands(const BandStack& stack, std::span<const BandId> ids);

// Concatenate stacks that share dimensions and gsd. Throws MixedGsd /
// ShapeMismatch, or InvalidArgument on a repeated band.
BandStack merge_stacks(std::span<const BandStack> stacks);

// --- "S2SR" raster container ------------------------------------------------

std::vector<std::uint8_t> encode_raster(const BandStack& stack);
BandStack decode_raster(std::span<const std::uint8_t> bytes);
void write_raster(const BandStack& stack, const std::filesystem::path& path);
BandStack read_raster(const std::filesystem::path& path);

// --- spectral indices and composites ----------------------------------------

enum class IndexKind { kNdwi, kNdmi };

// NDWI = (B3 - B8a) / (B3 + B8a), NDMI = (B8a - B11) / (B8a + B11).
// A zero denominator yields 0. Bands may come from several stacks, but all
// of them must share one gsd and size (MixedGsd / ShapeMismatch otherwise).
Plane compute_index(std::span<const BandStack> sources, IndexKind kind);
Plane compute_index(const BandStack& stack, IndexKind kind);

enum class CompositeKind { kTrueColor, kUrbanFalseColor, kSwirComposite };

std::array<BandId, 3> composite_bands(CompositeKind kind);

struct RgbComposite {
  CompositeKind kind = CompositeKind::kTrueColor;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::vector<float> pixels;  // H x W x 3, interleaved
};

RgbComposite compose(std::span<const BandStack> sources, CompositeKind kind);
RgbComposite compose(const BandStack& stack, CompositeKind kind);

struct Rgb8Image {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::vector<std::uint8_t> pixels;  // H x W x 3, interleaved
};

struct VisualOptions {
  double low_pct = 1.0;
  double high_pct = 99.0;
  double gamma = 2.2;
};

// Percentile with linear interpolation between order statistics.
double percentile(std::span<const float> values, double pct);

// Per-channel contrast stretch used by render_visual.
struct Stretch {
  double low = 0.0;
  double high = 0.0;
  double gamma = 1.0;

  static Stretch fit(std::span<const float> channel, const VisualOptions& opts);
  std::uint8_t apply(double v) const;
};

// White balance (percentile clip + rescale) and gamma, per channel.
Rgb8Image render_visual(const RgbComposite& rgb, const VisualOptions& opts = {});

// Gray rendering of an index map with the fixed range [-1, 1].
Rgb8Image render_index(const Plane& index);

// Per-pixel mean absolute error across bands, clipped at `clip` and
// rescaled to [0, 1].
Plane error_map(const BandStack& pred, const BandStack& ref, float clip);

}  // namespace ginet::raster
