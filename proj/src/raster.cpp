#include "ginet/raster.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "ginet/error.hpp"

namespace ginet::raster {

namespace {

constexpr std::array<char, 4> kMagic = {'S', '2', 'S', 'R'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 4 + 5 * 4;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(in[offset + i]) << (8 * i);
  return v;
}

}  // namespace

std::string_view band_name(BandId id) {
  switch (id) {
    case BandId::kB2: return "B2";
    case BandId::kB3: return "B3";
    case BandId::kB4: return "B4";
    case BandId::kB5: return "B5";
    case BandId::kB6: return "B6";
    case BandId::kB7: return "B7";
    case BandId::kB8: return "B8";
    case BandId::kB8a: return "B8a";
    case BandId::kB11: return "B11";
    case BandId::kB12: return "B12";
  }
  return "?";
}

std::optional<BandId> band_from_code(std::uint8_t code) {
  if (code > static_cast<std::uint8_t>(BandId::kB12)) return std::nullopt;
  return static_cast<BandId>(code);
}

std::optional<BandId> parse_band(std::string_view name) {
  for (std::uint8_t c = 0; c <= static_cast<std::uint8_t>(BandId::kB12); ++c) {
    const auto id = static_cast<BandId>(c);
    const auto ref = band_name(id);
    if (ref.size() == name.size() &&
        std::equal(ref.begin(), ref.end(), name.begin(), [](char a, char b) {
          return std::tolower(static_cast<unsigned char>(a)) ==
                 std::tolower(static_cast<unsigned char>(b));
        })) {
      return id;
    }
  }
  return std::nullopt;
}

bool is_10m_band(BandId id) {
  return std::find(kBands10m.begin(), kBands10m.end(), id) != kBands10m.end();
}

bool is_20m_band(BandId id) {
  return std::find(kBands20m.begin(), kBands20m.end(), id) != kBands20m.end();
}

// --- BandStack ---------------------------------------------------------------

BandStack::BandStack(std::vector<BandId> bands, std::uint32_t height, std::uint32_t width,
                     std::uint32_t gsd_dm)
    : bands_(std::move(bands)), height_(height), width_(width), gsd_dm_(gsd_dm) {
  data_.assign(bands_.size() * plane_size(), 0.0f);
}

BandStack::BandStack(std::vector<BandId> bands, std::uint32_t height, std::uint32_t width,
                     std::uint32_t gsd_dm, std::vector<float> data)
    : bands_(std::move(bands)),
      height_(height),
      width_(width),
      gsd_dm_(gsd_dm),
      data_(std::move(data)) {
  if (data_.size() != bands_.size() * plane_size()) {
    throw Error(ErrorCode::kShapeMismatch,
                "data length " + std::to_string(data_.size()) + " != bands x height x width");
  }
}

std::optional<std::size_t> BandStack::index_of(BandId id) const {
  auto it = std::find(bands_.begin(), bands_.end(), id);
  if (it == bands_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - bands_.begin());
}

std::span<const float> BandStack::plane(std::size_t index) const {
  return std::span<const float>(data_).subspan(index * plane_size(), plane_size());
}

std::span<float> BandStack::plane(std::size_t index) {
  return std::span<float>(data_).subspan(index * plane_size(), plane_size());
}

std::span<const float> BandStack::band(BandId id) const {
  auto idx = index_of(id);
  if (!idx) throw Error(ErrorCode::kMissingBand, std::string(band_name(id)));
  return plane(*idx);
}

void BandStack::validate() const {
  if (data_.size() != bands_.size() * plane_size()) {
    throw Error(ErrorCode::kShapeMismatch, "data length does not match bands x height x width");
  }
  for (std::size_t i = 0; i < bands_.size(); ++i) {
    for (std::size_t j = i + 1; j < bands_.size(); ++j) {
      if (bands_[i] == bands_[j]) {
        throw Error(ErrorCode::kInvalidArgument,
                    "band listed twice: " + std::string(band_name(bands_[i])));
      }
    }
  }
  for (float v : data_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kNonFinite, "stack holds a non-finite value");
  }
}

BandStack select_bands(const BandStack& stack, std::span<const BandId> ids) {
  BandStack out(std::vector<BandId>(ids.begin(), ids.end()), stack.height(), stack.width(),
                stack.gsd_dm());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto src = stack.band(ids[i]);
    std::copy(src.begin(), src.end(), out.plane(i).begin());
  }
  return out;
}

BandStack merge_stacks(std::span<const BandStack> stacks) {
  if (stacks.empty()) throw Error(ErrorCode::kInvalidArgument, "nothing to merge");
  const auto& first = stacks.front();
  std::vector<BandId> bands;
  std::vector<float> data;
  for (const auto& s : stacks) {
    if (s.gsd_dm() != first.gsd_dm()) throw Error(ErrorCode::kMixedGsd, "stacks differ in gsd");
    if (s.height() != first.height() || s.width() != first.width()) {
      throw Error(ErrorCode::kShapeMismatch, "stacks differ in size");
    }
    for (BandId id : s.bands()) {
      if (std::find(bands.begin(), bands.end(), id) != bands.end()) {
        throw Error(ErrorCode::kInvalidArgument,
                    "band present in two stacks: " + std::string(band_name(id)));
      }
      bands.push_back(id);
    }
    data.insert(data.end(), s.data().begin(), s.data().end());
  }
  return BandStack(std::move(bands), first.height(), first.width(), first.gsd_dm(),
                   std::move(data));
}

// --- S2SR container ----------------------------------------------------------

std::vector<std::uint8_t> encode_raster(const BandStack& stack) {
  stack.validate();
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + stack.band_count() + stack.data().size() * 4);
  out.insert(out.end(), kMagic.begin(), kMagic.end());
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(stack.band_count()));
  put_u32(out, stack.height());
  put_u32(out, stack.width());
  put_u32(out, stack.gsd_dm());
  for (BandId id : stack.bands()) out.push_back(static_cast<std::uint8_t>(id));
  for (float v : stack.data()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

BandStack decode_raster(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw Error(ErrorCode::kTruncated, "file shorter than magic");
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin(),
                  [](char a, std::uint8_t b) { return static_cast<std::uint8_t>(a) == b; })) {
    throw Error(ErrorCode::kBadMagic, "expected \"S2SR\"");
  }
  if (bytes.size() < kHeaderBytes) throw Error(ErrorCode::kTruncated, "header truncated");
  const std::uint32_t version = get_u32(bytes, 4);
  if (version != kVersion) {
    throw Error(ErrorCode::kBadVersion, "unsupported version " + std::to_string(version));
  }
  const std::uint32_t count = get_u32(bytes, 8);
  const std::uint32_t height = get_u32(bytes, 12);
  const std::uint32_t width = get_u32(bytes, 16);
  const std::uint32_t gsd_dm = get_u32(bytes, 20);

  const std::size_t values = std::size_t(count) * height * width;
  const std::size_t expected = kHeaderBytes + count + values * 4;
  if (bytes.size() < expected) {
    throw Error(ErrorCode::kTruncated, "payload holds " + std::to_string(bytes.size()) +
                                           " bytes, layout requires " + std::to_string(expected));
  }
  if (bytes.size() > expected) {
    throw Error(ErrorCode::kTruncated, "trailing bytes after payload");
  }

  std::vector<BandId> bands;
  bands.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    auto id = band_from_code(bytes[kHeaderBytes + i]);
    if (!id) {
      throw Error(ErrorCode::kUnknownBand,
                  "band code " + std::to_string(int(bytes[kHeaderBytes + i])));
    }
    bands.push_back(*id);
  }

  std::vector<float> data(values);
  const std::size_t base = kHeaderBytes + count;
  for (std::size_t i = 0; i < values; ++i) {
    data[i] = std::bit_cast<float>(get_u32(bytes, base + 4 * i));
    if (!std::isfinite(data[i])) {
      throw Error(ErrorCode::kNonFinite, "non-finite value at index " + std::to_string(i));
    }
  }
  BandStack stack(std::move(bands), height, width, gsd_dm, std::move(data));
  stack.validate();
  return stack;
}

void write_raster(const BandStack& stack, const std::filesystem::path& path) {
  const auto bytes = encode_raster(stack);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

BandStack read_raster(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_raster(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

// --- indices and composites --------------------------------------------------

namespace {

// Looks up each band across `sources` and checks that all of them live on
// one grid.
std::vector<std::span<const float>> gather_bands(std::span<const BandStack> sources,
                                                 std::span<const BandId> ids,
                                                 std::uint32_t& height, std::uint32_t& width) {
  std::vector<std::span<const float>> out;
  const BandStack* grid = nullptr;
  for (BandId id : ids) {
    const BandStack* owner = nullptr;
    for (const auto& s : sources) {
      if (s.has(id)) {
        owner = &s;
        break;
      }
    }
    if (!owner) throw Error(ErrorCode::kMissingBand, std::string(band_name(id)));
    if (grid && owner->gsd_dm() != grid->gsd_dm()) {
      throw Error(ErrorCode::kMixedGsd,
                  std::string(band_name(id)) + " is at a different gsd; resample first");
    }
    if (grid && (owner->height() != grid->height() || owner->width() != grid->width())) {
      throw Error(ErrorCode::kShapeMismatch, "source stacks differ in size");
    }
    grid = owner;
    out.push_back(owner->band(id));
  }
  height = grid->height();
  width = grid->width();
  return out;
}

}  // namespace

Plane compute_index(std::span<const BandStack> sources, IndexKind kind) {
  const std::array<BandId, 2> ids = kind == IndexKind::kNdwi
                                        ? std::array{BandId::kB3, BandId::kB8a}
                                        : std::array{BandId::kB8a, BandId::kB11};
  std::uint32_t h = 0, w = 0;
  const auto ch = gather_bands(sources, ids, h, w);
  Plane out{h, w, std::vector<float>(std::size_t(h) * w)};
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    const double a = ch[0][i];
    const double b = ch[1][i];
    const double den = a + b;
    out.values[i] = den == 0.0 ? 0.0f : static_cast<float>((a - b) / den);
  }
  return out;
}

Plane compute_index(const BandStack& stack, IndexKind kind) {
  return compute_index(std::span<const BandStack>(&stack, 1), kind);
}

std::array<BandId, 3> composite_bands(CompositeKind kind) {
  switch (kind) {
    case CompositeKind::kTrueColor: return {BandId::kB4, BandId::kB3, BandId::kB2};
    case CompositeKind::kUrbanFalseColor: return {BandId::kB12, BandId::kB11, BandId::kB4};
    case CompositeKind::kSwirComposite: return {BandId::kB12, BandId::kB8a, BandId::kB4};
  }
  return {};
}

RgbComposite compose(std::span<const BandStack> sources, CompositeKind kind) {
  const auto ids = composite_bands(kind);
  std::uint32_t h = 0, w = 0;
  const auto ch = gather_bands(sources, ids, h, w);
  const std::size_t n = std::size_t(h) * w;
  RgbComposite out{kind, h, w, std::vector<float>(n * 3)};
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) out.pixels[3 * i + c] = ch[c][i];
  }
  return out;
}

RgbComposite compose(const BandStack& stack, CompositeKind kind) {
  return compose(std::span<const BandStack>(&stack, 1), kind);
}

double percentile(std::span<const float> values, double pct) {
  if (values.empty()) throw Error(ErrorCode::kInvalidArgument, "percentile of empty set");
  std::vector<float> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = pct / 100.0 * double(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double t = pos - double(lo);
  return double(sorted[lo]) + t * (double(sorted[hi]) - double(sorted[lo]));
}

Stretch Stretch::fit(std::span<const float> channel, const VisualOptions& opts) {
  return Stretch{percentile(channel, opts.low_pct), percentile(channel, opts.high_pct),
                 opts.gamma};
}

std::uint8_t Stretch::apply(double v) const {
  if (!(high > low)) return 0;
  const double clipped = std::clamp(v, low, high);
  const double unit = (clipped - low) / (high - low);
  const double shaped = std::pow(unit, 1.0 / gamma);
  return static_cast<std::uint8_t>(std::lround(shaped * 255.0));
}

Rgb8Image render_visual(const RgbComposite& rgb, const VisualOptions& opts) {
  if (!(opts.low_pct >= 0.0 && opts.low_pct < opts.high_pct && opts.high_pct <= 100.0)) {
    throw Error(ErrorCode::kInvalidArgument, "percentiles must satisfy 0 <= low < high <= 100");
  }
  if (!(opts.gamma > 0.0)) throw Error(ErrorCode::kInvalidArgument, "gamma must be positive");
  const std::size_t n = std::size_t(rgb.height) * rgb.width;
  if (n == 0 || rgb.pixels.size() != n * 3) {
    throw Error(ErrorCode::kInvalidArgument, "empty image");
  }
  Rgb8Image out{rgb.height, rgb.width, std::vector<std::uint8_t>(n * 3)};
  std::vector<float> channel(n);
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < n; ++i) channel[i] = rgb.pixels[3 * i + c];
    const auto stretch = Stretch::fit(channel, opts);
    for (std::size_t i = 0; i < n; ++i) out.pixels[3 * i + c] = stretch.apply(channel[i]);
  }
  return out;
}

Rgb8Image render_index(const Plane& index) {
  const std::size_t n = std::size_t(index.height) * index.width;
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "empty image");
  Rgb8Image out{index.height, index.width, std::vector<std::uint8_t>(n * 3)};
  for (std::size_t i = 0; i < n; ++i) {
    const double unit = (std::clamp(double(index.values[i]), -1.0, 1.0) + 1.0) / 2.0;
    const auto g = static_cast<std::uint8_t>(std::lround(unit * 255.0));
    out.pixels[3 * i] = out.pixels[3 * i + 1] = out.pixels[3 * i + 2] = g;
  }
  return out;
}

Plane error_map(const BandStack& pred, const BandStack& ref, float clip) {
  if (pred.bands() != ref.bands() || pred.height() != ref.height() ||
      pred.width() != ref.width()) {
    throw Error(ErrorCode::kShapeMismatch, "prediction and reference differ in shape or bands");
  }
  if (!(clip > 0.0f)) throw Error(ErrorCode::kInvalidArgument, "clip must be positive");
  const std::size_t n = pred.plane_size();
  const std::size_t bands = pred.band_count();
  Plane out{pred.height(), pred.width(), std::vector<float>(n, 0.0f)};
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t b = 0; b < bands; ++b) {
      acc += std::abs(double(pred.plane(b)[i]) - double(ref.plane(b)[i]));
    }
    const double mean = bands ? acc / double(bands) : 0.0;
    out.values[i] = static_cast<float>(std::min(mean, double(clip)) / clip);
  }
  return out;
}

}  // namespace ginet::raster
