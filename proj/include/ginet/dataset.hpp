#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ginet/raster.hpp"

namespace ginet::dataset {

using raster::BandStack;

enum class Landscape { kUrban, kRural, kCoastal, kMixed };
std::string_view to_string(Landscape l);
std::optional<Landscape> parse_landscape(std::string_view s);

enum class Split { kTrain, kVal, kTest };
std::string_view to_string(Split s);
std::optional<Split> parse_split(std::string_view s);

inline constexpr std::uint32_t kGsd10m = 100;  // decimeters
inline constexpr std::uint32_t kGsd20m = 200;
inline constexpr std::uint32_t kCropPx = 240;

struct SceneCrop {
  BandStack hr10;  // B2, B3, B4, B8 at 10m
  BandStack lr20;  // the six 20m bands
  std::string id;
  Landscape landscape = Landscape::kMixed;

  // Throws ShapeMismatch / MissingBand when the crop invariants are violated.
  void validate() const;
};

// Wald-protocol training unit.
struct SampleTriple {
  BandStack input_f;    // degraded 20m bands (40m)
  BandStack guide_src;  // degraded 10m bands (20m)
  BandStack ref;        // original 20m bands
};

struct WaldOptions {
  double sigma = 1.0;
  int radius = 3;  // 7x7 kernel
};

// Normalized 1-D Gaussian taps, length 2 * radius + 1.
std::vector<double> gaussian_taps(double sigma, int radius);

// Separable Gaussian blur with symmetric borders, then keep every second
// pixel starting at (0, 0). Output dims are halved and the gsd doubled.
BandStack degrade_wald(const BandStack& stack, const WaldOptions& opts = {});

// Row-major, non-overlapping tiling of a 10m/20m scene pair. `crop_px` is the
// crop size on the 10m grid. Ids are "row_col".
std::vector<SceneCrop> extract_crops(const BandStack& hr10, const BandStack& lr20,
                                     std::uint32_t crop_px = kCropPx,
                                     Landscape landscape = Landscape::kMixed);

SampleTriple make_sample(const SceneCrop& crop, const WaldOptions& opts = {});

// --- on-disk crops ----------------------------------------------------------

// A crop lives at "<base>.hr10.s2sr" + "<base>.lr20.s2sr"; materialized Wald
// inputs optionally at "<base>.f40.s2sr" + "<base>.g20.s2sr".
inline constexpr std::string_view kHr10Suffix = ".hr10.s2sr";
inline constexpr std::string_view kLr20Suffix = ".lr20.s2sr";
inline constexpr std::string_view kInputSuffix = ".f40.s2sr";
inline constexpr std::string_view kGuideSuffix = ".g20.s2sr";

std::filesystem::path with_suffix(const std::filesystem::path& base, std::string_view suffix);

void write_crop(const SceneCrop& crop, const std::filesystem::path& base);
SceneCrop read_crop(const std::filesystem::path& base, Landscape landscape = Landscape::kMixed);
void write_materialized(const SampleTriple& sample, const std::filesystem::path& base);

// Uses the materialized inputs when both exist, else degrades on the fly.
SampleTriple load_sample(const std::filesystem::path& base, const WaldOptions& opts = {});

// Sorted crop bases ("<dir>/<id>") found in a directory.
std::vector<std::filesystem::path> list_crops(const std::filesystem::path& dir);

// --- manifests ---------------------------------------------------------------

struct ManifestEntry {
  std::string path;  // crop base; relative paths resolve against the manifest
  Split split = Split::kTrain;
  Landscape landscape = Landscape::kMixed;

  bool operator==(const ManifestEntry&) const = default;
};

struct Manifest {
  static constexpr int kVersion = 1;
  std::uint64_t seed = 0;
  std::vector<ManifestEntry> entries;
  std::filesystem::path root;  // directory relative paths resolve against
  WaldOptions wald;            // degradation used when crops are loaded

  std::vector<ManifestEntry> split(Split s) const;
  std::filesystem::path resolve(const ManifestEntry& e) const;

  std::string to_json() const;
  static Manifest from_json(std::string_view text, std::filesystem::path root = {});
};

struct CropDir {
  std::filesystem::path path;
  Landscape landscape = Landscape::kMixed;
};

struct SplitSpec {
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;

  std::size_t total() const { return train + val + test; }
};

// Seeded shuffle of all crops found in `dirs`, then the first `train` go to
// the training split, the next `val` to validation, and the rest to test.
Manifest build_manifest(std::span<const CropDir> dirs, const SplitSpec& spec, std::uint64_t seed);

// Same, for an explicit crop list. Throws DuplicatePath.
Manifest build_manifest(std::span<const ManifestEntry> crops, const SplitSpec& spec,
                        std::uint64_t seed);

void save_manifest(const Manifest& manifest, const std::filesystem::path& file);
// Checks split disjointness and that every crop exists.
Manifest load_manifest(const std::filesystem::path& file);

}  // namespace ginet::dataset
