#include "ginet/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "ginet/error.hpp"
#include "ginet/util.hpp"
#include "json.hpp"

namespace ginet::dataset {

namespace fs = std::filesystem;
using raster::BandId;

std::string_view to_string(Landscape l) {
  switch (l) {
    case Landscape::kUrban: return "urban";
    case Landscape::kRural: return "rural";
    case Landscape::kCoastal: return "coastal";
    case Landscape::kMixed: return "mixed";
  }
  return "mixed";
}

std::optional<Landscape> parse_landscape(std::string_view s) {
  for (auto l : {Landscape::kUrban, Landscape::kRural, Landscape::kCoastal, Landscape::kMixed}) {
    if (to_string(l) == s) return l;
  }
  return std::nullopt;
}

std::string_view to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "train";
}

std::optional<Split> parse_split(std::string_view s) {
  for (auto v : {Split::kTrain, Split::kVal, Split::kTest}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

void SceneCrop::validate() const {
  hr10.validate();
  lr20.validate();
  if (hr10.bands() != std::vector<BandId>(raster::kBands10m.begin(), raster::kBands10m.end())) {
    throw Error(ErrorCode::kMissingBand, "crop " + id + ": hr10 must hold B2,B3,B4,B8");
  }
  if (lr20.bands() != std::vector<BandId>(raster::kBands20m.begin(), raster::kBands20m.end())) {
    throw Error(ErrorCode::kMissingBand, "crop " + id + ": lr20 must hold the six 20m bands");
  }
  if (hr10.height() != 2 * lr20.height() || hr10.width() != 2 * lr20.width()) {
    throw Error(ErrorCode::kShapeMismatch, "crop " + id + ": hr10 must be twice lr20");
  }
}

// --- Wald degradation --------------------------------------------------------

std::vector<double> gaussian_taps(double sigma, int radius) {
  if (!(sigma > 0.0) || radius < 0) {
    throw Error(ErrorCode::kInvalidArgument, "gaussian needs sigma > 0 and radius >= 0");
  }
  std::vector<double> taps(2 * radius + 1);
  double sum = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    taps[k + radius] = std::exp(-0.5 * double(k * k) / (sigma * sigma));
    sum += taps[k + radius];
  }
  for (auto& t : taps) t /= sum;
  return taps;
}

BandStack degrade_wald(const BandStack& stack, const WaldOptions& opts) {
  const std::ptrdiff_t h = stack.height();
  const std::ptrdiff_t w = stack.width();
  if (h % 2 != 0 || w % 2 != 0) {
    throw Error(ErrorCode::kOddDimensions,
                "Wald degradation needs even dims, got " + std::to_string(h) + "x" +
                    std::to_string(w));
  }
  const auto taps = gaussian_taps(opts.sigma, opts.radius);
  const std::ptrdiff_t r = opts.radius;
  const std::ptrdiff_t oh = h / 2;
  const std::ptrdiff_t ow = w / 2;

  BandStack out(stack.bands(), static_cast<std::uint32_t>(oh), static_cast<std::uint32_t>(ow),
                stack.gsd_dm() * 2);
  std::vector<double> rows(std::size_t(h) * ow);
  for (std::size_t b = 0; b < stack.band_count(); ++b) {
    const auto src = stack.plane(b);
    // Horizontal pass, evaluated only at the even columns that survive.
    for (std::ptrdiff_t y = 0; y < h; ++y) {
      for (std::ptrdiff_t ox = 0; ox < ow; ++ox) {
        double acc = 0.0;
        for (std::ptrdiff_t k = -r; k <= r; ++k) {
          acc += taps[k + r] * src[y * w + reflect_index(2 * ox + k, w)];
        }
        rows[y * ow + ox] = acc;
      }
    }
    auto dst = out.plane(b);
    for (std::ptrdiff_t oy = 0; oy < oh; ++oy) {
      for (std::ptrdiff_t ox = 0; ox < ow; ++ox) {
        double acc = 0.0;
        for (std::ptrdiff_t k = -r; k <= r; ++k) {
          acc += taps[k + r] * rows[reflect_index(2 * oy + k, h) * ow + ox];
        }
        dst[oy * ow + ox] = static_cast<float>(acc);
      }
    }
  }
  return out;
}

// --- crops -------------------------------------------------------------------

namespace {

BandStack cut(const BandStack& s, std::uint32_t y0, std::uint32_t x0, std::uint32_t size) {
  BandStack out(s.bands(), size, size, s.gsd_dm());
  for (std::size_t b = 0; b < s.band_count(); ++b) {
    auto src = s.plane(b);
    auto dst = out.plane(b);
    for (std::uint32_t y = 0; y < size; ++y) {
      std::copy_n(src.begin() + std::size_t(y0 + y) * s.width() + x0, size,
                  dst.begin() + std::size_t(y) * size);
    }
  }
  return out;
}

}  // namespace

std::vector<SceneCrop> extract_crops(const BandStack& hr10, const BandStack& lr20,
                                     std::uint32_t crop_px, Landscape landscape) {
  if (crop_px == 0 || crop_px % 2 != 0) {
    throw Error(ErrorCode::kInvalidArgument, "crop size must be positive and even");
  }
  const std::uint32_t lr_px = crop_px / 2;
  if (hr10.height() % crop_px != 0 || hr10.width() % crop_px != 0) {
    throw Error(ErrorCode::kNonDivisible,
                "10m scene " + std::to_string(hr10.height()) + "x" + std::to_string(hr10.width()) +
                    " is not divisible by " + std::to_string(crop_px));
  }
  if (lr20.height() % lr_px != 0 || lr20.width() % lr_px != 0) {
    throw Error(ErrorCode::kNonDivisible, "20m scene is not divisible by " + std::to_string(lr_px));
  }
  if (lr20.height() * 2 != hr10.height() || lr20.width() * 2 != hr10.width()) {
    throw Error(ErrorCode::kShapeMismatch, "20m scene must be half the 10m scene");
  }
  std::vector<SceneCrop> crops;
  for (std::uint32_t r = 0; r < hr10.height() / crop_px; ++r) {
    for (std::uint32_t c = 0; c < hr10.width() / crop_px; ++c) {
      SceneCrop crop{cut(hr10, r * crop_px, c * crop_px, crop_px),
                     cut(lr20, r * lr_px, c * lr_px, lr_px),
                     std::to_string(r) + "_" + std::to_string(c), landscape};
      crops.push_back(std::move(crop));
    }
  }
  return crops;
}

SampleTriple make_sample(const SceneCrop& crop, const WaldOptions& opts) {
  crop.validate();
  return SampleTriple{degrade_wald(crop.lr20, opts), degrade_wald(crop.hr10, opts), crop.lr20};
}

// --- files -------------------------------------------------------------------

fs::path with_suffix(const fs::path& base, std::string_view suffix) {
  return fs::path(base.string() + std::string(suffix));
}

void write_crop(const SceneCrop& crop, const fs::path& base) {
  crop.validate();
  if (base.has_parent_path()) fs::create_directories(base.parent_path());
  raster::write_raster(crop.hr10, with_suffix(base, kHr10Suffix));
  raster::write_raster(crop.lr20, with_suffix(base, kLr20Suffix));
}

SceneCrop read_crop(const fs::path& base, Landscape landscape) {
  SceneCrop crop{raster::read_raster(with_suffix(base, kHr10Suffix)),
                 raster::read_raster(with_suffix(base, kLr20Suffix)),
                 base.filename().string(), landscape};
  crop.validate();
  return crop;
}

void write_materialized(const SampleTriple& sample, const fs::path& base) {
  raster::write_raster(sample.input_f, with_suffix(base, kInputSuffix));
  raster::write_raster(sample.guide_src, with_suffix(base, kGuideSuffix));
}

SampleTriple load_sample(const fs::path& base, const WaldOptions& opts) {
  const auto f_path = with_suffix(base, kInputSuffix);
  const auto g_path = with_suffix(base, kGuideSuffix);
  if (fs::exists(f_path) && fs::exists(g_path)) {
    return SampleTriple{raster::read_raster(f_path), raster::read_raster(g_path),
                        raster::read_raster(with_suffix(base, kLr20Suffix))};
  }
  return make_sample(read_crop(base), opts);
}

std::vector<fs::path> list_crops(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw Error(ErrorCode::kMissingDirectory, dir.string());
  }
  std::vector<fs::path> bases;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.size() > kHr10Suffix.size() && name.ends_with(kHr10Suffix)) {
      const fs::path base = dir / name.substr(0, name.size() - kHr10Suffix.size());
      if (fs::exists(with_suffix(base, kLr20Suffix))) bases.push_back(base);
    }
  }
  std::sort(bases.begin(), bases.end());
  return bases;
}

// --- manifests ---------------------------------------------------------------

std::vector<ManifestEntry> Manifest::split(Split s) const {
  std::vector<ManifestEntry> out;
  std::copy_if(entries.begin(), entries.end(), std::back_inserter(out),
               [s](const ManifestEntry& e) { return e.split == s; });
  return out;
}

fs::path Manifest::resolve(const ManifestEntry& e) const {
  const fs::path p(e.path);
  return p.is_absolute() || root.empty() ? p : root / p;
}

std::string Manifest::to_json() const {
  nlohmann::ordered_json doc;
  doc["version"] = kVersion;
  doc["seed"] = seed;
  doc["wald_sigma"] = wald.sigma;
  doc["entries"] = nlohmann::ordered_json::array();
  for (const auto& e : entries) {
    doc["entries"].push_back({{"path", e.path},
                              {"split", std::string(dataset::to_string(e.split))},
                              {"landscape", std::string(dataset::to_string(e.landscape))}});
  }
  return doc.dump(2) + "\n";
}

Manifest Manifest::from_json(std::string_view text, fs::path root) {
  Manifest m;
  m.root = std::move(root);
  try {
    const auto doc = nlohmann::json::parse(text);
    if (doc.at("version").get<int>() != kVersion) {
      throw Error(ErrorCode::kBadManifest, "unsupported manifest version");
    }
    m.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("wald_sigma")) m.wald.sigma = doc.at("wald_sigma").get<double>();
    if (!(m.wald.sigma > 0.0)) throw Error(ErrorCode::kBadManifest, "wald_sigma must be positive");
    for (const auto& e : doc.at("entries")) {
      auto split = parse_split(e.at("split").get<std::string>());
      auto land = parse_landscape(e.at("landscape").get<std::string>());
      if (!split || !land) throw Error(ErrorCode::kBadManifest, "bad split or landscape");
      m.entries.push_back({e.at("path").get<std::string>(), *split, *land});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kBadManifest, e.what());
  }
  return m;
}

Manifest build_manifest(std::span<const ManifestEntry> crops, const SplitSpec& spec,
                        std::uint64_t seed) {
  std::set<std::string> seen;
  for (const auto& c : crops) {
    if (!seen.insert(c.path).second) throw Error(ErrorCode::kDuplicatePath, c.path);
  }
  if (spec.total() != crops.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "split sizes sum to " + std::to_string(spec.total()) + " but " +
                    std::to_string(crops.size()) + " crops were found");
  }
  std::vector<ManifestEntry> entries(crops.begin(), crops.end());
  Rng rng(seed);
  shuffle(entries, rng);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    entries[i].split = i < spec.train ? Split::kTrain
                       : i < spec.train + spec.val ? Split::kVal
                                                   : Split::kTest;
  }
  return Manifest{seed, std::move(entries), {}, {}};
}

Manifest build_manifest(std::span<const CropDir> dirs, const SplitSpec& spec, std::uint64_t seed) {
  std::vector<ManifestEntry> crops;
  for (const auto& d : dirs) {
    for (const auto& base : list_crops(d.path)) {
      crops.push_back({base.generic_string(), Split::kTrain, d.landscape});
    }
  }
  return build_manifest(std::span<const ManifestEntry>(crops), spec, seed);
}

void save_manifest(const Manifest& manifest, const fs::path& file) {
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + file.string());
  out << manifest.to_json();
}

Manifest load_manifest(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  Manifest m = Manifest::from_json(ss.str(), file.parent_path());
  std::set<std::string> seen;
  for (const auto& e : m.entries) {
    if (!seen.insert(e.path).second) {
      throw Error(ErrorCode::kDuplicatePath, e.path + " appears in more than one entry");
    }
    const auto base = m.resolve(e);
    if (!fs::exists(with_suffix(base, kHr10Suffix)) || !fs::exists(with_suffix(base, kLr20Suffix))) {
      throw Error(ErrorCode::kBadManifest, "missing crop files for " + base.string());
    }
  }
  return m;
}

}  // namespace ginet::dataset
