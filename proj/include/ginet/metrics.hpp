#pragma once

#include <filesystem>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ginet/dataset.hpp"
#include "ginet/diff/tensor.hpp"
#include "ginet/network.hpp"
#include "ginet/raster.hpp"

namespace ginet::metrics {

// Planar [C,H,W] view.
struct Image {
  std::span<const float> values;
  std::size_t channels = 0, height = 0, width = 0;

  std::size_t plane() const { return height * width; }
};

Image view(const diff::Tensor<float>& t);
Image view(const raster::BandStack& s);

inline constexpr double kPsnrCap = 99.0;

enum class PsnrMode { kJoint, kPerBand };

// 10 log10(range^2 / MSE), capped at kPsnrCap. kJoint pools the MSE over all
// bands; kPerBand averages the per-band PSNRs.
double psnr(const Image& pred, const Image& ref, double range = 1.0,
            PsnrMode mode = PsnrMode::kJoint);

struct SsimOptions {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double range = 1.0;
};

// Gaussian-window SSIM per band over the positions where the window fits,
// averaged over bands.
double ssim(const Image& pred, const Image& ref, const SsimOptions& opts = {});

// Mean spectral angle in degrees; pixels with a zero-norm vector count as 0.
double sam(const Image& pred, const Image& ref);

struct ErgasResult {
  double value = 0.0;
  std::vector<std::size_t> excluded_bands;  // reference mean was zero
};

// 100 / ratio * sqrt(mean_c (RMSE_c / mean(ref_c))^2).
ErgasResult ergas_detail(const Image& pred, const Image& ref, double ratio = 2.0);
double ergas(const Image& pred, const Image& ref, double ratio = 2.0);

struct MetricValues {
  double ergas = 0, psnr = 0, ssim = 0, sam = 0;
};

MetricValues compute_all(const Image& pred, const Image& ref, PsnrMode mode = PsnrMode::kJoint);

struct CropMetrics {
  std::string id;
  dataset::Landscape landscape = dataset::Landscape::kMixed;
  MetricValues values;
};

struct MetricReport {
  std::vector<CropMetrics> crops;
  MetricValues overall;
  std::map<dataset::Landscape, MetricValues> by_landscape;
  std::map<dataset::Landscape, std::size_t> landscape_counts;
};

// Fills the arithmetic means from `crops`.
void summarize(MetricReport& report);

// Per-crop rows `crop_id,landscape,ergas,psnr,ssim,sam`, then a blank line
// and a summary block with the same columns (crop_id = "mean").
void write_report_csv(const MetricReport& report, std::ostream& out);
void write_report_csv(const MetricReport& report, const std::filesystem::path& file);

// Runs the model (hard routing, no graph) on every crop of `split`.
// Throws EmptySplit if the split has no crops.
MetricReport evaluate_split(const net::UnfoldedModel<float>& model,
                            const dataset::Manifest& manifest, dataset::Split split,
                            PsnrMode mode = PsnrMode::kJoint);

}  // namespace ginet::metrics
