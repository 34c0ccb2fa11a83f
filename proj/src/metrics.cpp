#include "ginet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "ginet/error.hpp"

namespace ginet::metrics {

Image view(const diff::Tensor<float>& t) {
  if (t.rank() != 3) throw Error(ErrorCode::kShapeMismatch, "metrics need a [C,H,W] tensor");
  return {t.values(), t.dim(0), t.dim(1), t.dim(2)};
}

Image view(const raster::BandStack& s) { return {s.data(), s.band_count(), s.height(), s.width()}; }

namespace {

void check_pair(const Image& a, const Image& b) {
  if (a.channels != b.channels || a.height != b.height || a.width != b.width) {
    throw Error(ErrorCode::kShapeMismatch, "prediction and reference differ in shape");
  }
  if (a.values.size() != a.channels * a.plane() || b.values.size() != b.channels * b.plane()) {
    throw Error(ErrorCode::kShapeMismatch, "image view does not match its buffer");
  }
  if (a.values.empty()) throw Error(ErrorCode::kInvalidArgument, "empty image");
}

double psnr_from_mse(double mse, double range) {
  if (mse <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(range * range / mse));
}

double band_mse(const Image& a, const Image& b, std::size_t c) {
  const std::size_t n = a.plane();
  double acc = 0.0;
  for (std::size_t i = c * n; i < (c + 1) * n; ++i) {
    const double d = double(a.values[i]) - double(b.values[i]);
    acc += d * d;
  }
  return acc / double(n);
}

// "Valid" separable correlation of a plane with `taps`.
std::vector<double> filter_valid(const std::vector<double>& src, std::size_t h, std::size_t w,
                                 const std::vector<double>& taps) {
  const std::size_t k = taps.size(), oh = h - k + 1, ow = w - k + 1;
  std::vector<double> rows(h * ow, 0.0);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t t = 0; t < k; ++t) acc += taps[t] * src[y * w + x + t];
      rows[y * ow + x] = acc;
    }
  }
  std::vector<double> out(oh * ow, 0.0);
  for (std::size_t y = 0; y < oh; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t t = 0; t < k; ++t) acc += taps[t] * rows[(y + t) * ow + x];
      out[y * ow + x] = acc;
    }
  }
  return out;
}

}  // namespace

double psnr(const Image& pred, const Image& ref, double range, PsnrMode mode) {
  check_pair(pred, ref);
  if (!(range > 0.0)) throw Error(ErrorCode::kInvalidArgument, "data range must be positive");
  if (mode == PsnrMode::kJoint) {
    double acc = 0.0;
    for (std::size_t c = 0; c < pred.channels; ++c) acc += band_mse(pred, ref, c);
    return psnr_from_mse(acc / double(pred.channels), range);
  }
  double acc = 0.0;
  for (std::size_t c = 0; c < pred.channels; ++c) acc += psnr_from_mse(band_mse(pred, ref, c), range);
  return acc / double(pred.channels);
}

double ssim(const Image& pred, const Image& ref, const SsimOptions& o) {
  check_pair(pred, ref);
  const std::size_t k = std::size_t(o.window);
  if (o.window < 1 || o.window % 2 == 0) {
    throw Error(ErrorCode::kInvalidArgument, "ssim window must be odd and positive");
  }
  if (pred.height < k || pred.width < k) {
    throw Error(ErrorCode::kInvalidArgument, "image smaller than the ssim window");
  }
  const auto taps = dataset::gaussian_taps(o.sigma, o.window / 2);
  const double c1 = (o.k1 * o.range) * (o.k1 * o.range);
  const double c2 = (o.k2 * o.range) * (o.k2 * o.range);
  const std::size_t h = pred.height, w = pred.width, n = pred.plane();

  double total = 0.0;
  std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
  for (std::size_t c = 0; c < pred.channels; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = pred.values[c * n + i];
      y[i] = ref.values[c * n + i];
      xx[i] = x[i] * x[i];
      yy[i] = y[i] * y[i];
      xy[i] = x[i] * y[i];
    }
    const auto mx = filter_valid(x, h, w, taps);
    const auto my = filter_valid(y, h, w, taps);
    const auto exx = filter_valid(xx, h, w, taps);
    const auto eyy = filter_valid(yy, h, w, taps);
    const auto exy = filter_valid(xy, h, w, taps);
    double band = 0.0;
    for (std::size_t i = 0; i < mx.size(); ++i) {
      const double vx = exx[i] - mx[i] * mx[i];
      const double vy = eyy[i] - my[i] * my[i];
      const double cxy = exy[i] - mx[i] * my[i];
      band += ((2 * mx[i] * my[i] + c1) * (2 * cxy + c2)) /
              ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
    }
    total += band / double(mx.size());
  }
  return total / double(pred.channels);
}

double sam(const Image& pred, const Image& ref) {
  check_pair(pred, ref);
  const std::size_t n = pred.plane();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double np = 0.0, nr = 0.0;
    for (std::size_t c = 0; c < pred.channels; ++c) {
      const double p = pred.values[c * n + i], r = ref.values[c * n + i];
      np += p * p;
      nr += r * r;
    }
    if (np == 0.0 || nr == 0.0) continue;
    np = std::sqrt(np);
    nr = std::sqrt(nr);
    // Angle between unit vectors a, b as 2 atan2(|a - b|, |a + b|): the same
    // value as arccos(<a, b>) but exact at 0 instead of ~1e-8 rad.
    double d2 = 0.0, s2 = 0.0;
    for (std::size_t c = 0; c < pred.channels; ++c) {
      const double a = pred.values[c * n + i] / np, b = ref.values[c * n + i] / nr;
      d2 += (a - b) * (a - b);
      s2 += (a + b) * (a + b);
    }
    acc += 2.0 * std::atan2(std::sqrt(d2), std::sqrt(s2));
  }
  return acc / double(n) * 180.0 / std::numbers::pi;
}

ErgasResult ergas_detail(const Image& pred, const Image& ref, double ratio) {
  check_pair(pred, ref);
  if (!(ratio > 0.0)) throw Error(ErrorCode::kInvalidArgument, "ergas ratio must be positive");
  const std::size_t n = pred.plane();
  ErgasResult r;
  double acc = 0.0;
  std::size_t used = 0;
  for (std::size_t c = 0; c < pred.channels; ++c) {
    double mean = 0.0;
    for (std::size_t i = c * n; i < (c + 1) * n; ++i) mean += ref.values[i];
    mean /= double(n);
    if (mean == 0.0) {
      r.excluded_bands.push_back(c);
      continue;
    }
    acc += band_mse(pred, ref, c) / (mean * mean);
    ++used;
  }
  r.value = used ? 100.0 / ratio * std::sqrt(acc / double(used)) : 0.0;
  return r;
}

double ergas(const Image& pred, const Image& ref, double ratio) {
  return ergas_detail(pred, ref, ratio).value;
}

MetricValues compute_all(const Image& pred, const Image& ref, PsnrMode mode) {
  return {ergas(pred, ref), psnr(pred, ref, 1.0, mode), ssim(pred, ref), sam(pred, ref)};
}

void summarize(MetricReport& report) {
  report.overall = {};
  report.by_landscape.clear();
  report.landscape_counts.clear();
  auto add = [](MetricValues& acc, const MetricValues& v) {
    acc.ergas += v.ergas;
    acc.psnr += v.psnr;
    acc.ssim += v.ssim;
    acc.sam += v.sam;
  };
  auto divide = [](MetricValues& acc, std::size_t n) {
    const double d = double(n);
    acc = {acc.ergas / d, acc.psnr / d, acc.ssim / d, acc.sam / d};
  };
  for (const auto& c : report.crops) {
    add(report.overall, c.values);
    add(report.by_landscape[c.landscape], c.values);
    ++report.landscape_counts[c.landscape];
  }
  if (!report.crops.empty()) divide(report.overall, report.crops.size());
  for (auto& [l, v] : report.by_landscape) divide(v, report.landscape_counts[l]);
}

namespace {

void write_row(std::ostream& out, std::string_view id, std::string_view landscape,
               const MetricValues& v) {
  char buf[160];
  std::snprintf(buf, sizeof buf, ",%.6f,%.6f,%.6f,%.6f\n", v.ergas, v.psnr, v.ssim, v.sam);
  out << id << ',' << landscape << buf;
}

}  // namespace

void write_report_csv(const MetricReport& report, std::ostream& out) {
  out << "crop_id,landscape,ergas,psnr,ssim,sam\n";
  for (const auto& c : report.crops) write_row(out, c.id, dataset::to_string(c.landscape), c.values);
  out << "\ncrop_id,landscape,ergas,psnr,ssim,sam\n";
  for (const auto& [l, v] : report.by_landscape) write_row(out, "mean", dataset::to_string(l), v);
  write_row(out, "mean", "all", report.overall);
}

void write_report_csv(const MetricReport& report, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + file.string());
  write_report_csv(report, out);
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + file.string());
}

MetricReport evaluate_split(const net::UnfoldedModel<float>& model,
                            const dataset::Manifest& manifest, dataset::Split split,
                            PsnrMode mode) {
  const auto entries = manifest.split(split);
  if (entries.empty()) {
    throw Error(ErrorCode::kEmptySplit,
                "split '" + std::string(dataset::to_string(split)) + "' has no crops");
  }
  diff::NoGradGuard no_grad;
  MetricReport report;
  for (const auto& e : entries) {
    const auto sample = net::to_tensors<float>(dataset::load_sample(manifest.resolve(e), manifest.wald));
    const auto out = net::forward(model, sample.f, sample.hr4);
    diff::check_finite(out.u, "model output");
    report.crops.push_back({e.path, e.landscape, compute_all(view(out.u), view(sample.ref), mode)});
  }
  summarize(report);
  return report;
}

}  // namespace ginet::metrics
