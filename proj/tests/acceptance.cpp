// Acceptance gate: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.

#include <chrono>
#include <cmath>
#include <cstring>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "cli_runner.hpp"
#include "ginet/dataset.hpp"
#include "ginet/diff/attention.hpp"
#include "ginet/diff/conv.hpp"
#include "ginet/diff/gradcheck.hpp"
#include "ginet/diff/ops.hpp"
#include "ginet/guidance.hpp"
#include "ginet/metrics.hpp"
#include "ginet/network.hpp"
#include "ginet/synthetic.hpp"
#include "ginet/training.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace ginet;
using diff::Shape;
using diff::Tensor;

namespace {

struct Verdict {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << " [failed: " << what << "]";
    }
  }
};

template <typename T>
Tensor<T> tensor_of(const oracle::Cube& c, bool requires_grad = false) {
  return Tensor<T>({c.c, c.h, c.w}, std::vector<T>(c.v.begin(), c.v.end()), requires_grad);
}

oracle::Cube random_cube(std::size_t c, std::size_t h, std::size_t w, std::uint64_t seed, double lo = -1,
                         double hi = 1) {
  oracle::Cube out(c, h, w);
  out.v = oracle::random_values(c * h * w, seed, lo, hi);
  return out;
}

template <typename T>
void randomize(net::UnfoldedModel<T>& m, std::uint64_t seed, double scale = 0.3) {
  for (auto& [name, t] : net::named_parameters(m)) {
    const auto v = oracle::random_values(t.numel(), seed++, -scale, scale);
    for (std::size_t i = 0; i < v.size(); ++i) t.mutable_values()[i] = T(v[i]);
  }
}

net::ModelConfig toy_config(guide::GuideMode mode) {
  net::ModelConfig c;
  c.mode = mode;
  c.stages = 1;
  c.width = 8;
  c.resblocks = 1;
  c.attention.feat_dim = 4;
  c.attention.fused = 6;
  c.cluster = {.clusters = 3, .conv_width = 6, .conv_layers = 3, .mlp_hidden = 6};
  return c;
}

// --- 1 -------------------------------------------------------------------------------

struct OpCase {
  const char* name;
  std::function<Tensor<double>(std::vector<Tensor<double>>&)> fn;
  std::vector<Shape> inputs;
};

std::vector<OpCase> op_cases() {
  using namespace diff;
  using V = std::vector<Tensor<double>>;
  return {
      {"add", [](V& in) { return add(in[0], in[1]); }, {{2, 3, 3}, {2, 3, 3}}},
      {"sub", [](V& in) { return sub(in[0], in[1]); }, {{2, 3, 3}, {2, 3, 3}}},
      {"mul", [](V& in) { return mul(in[0], in[1]); }, {{2, 3, 3}, {2, 3, 3}}},
      {"scale", [](V& in) { return scale(in[0], -0.6); }, {{2, 3, 3}}},
      {"relu", [](V& in) { return relu(in[0]); }, {{2, 4, 4}}},
      {"abs", [](V& in) { return abs(in[0]); }, {{2, 4, 4}}},
      {"square", [](V& in) { return square(in[0]); }, {{2, 4, 4}}},
      {"sum", [](V& in) { return sum(in[0]); }, {{2, 3, 3}}},
      {"mean", [](V& in) { return mean(in[0]); }, {{2, 3, 3}}},
      {"reshape", [](V& in) { return reshape(in[0], {6, 3}); }, {{2, 3, 3}}},
      {"concat_channels", [](V& in) { return concat_channels(in[0], in[1]); }, {{1, 3, 3}, {2, 3, 3}}},
      {"slice_channels", [](V& in) { return slice_channels(in[0], 1, 2); }, {{4, 3, 3}}},
      {"mul_channel", [](V& in) { return mul_channel(in[0], in[1]); }, {{3, 3, 4}, {1, 3, 4}}},
      {"softmax_rows", [](V& in) { return softmax_rows(in[0]); }, {{4, 6}}},
      {"softmax_channels", [](V& in) { return softmax_channels(in[0]); }, {{5, 2, 3}}},
      {"avg_pool2", [](V& in) { return avg_pool2(in[0]); }, {{2, 6, 4}}},
      {"gather_pixels",
       [](V& in) {
         const std::vector<std::uint32_t> idx{2, 3, 9};
         return gather_pixels(in[0], idx);
       },
       {{2, 3, 4}}},
      {"scatter_pixels",
       [](V& in) {
         const std::vector<std::uint32_t> idx{0, 6, 11};
         return scatter_pixels(in[0], idx, 3, 4);
       },
       {{2, 1, 3}}},
      {"conv2d", [](V& in) { return conv2d(in[0], in[1], in[2], 1); }, {{3, 5, 4}, {2, 3, 3, 3}, {2}}},
      {"conv2d_1x1", [](V& in) { return conv2d(in[0], in[1], in[2], 0); }, {{3, 4, 4}, {2, 3, 1, 1}, {2}}},
      {"depthwise_conv2d", [](V& in) { return depthwise_conv2d(in[0], in[1], 1); }, {{2, 5, 5}, {2, 3, 3}}},
      {"transposed_conv2d_s2", [](V& in) { return transposed_conv2d_s2(in[0], in[1]); }, {{2, 3, 3}, {2, 3, 3}}},
      {"bicubic_up2", [](V& in) { return bicubic_up2(in[0]); }, {{2, 4, 3}}},
      {"unfold_patches", [](V& in) { return unfold_patches(in[0], 3); }, {{2, 4, 5}}},
      {"window_attention", [](V& in) { return window_attention(in[0], in[1], in[2], 3); },
       {{2, 5, 4}, {2, 5, 4}, {2, 5, 4}}},
  };
}

Verdict criterion_1() {
  Verdict v;
  double worst = 0;
  std::size_t checks = 0, model_coords = 0, kinks = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    for (const auto& op : op_cases()) {
      std::vector<Tensor<double>> in;
      for (std::size_t i = 0; i < op.inputs.size(); ++i)
        in.push_back(diff::random_tensor(op.inputs[i], seed * 1000 + i));
      const auto r = diff::grad_check([&] { return diff::random_projection(op.fn(in), seed + 77); }, in,
                                      {.max_coords = 0, .seed = seed});
      worst = std::max(worst, r.rel_error);
      ++checks;
      v.require(r.ok && r.rel_error <= 1e-4, std::string(op.name) + " seed " + std::to_string(seed));
    }
    for (auto mode : {guide::GuideMode::kSimilarity, guide::GuideMode::kCluster}) {
      auto m = net::UnfoldedModel<double>::init(toy_config(mode), seed);
      randomize(m, seed * 31);
      std::vector<Tensor<double>> in;
      for (auto& [name, t] : net::named_parameters(m)) in.push_back(t);
      auto f = tensor_of<double>(random_cube(6, 6, 6, seed * 7, 0, 1), true);
      auto hr4 = tensor_of<double>(random_cube(4, 12, 12, seed * 7 + 1, 0, 1), mode == guide::GuideMode::kCluster);
      in.push_back(f);
      if (mode == guide::GuideMode::kCluster) in.push_back(hr4);
      const auto r = diff::grad_check(
          [&] {
            return diff::random_projection(net::forward(m, f, hr4, false, guide::Routing::kSoft).u, seed + 5);
          },
          in, {.max_coords = 12, .seed = seed, .skip_kinks = true});
      worst = std::max(worst, r.rel_error);
      ++checks;
      model_coords += r.coords;
      kinks += r.skipped;
      v.require(r.ok && r.rel_error <= 1e-4 && r.skipped * 50 <= r.coords + r.skipped, std::string("1-stage model ") + std::string(guide::to_string(mode)) +
                                                 " seed " + std::to_string(seed));
    }
  }
  v.detail << checks << " checks, worst relative error " << worst << "; model checks used " << model_coords
           << " coordinates and skipped " << kinks << " at ReLU kinks";
  return v;
}

// --- 2 -------------------------------------------------------------------------------

Verdict criterion_2() {
  Verdict v;
  const auto m = net::UnfoldedModel<float>::init(net::ModelConfig{}, 1);
  const auto c = net::count_params(m);
  for (std::size_t k = 0; k < c.stages.size(); ++k) {
    v.require(c.stages[k].db == 54 && c.stages[k].up == 54, "stage " + std::to_string(k) + " db/up");
  }
  v.require(c.stages.size() == 6, "six stages");
  v.require(c.total >= 5'700'000 && c.total <= 6'900'000, "total in [5.7M, 6.9M]");
  std::uint64_t named = 0;
  for (const auto& [name, t] : net::named_parameters(m)) named += t.numel();
  v.require(named == c.total, "count matches stored tensors");
  v.detail << "db/up " << c.stages[0].db << "/" << c.stages[0].up << " per stage, total " << c.total
           << ", guide block " << c.guide << " (target about 29.7K)";
  return v;
}

// --- 3 -------------------------------------------------------------------------------

Verdict criterion_3() {
  Verdict v;
  std::size_t compared = 0;
  for (auto mode : {guide::GuideMode::kSimilarity, guide::GuideMode::kCluster}) {
    net::ModelConfig cfg;
    cfg.mode = mode;
    cfg.stages = 3;
    cfg.width = 16;
    auto m = net::UnfoldedModel<float>::init(cfg, 3);
    randomize(m, 100);
    net::zero_corrections(m);
    const auto f = tensor_of<float>(random_cube(6, 15, 10, 4, 0, 1));
    const auto hr4 = tensor_of<float>(random_cube(4, 30, 20, 5, 0, 1));
    diff::NoGradGuard no_grad;
    const auto u = net::forward(m, f, hr4).u;
    const auto b = diff::bicubic_up2(f);
    v.require(u.shape() == b.shape(), "shape");
    for (std::size_t i = 0; i < b.numel(); ++i) {
      if (u.values()[i] != b.values()[i]) {
        v.require(false, "element " + std::to_string(i) + " differs");
        break;
      }
    }
    compared += b.numel();
  }
  v.detail << compared << " float elements compared for equality";
  return v;
}

// --- 4 -------------------------------------------------------------------------------

Verdict criterion_4() {
  Verdict v;
  double worst = 0;
  std::size_t rows = 0;
  auto m = net::UnfoldedModel<double>::init(toy_config(guide::GuideMode::kSimilarity), 9);
  randomize(m, 10);
  const auto e = tensor_of<double>(random_cube(6, 13, 11, 11));
  const auto g = tensor_of<double>(random_cube(6, 13, 11, 12));
  const Tensor<double> refs[] = {e, g, diff::concat_channels(e, g)};
  const std::size_t patches[] = {3, 3, 1};
  for (std::size_t h = 0; h < 3; ++h) {
    const auto [q, k] = net::head_descriptors(refs[h], m.stages[0].heads[h], patches[h]);
    for (const auto& t : diff::window_attention_weights(q, k, 5)) {
      const std::size_t n = t.tile.size();
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0;
        for (std::size_t j = 0; j < n; ++j) s += t.weights[i * n + j];
        worst = std::max(worst, std::abs(s - 1));
        ++rows;
      }
    }
  }
  v.require(worst <= 1e-6, "row sums");

  // Perturbing pixels of one tile leaves every other tile's output unchanged.
  const auto q = random_cube(3, 10, 15, 13), k = random_cube(3, 10, 15, 14), val = random_cube(2, 10, 15, 15);
  const auto base = diff::window_attention(tensor_of<double>(q), tensor_of<double>(k), tensor_of<double>(val), 5);
  auto q2 = q, k2 = k, v2 = val;
  for (std::size_t c = 0; c < 3; ++c) {
    q2.at(c, 7, 6) += 0.9;
    k2.at(c, 5, 9) -= 0.4;
  }
  for (std::size_t c = 0; c < 2; ++c) v2.at(c, 6, 8) += 1.3;
  const auto moved = diff::window_attention(tensor_of<double>(q2), tensor_of<double>(k2), tensor_of<double>(v2), 5);
  bool inside_changed = false, outside_changed = false;
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t y = 0; y < 10; ++y)
      for (std::size_t x = 0; x < 15; ++x) {
        const std::size_t i = (c * 10 + y) * 15 + x;
        const bool changed = base.values()[i] != moved.values()[i];
        if (y >= 5 && x >= 5 && x < 10)
          inside_changed |= changed;
        else
          outside_changed |= changed;
      }
  v.require(inside_changed, "perturbed tile responds");
  v.require(!outside_changed, "other tiles unchanged");
  v.detail << rows << " attention rows, worst |sum-1| " << worst;
  return v;
}

// --- 5 -------------------------------------------------------------------------------

Verdict criterion_5() {
  Verdict v;
  using metrics::Image;
  double worst = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto r = oracle::random_values(6 * 256, seed, 0.05, 0.7);
    const auto n = oracle::random_values(6 * 256, seed + 50, -0.04, 0.04);
    std::vector<float> rf(r.begin(), r.end()), pf(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) pf[i] = float(r[i] + n[i]);
    oracle::Cube rc(6, 16, 16), pc(6, 16, 16);
    for (std::size_t i = 0; i < r.size(); ++i) {
      rc.v[i] = rf[i];
      pc.v[i] = pf[i];
    }
    const Image pi{pf, 6, 16, 16}, ri{rf, 6, 16, 16};
    const double diffs[] = {std::abs(metrics::psnr(pi, ri) - oracle::psnr(pc, rc)),
                            std::abs(metrics::ssim(pi, ri) - oracle::ssim(pc, rc)),
                            std::abs(metrics::sam(pi, ri) - oracle::sam_degrees(pc, rc)),
                            std::abs(metrics::ergas(pi, ri) - oracle::ergas(pc, rc))};
    for (double d : diffs) worst = std::max(worst, d);

    v.require(metrics::ergas(ri, ri) == 0.0, "ERGAS identity");
    v.require(std::abs(metrics::ssim(ri, ri) - 1.0) <= 1e-12, "SSIM identity");
    v.require(metrics::sam(ri, ri) == 0.0, "SAM identity");
    v.require(metrics::psnr(ri, ri) == metrics::kPsnrCap, "PSNR cap");

    const auto s = oracle::random_values(256, seed + 90, 0.2, 5.0);
    std::vector<float> scaled = pf;
    for (std::size_t c = 0; c < 6; ++c)
      for (std::size_t i = 0; i < 256; ++i) scaled[c * 256 + i] = float(pf[c * 256 + i] * s[i]);
    const double sam_diff = std::abs(metrics::sam({scaled, 6, 16, 16}, ri) - metrics::sam(pi, ri));
    v.require(sam_diff <= 1e-4, "SAM per-pixel scale invariance");
    std::vector<float> doubled = rf;
    for (auto& x : doubled) x *= 2;
    v.require(metrics::sam({doubled, 6, 16, 16}, ri) <= 1e-6, "SAM of 2*ref");
  }
  v.require(worst <= 1e-6, "oracle agreement");

  std::vector<float> ref(64, 0.2f), pred(64);
  for (std::size_t i = 0; i < 64; ++i) pred[i] = i % 2 ? 0.21f : 0.19f;
  const double e = metrics::ergas({pred, 1, 8, 8}, {ref, 1, 8, 8});
  v.require(std::abs(e - 2.5) <= 1e-4, "ERGAS closed form");
  v.detail << "worst oracle gap " << worst << ", closed-form ERGAS " << e;
  return v;
}

// --- 6 -------------------------------------------------------------------------------

Verdict criterion_6() {
  Verdict v;
  const auto scene = synth::make_scene(240, 2024, dataset::Landscape::kMixed);
  const auto crops = dataset::extract_crops(scene.hr10, scene.lr20, 240, dataset::Landscape::kMixed);
  const auto sample = net::to_tensors<float>(dataset::make_sample(crops.at(0)));

  const auto bic = diff::bicubic_up2(sample.f);
  const metrics::Image ref{sample.ref.values(), 6, sample.ref.dim(1), sample.ref.dim(2)};
  const double baseline = metrics::psnr({bic.values(), 6, bic.dim(1), bic.dim(2)}, ref);

  train::TrainConfig cfg;
  cfg.model.mode = guide::GuideMode::kCluster;
  cfg.model.stages = 2;
  cfg.model.width = 32;
  cfg.epochs = 200;
  cfg.seed = 6;
  const std::vector<net::SampleTensors<float>> set{sample};
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = train::train(cfg, set, set);
  const double minutes = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 60;
  const double final_psnr = r.log.back().val_psnr;
  v.require(final_psnr >= baseline + 3.0, "final PSNR >= bicubic + 3 dB");
  v.detail << "bicubic " << baseline << " dB, final " << final_psnr << " dB (best " << r.best_val_psnr
           << " at epoch " << r.best_epoch << "), " << minutes << " min";
  return v;
}

// --- 7 -------------------------------------------------------------------------------

Verdict criterion_7() {
  Verdict v;
  const auto hr = random_cube(4, 6, 7, 21, 0, 1);
  const auto g = guide::similarity_guide(tensor_of<float>(hr));
  const std::size_t n = 42;
  // Output band order B5, B6, B7, B8a, B11, B12; input order B2, B3, B4, B8.
  for (std::size_t i = 0; i < n; ++i) {
    const float b4 = float(hr.v[2 * n + i]), b8 = float(hr.v[3 * n + i]);
    const float avg = (b4 + b8) * 0.5f;
    for (std::size_t o = 0; o < 3; ++o) v.require(g.values()[o * n + i] == avg, "B5/B6/B7");
    for (std::size_t o = 3; o < 6; ++o) v.require(g.values()[o * n + i] == b8, "B8a/B11/B12");
  }

  Rng rng(22);
  const auto p = guide::ClusterParams<double>::init({.clusters = 4}, rng);
  const auto x = random_cube(4, 5, 6, 23, 0, 1);
  const auto a = guide::cluster_assign(tensor_of<double>(x), p);
  const std::size_t m = 30;
  double worst_norm = 0;
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0;
    for (std::size_t c = 0; c < 4; ++c) s += a.probs.values()[c * m + i];
    worst_norm = std::max(worst_norm, std::abs(s - 1));
  }
  v.require(worst_norm <= 1e-6, "cluster probabilities sum to 1");

  // Swap pixels that share a cluster; SpecUp output swaps with them.
  std::vector<std::uint8_t> labels(m);
  for (std::size_t i = 0; i < m; ++i) labels[i] = std::uint8_t((i * 5) % 4);
  std::vector<std::size_t> perm(m);
  for (std::size_t i = 0; i < m; ++i) perm[i] = i;
  for (std::uint8_t l = 0; l < 4; ++l) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < m; ++i)
      if (labels[i] == l) members.push_back(i);
    for (std::size_t k = 0; k < members.size(); ++k) perm[members[k]] = members[(k + 1) % members.size()];
  }
  oracle::Cube xp(4, 5, 6);
  for (std::size_t c = 0; c < 4; ++c)
    for (std::size_t i = 0; i < m; ++i) xp.v[c * m + i] = x.v[c * m + perm[i]];
  const auto out = guide::spec_up(tensor_of<double>(x), labels, p);
  const auto outp = guide::spec_up(tensor_of<double>(xp), labels, p);
  double worst_eq = 0;
  for (std::size_t c = 0; c < 6; ++c)
    for (std::size_t i = 0; i < m; ++i)
      worst_eq = std::max(worst_eq, std::abs(outp.values()[c * m + i] - out.values()[c * m + perm[i]]));
  v.require(worst_eq <= 1e-12, "within-cluster permutation equivariance");
  v.detail << "similarity bands exact, worst |sum p - 1| " << worst_norm << ", equivariance gap " << worst_eq;
  return v;
}

// --- 8 -------------------------------------------------------------------------------

Verdict criterion_8() {
  Verdict v;
  const std::vector<raster::BandId> b20(raster::kBands20m.begin(), raster::kBands20m.end());
  const raster::BandStack flat(b20, 120, 120, 200, std::vector<float>(6 * 120 * 120, 0.4137f));
  const auto d = dataset::degrade_wald(flat);
  v.require(d.height() == 60 && d.width() == 60, "120 -> 60");
  for (float x : d.data()) {
    if (x != 0.4137f) {
      v.require(false, "constant preserved");
      break;
    }
  }

  const auto scene = synth::make_scene(240, 8, dataset::Landscape::kRural);
  const auto crop = dataset::extract_crops(scene.hr10, scene.lr20, 240, dataset::Landscape::kRural).at(0);
  const auto s = dataset::make_sample(crop);
  v.require(s.input_f.height() == 60 && s.input_f.width() == 60, "f is 60x60");
  v.require(s.guide_src.height() == 120 && s.guide_src.width() == 120, "guide source is 120x120");
  v.require(s.ref.height() == 120 && s.ref.bands() == crop.lr20.bands(), "ref shape");
  const auto a = s.ref.data(), b = crop.lr20.data();
  v.require(a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0,
            "ref bit-exact");
  v.detail << "constant kept exactly, f " << s.input_f.height() << "x" << s.input_f.width()
           << ", ref identical to the 20m crop";
  return v;
}

// --- 9 and 10 drive the CLI ---------------------------------------------------------------

struct Scratch {
  fs::path root;
  Scratch(const std::string& tag) {
    root = fs::temp_directory_path() / ("ginet_accept_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(root);
    fs::create_directories(root);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(root, ec);
  }
};

Verdict criterion_9() {
  Verdict v;
  Scratch s("ablate");
  const auto& root = s.root;
  auto go = [&](std::vector<std::string> args) { return cli_runner::run(GINET_CLI, args, root / "io"); };
  v.require(go({"synth", "--out", (root / "scenes").string(), "--count", "2", "--size", "240", "--seed", "3"}).code == 0,
            "synth");
  v.require(go({"dataset-prep", "--scenes", (root / "scenes").string(), "--out", (root / "data").string(),
                "--splits", "1,1", "--seed", "1"})
                    .code == 0,
            "dataset-prep");
  const auto r = go({"ablate", "--manifest", (root / "data" / "manifest.json").string(), "--preset", "tables",
                     "--epochs", "1", "--width", "8", "--out", (root / "ablate.csv").string()});
  v.require(r.code == 0, "ablate exit code");
  std::istringstream csv(cli_runner::slurp(root / "ablate.csv"));
  std::string line;
  std::getline(csv, line);
  std::set<std::string> names;
  std::size_t rows = 0;
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    ++rows;
    names.insert(line.substr(0, line.find("\",") + 1));
  }
  std::set<std::string> expected;
  for (int k : {3, 6, 9}) expected.insert("\"stages=" + std::to_string(k) + "\"");
  for (int p : {3, 5, 7})
    for (int w : {3, 5, 7}) expected.insert("\"patch=" + std::to_string(p) + ",window=" + std::to_string(w) + "\"");
  for (const char* l : {"l1", "mse", "alpha:1:0.1", "alpha:1:0.5"}) expected.insert(std::string("\"loss=") + l + "\"");
  v.require(rows == 16, "16 rows");
  v.require(names == expected, "grid coverage");
  v.detail << rows << " rows, " << names.size() << " distinct configurations";
  return v;
}

Verdict criterion_10() {
  Verdict v;
  Scratch s("determinism");
  const auto& root = s.root;
  auto go = [&](std::vector<std::string> args) { return cli_runner::run(GINET_CLI, args, root / "io"); };
  v.require(go({"synth", "--out", (root / "scenes").string(), "--count", "2", "--size", "480", "--seed", "11"}).code == 0,
            "synth");
  const char* files[] = {"data/manifest.json", "run/train_log.csv", "run/best.bpck", "report.csv"};
  std::vector<std::string> first;
  for (int pass = 0; pass < 2; ++pass) {
    const fs::path dir = root / ("pass" + std::to_string(pass));
    v.require(go({"dataset-prep", "--scenes", (root / "scenes").string(), "--out", (dir / "data").string(),
                  "--splits", "4,2", "--seed", "5"})
                      .code == 0,
              "dataset-prep");
    v.require(go({"train", "--manifest", (dir / "data" / "manifest.json").string(), "--out", (dir / "run").string(),
                  "--epochs", "5", "--stages", "2", "--width", "16", "--seed", "9", "--lr", "1e-3"})
                      .code == 0,
              "train");
    v.require(go({"eval", "--checkpoint", (dir / "run" / "best.bpck").string(), "--manifest",
                  (dir / "data" / "manifest.json").string(), "--split", "test", "--report",
                  (dir / "report.csv").string()})
                      .code == 0,
              "eval");
    for (std::size_t i = 0; i < std::size(files); ++i) {
      const auto bytes = cli_runner::slurp(dir / files[i]);
      v.require(!bytes.empty(), std::string(files[i]) + " written");
      if (pass == 0)
        first.push_back(bytes);
      else
        v.require(bytes == first[i], std::string(files[i]) + " identical");
    }
  }
  v.detail << "manifest, train log, checkpoint and report compared byte for byte";
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, Verdict (*)()>> criteria = {
      {"gradient fidelity", criterion_1},      {"parameter counts", criterion_2},
      {"zero-weight collapse", criterion_3},   {"attention normalization and locality", criterion_4},
      {"metric oracles", criterion_5},         {"overfit sanity", criterion_6},
      {"guide correctness", criterion_7},      {"Wald pipeline", criterion_8},
      {"ablation harness", criterion_9},       {"determinism", criterion_10},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = int(i + 1);
    if (!only.empty() && !only.count(id)) continue;
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.ok = false;
      v.detail << "exception: " << e.what();
    }
    failed += !v.ok;
    std::cout << (v.ok ? "PASS " : "FAIL ") << id << " " << criteria[i].first << ": " << v.detail.str()
              << std::endl;
  }
  return failed ? 1 : 0;
}
