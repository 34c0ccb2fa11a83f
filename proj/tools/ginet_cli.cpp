// Command-line front end: dataset preparation, training, evaluation,
// inference, rendering, ablation grids and the built-in self test.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ginet/dataset.hpp"
#include "ginet/error.hpp"
#include "ginet/image_io.hpp"
#include "ginet/metrics.hpp"
#include "ginet/network.hpp"
#include "ginet/raster.hpp"
#include "ginet/selftest.hpp"
#include "ginet/synthetic.hpp"
#include "ginet/training.hpp"

namespace fs = std::filesystem;
using namespace ginet;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

std::vector<std::size_t> parse_list(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      if (used != item.size() || v < 0) throw std::invalid_argument(item);
      out.push_back(std::size_t(v));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidArgument, "bad number '" + item + "' in '" + s + "'");
    }
  }
  return out;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

dataset::Landscape landscape_from_name(const std::string& stem) {
  for (auto l : {dataset::Landscape::kUrban, dataset::Landscape::kRural, dataset::Landscape::kCoastal}) {
    if (stem.starts_with(dataset::to_string(l))) return l;
  }
  return dataset::Landscape::kMixed;
}

// Flags shared by train and ablate.
struct ModelFlags {
  std::string mode = "ginet+";
  std::string arch = "resnl";
  std::size_t stages = 6;
  std::size_t width = 128;
  std::size_t resblocks = 3;
  std::size_t window = 5;
  std::string patch = "3,3,1";
  std::size_t feat_dim = 32;
  std::size_t fused = 96;
  std::size_t clusters = 5;
  std::string loss = "l1";
  std::size_t epochs = 1500;
  double lr = 1e-4;
  std::size_t batch = 4;
  std::uint64_t seed = 0;

  void add(CLI::App* app) {
    app->add_option("--mode", mode, "ginet (similarity guide) or ginet+ (cluster guide)")
        ->check(CLI::IsMember({"ginet", "ginet+", "similarity", "cluster"}));
    app->add_option("--arch", arch, "resnl, resnet or resnetsr")
        ->check(CLI::IsMember({"resnl", "resnet", "resnetsr"}));
    app->add_option("--stages", stages, "number of unfolded stages");
    app->add_option("--width", width, "residual trunk width");
    app->add_option("--resblocks", resblocks, "residual blocks per stage");
    app->add_option("--window", window, "attention window size");
    app->add_option("--patch", patch, "patch sizes for the error, guide and concat heads");
    app->add_option("--feat-dim", feat_dim, "attention feature dimension");
    app->add_option("--fused", fused, "channels after head fusion");
    app->add_option("--clusters", clusters, "clusters in the guide block");
    app->add_option("--loss", loss, "l1, mse or alpha:I:A");
    app->add_option("--epochs", epochs, "training epochs");
    app->add_option("--lr", lr, "Adam learning rate");
    app->add_option("--batch", batch, "batch size");
    app->add_option("--seed", seed, "random seed");
  }

  train::TrainConfig config() const {
    train::TrainConfig c;
    c.model.mode = *guide::parse_guide_mode(mode);
    c.model.arch = *net::parse_arch(arch);
    c.model.stages = stages;
    c.model.width = width;
    c.model.resblocks = resblocks;
    c.model.attention.window = window;
    const auto p = parse_list(patch);
    if (p.size() != 3) throw Error(ErrorCode::kInvalidArgument, "--patch needs three sizes");
    c.model.attention.patch_error = p[0];
    c.model.attention.patch_guide = p[1];
    c.model.attention.patch_concat = p[2];
    c.model.attention.feat_dim = feat_dim;
    c.model.attention.fused = fused;
    c.model.cluster.clusters = clusters;
    const auto l = train::parse_loss(loss);
    if (!l) throw Error(ErrorCode::kInvalidArgument, "bad --loss '" + loss + "'");
    c.loss = *l;
    c.epochs = epochs;
    c.lr = lr;
    c.batch_size = batch;
    c.seed = seed;
    c.validate();
    return c;
  }
};

// --- dataset-prep ---------------------------------------------------------------

struct PrepFlags {
  fs::path scenes, out;
  std::uint32_t crop = dataset::kCropPx;
  std::uint64_t seed = 0;
  std::string splits = "500,100";
  double wald_sigma = 1.0;
  bool materialize = false;
};

int run_prep(const PrepFlags& f) {
  const auto scenes = dataset::list_crops(f.scenes);
  if (scenes.empty()) throw Error(ErrorCode::kMissingDirectory, "no scenes in " + f.scenes.string());
  if (!(f.wald_sigma > 0.0)) throw Error(ErrorCode::kInvalidArgument, "--wald-sigma must be positive");
  const dataset::WaldOptions wald{.sigma = f.wald_sigma};
  const fs::path crop_dir = f.out / "crops";
  fs::create_directories(crop_dir);
  std::vector<dataset::ManifestEntry> entries;
  for (const auto& base : scenes) {
    const std::string stem = base.filename().string();
    const auto landscape = landscape_from_name(stem);
    const auto hr = raster::read_raster(dataset::with_suffix(base, dataset::kHr10Suffix));
    const auto lr = raster::read_raster(dataset::with_suffix(base, dataset::kLr20Suffix));
    for (const auto& c : dataset::extract_crops(hr, lr, f.crop, landscape)) {
      const std::string name = stem + "_" + c.id;
      dataset::write_crop(c, crop_dir / name);
      if (f.materialize) dataset::write_materialized(dataset::make_sample(c, wald), crop_dir / name);
      entries.push_back({"crops/" + name, dataset::Split::kTrain, landscape});
    }
  }
  const auto sizes = parse_list(f.splits);
  if (sizes.empty() || sizes.size() > 3) {
    throw Error(ErrorCode::kInvalidArgument, "--splits takes train,val[,test]");
  }
  dataset::SplitSpec spec{sizes[0], sizes.size() > 1 ? sizes[1] : 0, 0};
  if (spec.train + spec.val > entries.size()) {
    throw Error(ErrorCode::kEmptySplit, "asked for " + std::to_string(spec.train + spec.val) +
                                            " crops but only " + std::to_string(entries.size()) +
                                            " were extracted");
  }
  spec.test = sizes.size() > 2 ? sizes[2] : entries.size() - spec.train - spec.val;
  auto manifest = dataset::build_manifest(std::span<const dataset::ManifestEntry>(entries), spec, f.seed);
  manifest.wald = wald;
  const fs::path file = f.out / "manifest.json";
  dataset::save_manifest(manifest, file);
  std::cerr << "crops: " << entries.size() << " (train " << spec.train << ", val " << spec.val
            << ", test " << spec.test << ")\n";
  std::cout << file.string() << '\n';
  return kExitOk;
}

// --- train / eval / infer -------------------------------------------------------

int run_train(const ModelFlags& m, const fs::path& manifest_file, const fs::path& out) {
  auto cfg = m.config();
  cfg.out_dir = out;
  const auto manifest = dataset::load_manifest(manifest_file);
  const auto result = train::train(cfg, manifest, [](const train::EpochLog& e) {
    std::cerr << train::format_log_row(e) << '\n';
  });
  std::cerr << "best val PSNR " << result.best_val_psnr << " dB at epoch " << result.best_epoch << '\n';
  std::cout << result.checkpoint.string() << '\n';
  return kExitOk;
}

int run_eval(const fs::path& checkpoint, const fs::path& manifest_file, const std::string& split_name,
             const fs::path& report, const std::string& psnr_mode) {
  const auto split = dataset::parse_split(split_name);
  if (!split) throw Error(ErrorCode::kInvalidArgument, "unknown split '" + split_name + "'");
  const auto model = train::model_from_checkpoint(train::load_checkpoint(checkpoint));
  const auto manifest = dataset::load_manifest(manifest_file);
  const auto mode = psnr_mode == "per-band" ? metrics::PsnrMode::kPerBand : metrics::PsnrMode::kJoint;
  const auto r = metrics::evaluate_split(model, manifest, *split, mode);
  if (report.empty()) {
    metrics::write_report_csv(r, std::cout);
  } else {
    metrics::write_report_csv(r, report);
    std::cout << report.string() << '\n';
  }
  std::fprintf(stderr, "%zu crops: ERGAS %.4f  PSNR %.4f  SSIM %.4f  SAM %.4f\n", r.crops.size(),
               r.overall.ergas, r.overall.psnr, r.overall.ssim, r.overall.sam);
  return kExitOk;
}

int run_infer(const fs::path& checkpoint, const fs::path& input, const fs::path& hr,
              const fs::path& out) {
  const auto model = train::model_from_checkpoint(train::load_checkpoint(checkpoint));
  const auto f_stack = raster::read_raster(input);
  const auto hr_stack = raster::read_raster(hr);
  if (hr_stack.gsd_dm() * 2 != f_stack.gsd_dm()) {
    throw Error(ErrorCode::kMixedGsd, "the 10m-band stack must have half the input's gsd");
  }
  const auto f = net::stack_to_tensor<float>(f_stack, raster::kBands20m);
  const auto hr4 = net::stack_to_tensor<float>(hr_stack, raster::kBands10m);
  diff::NoGradGuard no_grad;
  const auto u = net::forward(model, f, hr4).u;
  diff::check_finite(u, "model output");
  raster::write_raster(net::tensor_to_stack(u, hr_stack.gsd_dm()), out);
  std::cout << out.string() << '\n';
  return kExitOk;
}

// --- render -------------------------------------------------------------------------

int run_render(const std::vector<fs::path>& inputs, const std::string& kind, const fs::path& out,
               const raster::VisualOptions& vis) {
  std::vector<raster::BandStack> stacks;
  for (const auto& p : inputs) stacks.push_back(raster::read_raster(p));
  raster::Rgb8Image img;
  if (kind == "ndwi" || kind == "ndmi") {
    const auto k = kind == "ndwi" ? raster::IndexKind::kNdwi : raster::IndexKind::kNdmi;
    img = raster::render_index(raster::compute_index(stacks, k));
  } else {
    const auto k = kind == "true"    ? raster::CompositeKind::kTrueColor
                   : kind == "urban" ? raster::CompositeKind::kUrbanFalseColor
                                     : raster::CompositeKind::kSwirComposite;
    img = raster::render_visual(raster::compose(stacks, k), vis);
  }
  io::write_image(img, out);
  std::cout << out.string() << '\n';
  return kExitOk;
}

// --- ablate ----------------------------------------------------------------------------

struct AblationRow {
  std::string name;
  train::TrainConfig cfg;
};

std::vector<AblationRow> expand_grid(const ModelFlags& base, const std::vector<std::string>& grid,
                                     const std::string& preset) {
  std::vector<AblationRow> rows;
  const auto base_cfg = base.config();
  auto with = [&](const std::string& name, auto edit) {
    auto c = base_cfg;
    edit(c);
    c.validate();
    rows.push_back({name, c});
  };
  auto set_patch = [](train::TrainConfig& c, std::size_t p) {
    c.model.attention.patch_error = p;
    c.model.attention.patch_guide = p;
  };
  if (preset == "tables") {
    for (std::size_t k : {3, 6, 9}) {
      with("stages=" + std::to_string(k), [&](auto& c) { c.model.stages = k; });
    }
    for (std::size_t p : {3, 5, 7}) {
      for (std::size_t w : {3, 5, 7}) {
        with("patch=" + std::to_string(p) + ",window=" + std::to_string(w), [&](auto& c) {
          set_patch(c, p);
          c.model.attention.window = w;
        });
      }
    }
    for (const char* l : {"l1", "mse", "alpha:1:0.1", "alpha:1:0.5"}) {
      with(std::string("loss=") + l, [&](auto& c) { c.loss = *train::parse_loss(l); });
    }
    return rows;
  }
  if (!preset.empty()) throw Error(ErrorCode::kInvalidArgument, "unknown preset '" + preset + "'");

  // Cartesian product of the --grid axes.
  std::vector<std::pair<std::string, std::vector<std::string>>> axes;
  for (const auto& g : grid) {
    const auto eq = g.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::kInvalidArgument, "grid axis needs key=values: " + g);
    const std::string key = g.substr(0, eq);
    if (key != "stages" && key != "patch" && key != "window" && key != "loss" && key != "arch" &&
        key != "mode") {
      throw Error(ErrorCode::kInvalidArgument, "unknown grid key '" + key + "'");
    }
    const auto values = split_csv(g.substr(eq + 1));
    if (values.empty()) throw Error(ErrorCode::kInvalidArgument, "grid axis has no values: " + g);
    axes.emplace_back(key, values);
  }
  std::vector<std::size_t> idx(axes.size(), 0);
  while (true) {
    std::string name;
    auto c = base_cfg;
    for (std::size_t a = 0; a < axes.size(); ++a) {
      const auto& [key, values] = axes[a];
      const std::string& v = values[idx[a]];
      name += (name.empty() ? "" : ",") + key + "=" + v;
      if (key == "stages") c.model.stages = parse_list(v).at(0);
      if (key == "patch") set_patch(c, parse_list(v).at(0));
      if (key == "window") c.model.attention.window = parse_list(v).at(0);
      if (key == "loss") {
        const auto l = train::parse_loss(v);
        if (!l) throw Error(ErrorCode::kInvalidArgument, "bad loss '" + v + "'");
        c.loss = *l;
      }
      if (key == "arch") {
        const auto a2 = net::parse_arch(v);
        if (!a2) throw Error(ErrorCode::kInvalidArgument, "bad arch '" + v + "'");
        c.model.arch = *a2;
      }
      if (key == "mode") {
        const auto m = guide::parse_guide_mode(v);
        if (!m) throw Error(ErrorCode::kInvalidArgument, "bad mode '" + v + "'");
        c.model.mode = *m;
      }
    }
    c.validate();
    rows.push_back({name.empty() ? "base" : name, c});
    std::size_t a = 0;
    while (a < axes.size() && ++idx[a] == axes[a].second.size()) idx[a++] = 0;
    if (a == axes.size()) break;
  }
  return rows;
}

int run_ablate(const ModelFlags& base, const fs::path& manifest_file, const std::vector<std::string>& grid,
               const std::string& preset, const fs::path& out, const std::string& eval_split) {
  const auto manifest = dataset::load_manifest(manifest_file);
  const auto split = dataset::parse_split(eval_split);
  if (!split) throw Error(ErrorCode::kInvalidArgument, "unknown split '" + eval_split + "'");
  const auto rows = expand_grid(base, grid, preset);
  const auto train_set = train::load_split(manifest, dataset::Split::kTrain);
  const auto val_set = train::load_split(manifest, dataset::Split::kVal);

  std::ofstream csv;
  std::ostream* sink = &std::cout;
  if (!out.empty()) {
    csv.open(out, std::ios::binary);
    if (!csv) throw Error(ErrorCode::kIo, "cannot write " + out.string());
    sink = &csv;
  }
  *sink << "config,mode,arch,stages,patch,window,loss,epochs,best_epoch,val_psnr,ergas,psnr,ssim,sam\n";
  for (const auto& row : rows) {
    std::cerr << "ablate: " << row.name << '\n';
    const auto r = train::train(row.cfg, train_set, val_set);
    const auto report = metrics::evaluate_split(r.best, manifest, *split);
    const auto& m = row.cfg.model;
    char buf[256];
    std::snprintf(buf, sizeof buf, ",%zu,%zu,%.6f,%.6f,%.6f,%.6f,%.6f\n", row.cfg.epochs,
                  r.best_epoch, r.best_val_psnr, report.overall.ergas, report.overall.psnr,
                  report.overall.ssim, report.overall.sam);
    *sink << '"' << row.name << "\"," << guide::to_string(m.mode) << ',' << net::to_string(m.arch)
          << ',' << m.stages << ',' << m.attention.patch_error << ',' << m.attention.window << ','
          << train::to_string(row.cfg.loss) << buf << std::flush;
  }
  if (!out.empty()) std::cout << out.string() << '\n';
  return kExitOk;
}

// --- synth ----------------------------------------------------------------------------

int run_synth(const fs::path& out, std::size_t count, std::uint32_t size, std::uint64_t seed,
              const std::string& landscape_name) {
  const auto landscape = dataset::parse_landscape(landscape_name);
  if (!landscape) throw Error(ErrorCode::kInvalidArgument, "unknown landscape '" + landscape_name + "'");
  fs::create_directories(out);
  for (std::size_t i = 0; i < count; ++i) {
    const auto scene = synth::make_scene(size, seed + i, *landscape);
    char name[64];
    std::snprintf(name, sizeof name, "%s_%03zu", std::string(dataset::to_string(*landscape)).c_str(), i);
    raster::write_raster(scene.hr10, dataset::with_suffix(out / name, dataset::kHr10Suffix));
    raster::write_raster(scene.lr20, dataset::with_suffix(out / name, dataset::kLr20Suffix));
  }
  std::cout << out.string() << '\n';
  return kExitOk;
}

int exit_code_for(const Error& e) {
  switch (kind_of(e.code())) {
    case ErrorKind::kUsage: return kExitUsage;
    case ErrorKind::kData: return kExitData;
    case ErrorKind::kNumeric: return kExitNumeric;
  }
  return kExitData;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Guided super-resolution of Sentinel-2 20m bands"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  app.set_config("--config", "", "key=value file; command-line flags take precedence");
  app.allow_config_extras(false);

  PrepFlags prep;
  auto* prep_cmd = app.add_subcommand("dataset-prep", "cut scenes into crops and write a manifest");
  prep_cmd->add_option("--scenes", prep.scenes, "directory of <name>.hr10.s2sr/.lr20.s2sr scenes")->required();
  prep_cmd->add_option("--out", prep.out, "output directory")->required();
  prep_cmd->add_option("--crop", prep.crop, "crop size on the 10m grid");
  prep_cmd->add_option("--seed", prep.seed, "split shuffle seed");
  prep_cmd->add_option("--splits", prep.splits, "train,val[,test] crop counts");
  prep_cmd->add_option("--wald-sigma", prep.wald_sigma, "Gaussian sigma of the Wald degradation");
  prep_cmd->add_flag("--materialize", prep.materialize, "write degraded inputs next to each crop");

  ModelFlags train_flags;
  fs::path train_manifest, train_out;
  auto* train_cmd = app.add_subcommand("train", "train a model");
  train_cmd->add_option("--manifest", train_manifest, "manifest.json")->required();
  train_cmd->add_option("--out", train_out, "output directory")->required();
  train_flags.add(train_cmd);

  fs::path eval_ckpt, eval_manifest, eval_report;
  std::string eval_split = "test", eval_psnr = "joint";
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a split");
  eval_cmd->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required();
  eval_cmd->add_option("--manifest", eval_manifest, "manifest.json")->required();
  eval_cmd->add_option("--split", eval_split, "train, val or test");
  eval_cmd->add_option("--report", eval_report, "CSV report path (stdout if omitted)");
  eval_cmd->add_option("--psnr", eval_psnr, "joint or per-band")->check(CLI::IsMember({"joint", "per-band"}));

  fs::path infer_ckpt, infer_input, infer_hr, infer_out;
  auto* infer_cmd = app.add_subcommand("infer", "super-resolve one input");
  infer_cmd->add_option("--checkpoint", infer_ckpt, "checkpoint file")->required();
  infer_cmd->add_option("--input", infer_input, "20m-band raster to sharpen")->required();
  infer_cmd->add_option("--hr", infer_hr, "raster holding B2, B3, B4, B8 on the 2x grid")->required();
  infer_cmd->add_option("--out", infer_out, "output raster")->required();

  std::vector<fs::path> render_inputs;
  std::string render_kind;
  fs::path render_out;
  raster::VisualOptions vis;
  auto* render_cmd = app.add_subcommand("render", "render an index map or colour composite");
  render_cmd->add_option("--input", render_inputs, "raster(s) supplying the bands")->required();
  render_cmd->add_option("--kind", render_kind, "ndwi, ndmi, true, urban or swir")
      ->required()
      ->check(CLI::IsMember({"ndwi", "ndmi", "true", "urban", "swir"}));
  render_cmd->add_option("--out", render_out, "output image (.png or .ppm)")->required();
  render_cmd->add_option("--low", vis.low_pct, "lower clip percentile");
  render_cmd->add_option("--high", vis.high_pct, "upper clip percentile");
  render_cmd->add_option("--gamma", vis.gamma, "display gamma");

  ModelFlags ablate_flags;
  ablate_flags.width = 16;
  ablate_flags.epochs = 2;
  ablate_flags.batch = 1;
  fs::path ablate_manifest, ablate_out;
  std::vector<std::string> ablate_grid;
  std::string ablate_preset, ablate_split = "val";
  auto* ablate_cmd = app.add_subcommand("ablate", "train and evaluate a grid of configurations");
  ablate_cmd->add_option("--manifest", ablate_manifest, "manifest.json")->required();
  ablate_cmd->add_option("--grid", ablate_grid, "axis key=v1,v2,... (stages, patch, window, loss, arch, mode)");
  ablate_cmd->add_option("--preset", ablate_preset, "'tables': stage, patch x window and loss grids");
  ablate_cmd->add_option("--out", ablate_out, "summary CSV (stdout if omitted)");
  ablate_cmd->add_option("--eval-split", ablate_split, "split the rows are scored on");
  ablate_flags.add(ablate_cmd);

  std::string broken;
  bool list_checks = false;
  auto* self_cmd = app.add_subcommand("selftest", "gradient, adjoint and metric checks");
  self_cmd->add_option("--break", broken, "corrupt the named check (exercises the failure path)");
  self_cmd->add_flag("--list", list_checks, "list check names");

  fs::path synth_out;
  std::size_t synth_count = 1;
  std::uint32_t synth_size = 480;
  std::uint64_t synth_seed = 0;
  std::string synth_landscape = "mixed";
  auto* synth_cmd = app.add_subcommand("synth", "write procedural test scenes");
  synth_cmd->add_option("--out", synth_out, "output directory")->required();
  synth_cmd->add_option("--count", synth_count, "number of scenes");
  synth_cmd->add_option("--size", synth_size, "scene size on the 10m grid");
  synth_cmd->add_option("--seed", synth_seed, "first scene seed");
  synth_cmd->add_option("--landscape", synth_landscape, "urban, rural, coastal or mixed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  for (const auto* sub : app.get_subcommands()) {
    std::cerr << "# " << sub->get_name() << "\n" << sub->config_to_str(true, false);
  }

  try {
    if (*prep_cmd) return run_prep(prep);
    if (*train_cmd) return run_train(train_flags, train_manifest, train_out);
    if (*eval_cmd) return run_eval(eval_ckpt, eval_manifest, eval_split, eval_report, eval_psnr);
    if (*infer_cmd) return run_infer(infer_ckpt, infer_input, infer_hr, infer_out);
    if (*render_cmd) return run_render(render_inputs, render_kind, render_out, vis);
    if (*ablate_cmd) {
      if (ablate_grid.empty() && ablate_preset.empty()) {
        throw Error(ErrorCode::kInvalidArgument, "ablate needs --grid or --preset");
      }
      return run_ablate(ablate_flags, ablate_manifest, ablate_grid, ablate_preset, ablate_out, ablate_split);
    }
    if (*self_cmd) {
      if (list_checks) {
        for (const auto& n : selftest::check_names()) std::cout << n << '\n';
        return kExitOk;
      }
      const auto names = selftest::check_names();
      if (!broken.empty() && std::find(names.begin(), names.end(), broken) == names.end()) {
        throw Error(ErrorCode::kInvalidArgument, "unknown check '" + broken + "'");
      }
      const auto checks = selftest::run({broken}, &std::cout);
      std::size_t failed = 0;
      for (const auto& c : checks) failed += !c.ok;
      std::cout << (checks.size() - failed) << "/" << checks.size() << " checks passed\n";
      return failed ? kExitNumeric : kExitOk;
    }
    if (*synth_cmd) return run_synth(synth_out, synth_count, synth_size, synth_seed, synth_landscape);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
