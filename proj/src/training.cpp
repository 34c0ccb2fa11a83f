#include "ginet/training.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>

#include "ginet/diff/adam.hpp"
#include "ginet/diff/ops.hpp"
#include "ginet/error.hpp"
#include "ginet/metrics.hpp"

namespace ginet::train {

namespace fs = std::filesystem;

template <typename T>
Tensor<T> loss_l1(const Tensor<T>& u, const Tensor<T>& ref) {
  return diff::mean(diff::abs(diff::sub(ref, u)));
}

template <typename T>
Tensor<T> loss_mse(const Tensor<T>& u, const Tensor<T>& ref) {
  return diff::mean(diff::square(diff::sub(ref, u)));
}

template <typename T>
Tensor<T> loss_alpha(const Tensor<T>& u_final, std::span<const Tensor<T>> intermediates,
                     const Tensor<T>& ref, int i, double alpha) {
  if (i != 1 && i != 2) throw Error(ErrorCode::kInvalidArgument, "loss exponent must be 1 or 2");
  if (!(alpha >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "alpha must be >= 0");
  Tensor<T> loss = i == 1 ? loss_l1(u_final, ref) : loss_mse(u_final, ref);
  if (alpha == 0.0 || intermediates.empty()) return loss;
  Tensor<T> inner = loss_mse(intermediates[0], ref);
  for (std::size_t k = 1; k < intermediates.size(); ++k) {
    inner = diff::add(inner, loss_mse(intermediates[k], ref));
  }
  return diff::add(loss, diff::scale(inner, T(alpha)));
}

std::optional<LossSpec> parse_loss(std::string_view s) {
  if (s == "l1") return LossSpec{LossKind::kL1, 1, 0.0};
  if (s == "mse") return LossSpec{LossKind::kMse, 2, 0.0};
  if (!s.starts_with("alpha:")) return std::nullopt;
  const std::string rest(s.substr(6));
  const auto colon = rest.find(':');
  if (colon == std::string::npos) return std::nullopt;
  try {
    std::size_t used = 0;
    const int i = std::stoi(rest.substr(0, colon), &used);
    if (used != colon || (i != 1 && i != 2)) return std::nullopt;
    const std::string a = rest.substr(colon + 1);
    const double alpha = std::stod(a, &used);
    if (used != a.size() || !(alpha >= 0.0) || !std::isfinite(alpha)) return std::nullopt;
    return LossSpec{LossKind::kAlpha, i, alpha};
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::string to_string(const LossSpec& l) {
  switch (l.kind) {
    case LossKind::kL1: return "l1";
    case LossKind::kMse: return "mse";
    case LossKind::kAlpha: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "alpha:%d:%g", l.i, l.alpha);
      return buf;
    }
  }
  return "?";
}

template <typename T>
Tensor<T> compute_loss(const LossSpec& spec, const net::ForwardResult<T>& out, const Tensor<T>& ref) {
  switch (spec.kind) {
    case LossKind::kL1: return loss_l1(out.u, ref);
    case LossKind::kMse: return loss_mse(out.u, ref);
    case LossKind::kAlpha:
      return loss_alpha<T>(out.u, out.intermediates, ref, spec.i, spec.alpha);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown loss");
}

template Tensor<float> loss_l1(const Tensor<float>&, const Tensor<float>&);
template Tensor<double> loss_l1(const Tensor<double>&, const Tensor<double>&);
template Tensor<float> loss_mse(const Tensor<float>&, const Tensor<float>&);
template Tensor<double> loss_mse(const Tensor<double>&, const Tensor<double>&);
template Tensor<float> loss_alpha(const Tensor<float>&, std::span<const Tensor<float>>,
                                  const Tensor<float>&, int, double);
template Tensor<double> loss_alpha(const Tensor<double>&, std::span<const Tensor<double>>,
                                   const Tensor<double>&, int, double);
template Tensor<float> compute_loss(const LossSpec&, const net::ForwardResult<float>&,
                                    const Tensor<float>&);
template Tensor<double> compute_loss(const LossSpec&, const net::ForwardResult<double>&,
                                     const Tensor<double>&);

// --- configuration ------------------------------------------------------------

void TrainConfig::validate() const {
  model.validate();
  if (epochs == 0) throw Error(ErrorCode::kInvalidArgument, "epochs must be >= 1");
  if (!(lr > 0.0)) throw Error(ErrorCode::kInvalidArgument, "lr must be > 0");
  if (batch_size == 0) throw Error(ErrorCode::kInvalidArgument, "batch size must be >= 1");
  if (loss.kind == LossKind::kAlpha && !(loss.alpha >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "alpha must be >= 0");
  }
}

nlohmann::json to_json(const TrainConfig& c) {
  nlohmann::json j;
  j["model"] = net::to_json(c.model);
  j["epochs"] = c.epochs;
  j["lr"] = c.lr;
  j["batch_size"] = c.batch_size;
  j["loss"] = to_string(c.loss);
  j["seed"] = c.seed;
  j["train_routing"] = c.train_routing == guide::Routing::kSoft ? "soft" : "hard";
  return j;
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  try {
    if (j.contains("model")) c.model = net::model_config_from_json(j.at("model"));
    if (j.contains("epochs")) c.epochs = j.at("epochs").get<std::size_t>();
    if (j.contains("lr")) c.lr = j.at("lr").get<double>();
    if (j.contains("batch_size")) c.batch_size = j.at("batch_size").get<std::size_t>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("loss")) {
      const auto l = parse_loss(j.at("loss").get<std::string>());
      if (!l) throw Error(ErrorCode::kInvalidArgument, "bad loss spec");
      c.loss = *l;
    }
    if (j.contains("train_routing")) {
      const auto r = j.at("train_routing").get<std::string>();
      if (r != "soft" && r != "hard") throw Error(ErrorCode::kInvalidArgument, "bad routing");
      c.train_routing = r == "soft" ? guide::Routing::kSoft : guide::Routing::kHard;
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("train config: ") + e.what());
  }
  c.validate();
  return c;
}

// --- checkpoints -----------------------------------------------------------------

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

constexpr char kMagic[4] = {'B', 'P', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

template <typename U>
void put(std::vector<std::uint8_t>& out, U v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + sizeof(U));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename U>
  U get() {
    U v;
    std::memcpy(&v, take(sizeof(U)).data(), sizeof(U));
    return v;
  }

  std::span<const std::uint8_t> take(std::size_t n) {
    if (bytes_.size() - pos_ < n) {
      throw Error(ErrorCode::kTruncated, "checkpoint ends at byte " + std::to_string(bytes_.size()) +
                                             ", needed " + std::to_string(pos_ + n));
    }
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ck) {
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  put<std::uint32_t>(out, kVersion);
  const std::string cfg = ck.config.dump();
  put<std::uint32_t>(out, std::uint32_t(cfg.size()));
  out.insert(out.end(), cfg.begin(), cfg.end());
  put<std::uint32_t>(out, std::uint32_t(ck.tensors.size()));
  for (const auto& [name, t] : ck.tensors) {
    if (name.size() > 0xffff || t.rank() > 0xff) {
      throw Error(ErrorCode::kInvalidArgument, "tensor name or rank too large: " + name);
    }
    put<std::uint16_t>(out, std::uint16_t(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    put<std::uint8_t>(out, std::uint8_t(t.rank()));
    for (std::size_t d : t.shape()) put<std::uint32_t>(out, std::uint32_t(d));
    for (float v : t.values()) put<float>(out, v);
  }
  return out;
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  const auto magic = r.take(4);
  if (std::memcmp(magic.data(), kMagic, 4) != 0) {
    throw Error(ErrorCode::kBadMagic, "not a checkpoint (magic is not BPCK)");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kVersion) {
    throw Error(ErrorCode::kBadVersion, "checkpoint version " + std::to_string(version));
  }
  Checkpoint ck;
  const auto cfg_len = r.get<std::uint32_t>();
  const auto cfg = r.take(cfg_len);
  try {
    ck.config = nlohmann::json::parse(cfg.begin(), cfg.end());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kBadCheckpoint, std::string("checkpoint config: ") + e.what());
  }
  const auto count = r.get<std::uint32_t>();
  for (std::uint32_t n = 0; n < count; ++n) {
    const auto name_len = r.get<std::uint16_t>();
    const auto name_bytes = r.take(name_len);
    std::string name(name_bytes.begin(), name_bytes.end());
    const auto rank = r.get<std::uint8_t>();
    diff::Shape shape(rank);
    for (auto& d : shape) d = r.get<std::uint32_t>();
    std::vector<float> values(diff::numel(shape));
    const auto raw = r.take(values.size() * sizeof(float));
    std::memcpy(values.data(), raw.data(), raw.size());
    ck.tensors.emplace_back(std::move(name), Tensor<float>(std::move(shape), std::move(values)));
  }
  if (!r.done()) throw Error(ErrorCode::kBadCheckpoint, "trailing bytes after the last tensor");
  return ck;
}

void save_checkpoint(const Checkpoint& ck, const fs::path& path) {
  const auto bytes = encode_checkpoint(ck);
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    if (!out) throw Error(ErrorCode::kIo, "write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

Checkpoint load_checkpoint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

Checkpoint make_checkpoint(const net::UnfoldedModel<float>& model, const TrainConfig& cfg,
                           std::size_t epoch, double best_val_psnr) {
  Checkpoint ck;
  auto train_cfg = to_json(cfg);
  train_cfg.erase("model");
  ck.config["model"] = net::to_json(model.cfg);
  ck.config["train"] = train_cfg;
  ck.config["epoch"] = epoch;
  ck.config["best_val_psnr"] = best_val_psnr;
  for (const auto& [name, t] : net::named_parameters(model)) {
    ck.tensors.emplace_back(name, t.detach());
  }
  return ck;
}

net::UnfoldedModel<float> model_from_checkpoint(const Checkpoint& ck) {
  if (!ck.config.contains("model")) throw Error(ErrorCode::kBadCheckpoint, "checkpoint has no model config");
  auto model = net::UnfoldedModel<float>::init(net::model_config_from_json(ck.config.at("model")), 0);
  net::assign_parameters(model, ck.tensors);
  return model;
}

// --- training loop -----------------------------------------------------------------

std::string format_log_row(const EpochLog& e) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%zu,%.9g,%.6f,%d", e.epoch, e.train_loss, e.val_psnr,
                e.improved ? 1 : 0);
  return buf;
}

double mean_psnr(const net::UnfoldedModel<float>& model,
                 const std::vector<net::SampleTensors<float>>& samples) {
  diff::NoGradGuard no_grad;
  double acc = 0.0;
  for (const auto& s : samples) {
    const auto out = net::forward(model, s.f, s.hr4);
    diff::check_finite(out.u, "validation output");
    acc += metrics::psnr(metrics::view(out.u), metrics::view(s.ref));
  }
  return acc / double(samples.size());
}

TrainResult train(const TrainConfig& cfg, const std::vector<net::SampleTensors<float>>& train_set,
                  const std::vector<net::SampleTensors<float>>& val_set, const EpochCallback& on_epoch) {
  cfg.validate();
  if (train_set.empty()) throw Error(ErrorCode::kEmptySplit, "training split is empty");
  if (val_set.empty()) throw Error(ErrorCode::kEmptySplit, "validation split is empty");

  auto model = net::UnfoldedModel<float>::init(cfg.model, cfg.seed);
  std::vector<Tensor<float>> params;
  for (const auto& [name, t] : net::named_parameters(model)) params.push_back(t);
  diff::Adam<float> adam(params, {.lr = cfg.lr});
  Rng order_rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);

  TrainResult result;
  result.best_val_psnr = -std::numeric_limits<double>::infinity();
  std::ofstream log_out;
  if (!cfg.out_dir.empty()) {
    fs::create_directories(cfg.out_dir);
    result.log_file = cfg.out_dir / kLogName;
    log_out.open(result.log_file, std::ios::binary);
    if (!log_out) throw Error(ErrorCode::kIo, "cannot write " + result.log_file.string());
    log_out << kLogHeader << '\n';
  }

  std::vector<std::size_t> order(train_set.size());
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t(0));
    shuffle(order, order_rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      const float inv = 1.0f / float(stop - start);
      adam.zero_grad();
      for (std::size_t b = start; b < stop; ++b) {
        const auto& s = train_set[order[b]];
        const auto out = net::forward(model, s.f, s.hr4, cfg.loss.needs_intermediates(),
                                      cfg.train_routing);
        const auto loss = compute_loss(cfg.loss, out, s.ref);
        const double value = loss.item();
        if (!std::isfinite(value)) {
          throw Error(ErrorCode::kNumericFailure, "non-finite loss at epoch " + std::to_string(epoch) +
                                                      ", sample " + std::to_string(order[b]));
        }
        loss_sum += value;
        diff::backward(diff::scale(loss, inv));
      }
      adam.step();
    }

    EpochLog row;
    row.epoch = epoch;
    row.train_loss = loss_sum / double(order.size());
    row.val_psnr = mean_psnr(model, val_set);
    row.improved = row.val_psnr > result.best_val_psnr;
    if (row.improved) {
      result.best_val_psnr = row.val_psnr;
      result.best_epoch = epoch;
      result.best = net::cast_model<float>(model);
      if (!cfg.out_dir.empty()) {
        result.checkpoint = cfg.out_dir / kCheckpointName;
        save_checkpoint(make_checkpoint(model, cfg, epoch, row.val_psnr), result.checkpoint);
      }
    }
    result.log.push_back(row);
    if (log_out.is_open()) log_out << format_log_row(row) << '\n' << std::flush;
    if (on_epoch) on_epoch(row);
  }
  return result;
}

std::vector<net::SampleTensors<float>> load_split(const dataset::Manifest& manifest,
                                                  dataset::Split split) {
  std::vector<net::SampleTensors<float>> out;
  for (const auto& e : manifest.split(split)) {
    out.push_back(net::to_tensors<float>(dataset::load_sample(manifest.resolve(e), manifest.wald)));
  }
  return out;
}

TrainResult train(const TrainConfig& cfg, const dataset::Manifest& manifest,
                  const EpochCallback& on_epoch) {
  const auto train_set = load_split(manifest, dataset::Split::kTrain);
  if (train_set.empty()) throw Error(ErrorCode::kEmptySplit, "manifest has no training crops");
  const auto val_set = load_split(manifest, dataset::Split::kVal);
  if (val_set.empty()) throw Error(ErrorCode::kEmptySplit, "manifest has no validation crops");
  return train(cfg, train_set, val_set, on_epoch);
}

}  // namespace ginet::train
