#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "ginet/dataset.hpp"
#include "ginet/diff/tensor.hpp"
#include "ginet/network.hpp"

namespace ginet::train {

using diff::Tensor;

// --- losses -----------------------------------------------------------------

template <typename T>
Tensor<T> loss_l1(const Tensor<T>& u, const Tensor<T>& ref);
template <typename T>
Tensor<T> loss_mse(const Tensor<T>& u, const Tensor<T>& ref);

// mean|ref - u_K|^i + alpha * sum_k mean (ref - u_k)^2 over the intermediates
// u_1..u_{K-1}. With alpha == 0 only the first term is built.
template <typename T>
Tensor<T> loss_alpha(const Tensor<T>& u_final, std::span<const Tensor<T>> intermediates,
                     const Tensor<T>& ref, int i, double alpha);

enum class LossKind { kL1, kMse, kAlpha };

struct LossSpec {
  LossKind kind = LossKind::kL1;
  int i = 1;          // kAlpha only
  double alpha = 0;   // kAlpha only

  bool needs_intermediates() const { return kind == LossKind::kAlpha && alpha != 0.0; }
};

// "l1", "mse" or "alpha:I:A".
std::optional<LossSpec> parse_loss(std::string_view s);
std::string to_string(const LossSpec& l);

template <typename T>
Tensor<T> compute_loss(const LossSpec& spec, const net::ForwardResult<T>& out, const Tensor<T>& ref);

// --- configuration ------------------------------------------------------------

struct TrainConfig {
  net::ModelConfig model;
  std::size_t epochs = 1500;
  double lr = 1e-4;
  std::size_t batch_size = 4;
  LossSpec loss;
  std::uint64_t seed = 0;
  // Cluster routing while training; validation always routes hard.
  guide::Routing train_routing = guide::Routing::kSoft;
  std::filesystem::path out_dir;  // empty: keep everything in memory

  void validate() const;
};

// The output directory is not part of the echo, so runs that differ only in
// where they write produce identical checkpoints.
nlohmann::json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j);

// --- checkpoints -----------------------------------------------------------------

struct Checkpoint {
  nlohmann::json config;  // {"model": ..., "train": ..., "epoch": n, "best_val_psnr": x}
  NamedTensors<float> tensors;
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ck);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);
void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

Checkpoint make_checkpoint(const net::UnfoldedModel<float>& model, const TrainConfig& cfg,
                           std::size_t epoch, double best_val_psnr);
net::UnfoldedModel<float> model_from_checkpoint(const Checkpoint& ck);

// --- training loop -----------------------------------------------------------------

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0;
  double val_psnr = 0;
  bool improved = false;
};

std::string format_log_row(const EpochLog& e);
inline constexpr std::string_view kLogHeader = "epoch,train_loss,val_psnr,improved";

struct TrainResult {
  net::UnfoldedModel<float> best;
  double best_val_psnr = 0;
  std::size_t best_epoch = 0;
  std::vector<EpochLog> log;
  std::filesystem::path checkpoint;  // empty when out_dir is empty
  std::filesystem::path log_file;
};

inline constexpr std::string_view kCheckpointName = "best.bpck";
inline constexpr std::string_view kLogName = "train_log.csv";

using EpochCallback = std::function<void(const EpochLog&)>;

// Trains on in-memory samples. Throws EmptySplit for an empty set and
// NumericFailure on a non-finite loss.
TrainResult train(const TrainConfig& cfg, const std::vector<net::SampleTensors<float>>& train_set,
                  const std::vector<net::SampleTensors<float>>& val_set,
                  const EpochCallback& on_epoch = {});

// Loads the train and val splits of `manifest` and trains on them.
TrainResult train(const TrainConfig& cfg, const dataset::Manifest& manifest,
                  const EpochCallback& on_epoch = {});

std::vector<net::SampleTensors<float>> load_split(const dataset::Manifest& manifest,
                                                  dataset::Split split);

// Mean joint PSNR of the model over `samples` (hard routing, no graph).
double mean_psnr(const net::UnfoldedModel<float>& model,
                 const std::vector<net::SampleTensors<float>>& samples);

}  // namespace ginet::train
