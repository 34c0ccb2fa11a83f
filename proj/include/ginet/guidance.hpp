#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <optional>
#include <vector>

#include "ginet/diff/tensor.hpp"
#include "ginet/layers.hpp"
#include "ginet/raster.hpp"
#include "ginet/util.hpp"

namespace ginet::guide {

using diff::Tensor;

enum class GuideMode { kSimilarity, kCluster };
std::string_view to_string(GuideMode m);
std::optional<GuideMode> parse_guide_mode(std::string_view s);

// Six channels on the fine grid, ordered like raster::kBands20m.
template <typename T>
struct GuideImage {
  Tensor<T> pixels;  // [6,H,W]
  GuideMode mode = GuideMode::kSimilarity;
};

// Spectral-similarity guide from a stack holding B2, B3, B4, B8:
//   B5, B6, B7   <- (B4 + B8) / 2
//   B8a, B11, B12 <- B8
// The result carries the 20m band ids at the input's gsd.
raster::BandStack build_guide_similarity(const raster::BandStack& hr4);

// Same mapping on a [4,H,W] tensor with channels (B2, B3, B4, B8).
template <typename T>
Tensor<T> similarity_guide(const Tensor<T>& hr4);

// --- cluster-based guide -----------------------------------------------------

struct ClusterConfig {
  std::size_t clusters = 5;
  std::size_t conv_width = 48;   // 4 -> w -> w -> clusters, 3x3
  std::size_t conv_layers = 3;
  std::size_t mlp_hidden = 64;   // per-cluster 4 -> hidden -> 6
};

// Per-cluster MLP as a pair of 1x1 convolutions.
template <typename T>
struct ClusterMlp {
  ConvLayer<T> hidden;
  ConvLayer<T> out;
};

template <typename T>
struct ClusterParams {
  ClusterConfig cfg;
  std::vector<ConvLayer<T>> convs;
  std::vector<ClusterMlp<T>> mlps;

  static ClusterParams init(const ClusterConfig& cfg, Rng& rng);
  void collect(NamedTensors<T>& out) const;
};

template <typename T>
std::uint64_t guide_param_count(const ClusterParams<T>& p);

template <typename T>
struct ClusterAssignment {
  std::size_t height = 0, width = 0;
  std::vector<std::uint8_t> labels;  // argmax of probs, lowest index wins ties
  Tensor<T> probs;                   // [L,H,W], softmax over L
};

// Per-pixel cluster logits from the conv stack.
template <typename T>
Tensor<T> cluster_logits(const Tensor<T>& hr4, const ClusterParams<T>& p);

template <typename T>
ClusterAssignment<T> cluster_assign(const Tensor<T>& hr4, const ClusterParams<T>& p);

// Lowest-index argmax across channels of an [L,H,W] tensor.
template <typename T>
std::vector<std::uint8_t> argmax_labels(const Tensor<T>& probs);

// Hard routing: split pixels by label, run each cluster's MLP on its pixels,
// write the results back to their positions. [4,H,W] -> [6,H,W].
template <typename T>
Tensor<T> spec_up(const Tensor<T>& hr4, std::span<const std::uint8_t> labels,
                  const ClusterParams<T>& p);

// Soft routing used while training: sum_l probs[l] * MLP_l(x).
template <typename T>
Tensor<T> spec_up_soft(const Tensor<T>& hr4, const Tensor<T>& probs, const ClusterParams<T>& p);

enum class Routing { kHard, kSoft };

// Builds G_u for either mode. `params` is only read in cluster mode.
template <typename T>
GuideImage<T> build_guide(GuideMode mode, const Tensor<T>& hr4, const ClusterParams<T>* params,
                          Routing routing);

}  // namespace ginet::guide
