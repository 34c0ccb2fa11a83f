#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "ginet/diff/tensor.hpp"
#include "ginet/dataset.hpp"
#include "ginet/guidance.hpp"
#include "ginet/layers.hpp"
#include "ginet/util.hpp"

namespace ginet::net {

using diff::Tensor;

inline constexpr std::size_t kChannels = 6;  // 20m bands
inline constexpr std::size_t kHeads = 3;

// kResNL is the full model. kResNet drops the attention and feeds concat(e, G)
// to the residual trunk; kResNetSR drops the guide as well.
enum class Arch { kResNL, kResNet, kResNetSR };
std::string_view to_string(Arch a);
std::optional<Arch> parse_arch(std::string_view s);

struct AttentionConfig {
  std::size_t window = 5;
  std::size_t patch_error = 3;
  std::size_t patch_guide = 3;
  std::size_t patch_concat = 1;
  std::size_t feat_dim = 32;
  std::size_t fused = 96;
};

struct ModelConfig {
  guide::GuideMode mode = guide::GuideMode::kCluster;
  Arch arch = Arch::kResNL;
  std::size_t stages = 6;
  std::size_t width = 128;
  std::size_t resblocks = 3;
  AttentionConfig attention;
  guide::ClusterConfig cluster;

  void validate() const;
  bool uses_guide() const { return arch != Arch::kResNetSR; }
  bool uses_cluster_params() const { return uses_guide() && mode == guide::GuideMode::kCluster; }
};

nlohmann::json to_json(const ModelConfig& cfg);
// Missing keys keep their defaults; bad values throw InvalidArgument.
ModelConfig model_config_from_json(const nlohmann::json& j);

template <typename T>
struct HeadParams {
  ConvLayer<T> theta, phi, value, out;  // all 1x1
};

template <typename T>
struct ResBlock {
  ConvLayer<T> first, second;
};

template <typename T>
struct StageParams {
  Tensor<T> db;  // [6,3,3] depthwise, no bias
  Tensor<T> up;  // [6,3,3] depthwise transposed, no bias
  std::vector<HeadParams<T>> heads;  // empty unless kResNL
  std::optional<ConvLayer<T>> fusion;
  ConvLayer<T> head_in;
  std::vector<ResBlock<T>> blocks;
  ConvLayer<T> tail;
};

template <typename T>
struct UnfoldedModel {
  ModelConfig cfg;
  std::optional<guide::ClusterParams<T>> guide;
  std::vector<StageParams<T>> stages;

  // DB starts as a centered delta, the upsampler as a bilinear tent and the
  // tail at zero, so an untrained model returns the bicubic estimate.
  static UnfoldedModel init(const ModelConfig& cfg, std::uint64_t seed);
};

// Stable names, e.g. "stage0.head1.theta.weight", "guide.mlp2.out.bias".
template <typename T>
NamedTensors<T> named_parameters(const UnfoldedModel<T>& m);

// Copies values by name; every parameter must be present with its shape.
template <typename T, typename U>
void assign_parameters(UnfoldedModel<T>& m, const NamedTensors<U>& values);

template <typename To, typename From>
UnfoldedModel<To> cast_model(const UnfoldedModel<From>& m);

// Sets the tail (weights and bias) of every stage to zero.
template <typename T>
void zero_corrections(UnfoldedModel<T>& m);

template <typename T>
Tensor<T> db_operator(const Tensor<T>& u, const StageParams<T>& s);
template <typename T>
Tensor<T> upsample_error(const Tensor<T>& e_lr, const StageParams<T>& s);

// Query and key descriptors of one head: 1x1 projections of `ref`, then
// flattened patch x patch neighbourhoods.
template <typename T>
std::pair<Tensor<T>, Tensor<T>> head_descriptors(const Tensor<T>& ref, const HeadParams<T>& h,
                                                 std::size_t patch);

// Window attention with weights from `ref` applied to V(e); output projected
// to feat_dim channels. With `project = false` the output projection is skipped.
template <typename T>
Tensor<T> attention_head(const Tensor<T>& e, const Tensor<T>& ref, const HeadParams<T>& h,
                         std::size_t window, std::size_t patch, bool project = true);

template <typename T>
Tensor<T> mha(const Tensor<T>& e, const Tensor<T>& g, const StageParams<T>& s,
              const AttentionConfig& cfg);

// `g` may be undefined for kResNetSR.
template <typename T>
Tensor<T> res_nl(const Tensor<T>& e, const Tensor<T>& g, const StageParams<T>& s,
                 const ModelConfig& cfg);

template <typename T>
struct ForwardResult {
  Tensor<T> u;                       // u^K
  std::vector<Tensor<T>> intermediates;  // u^1..u^{K-1} when requested
  Tensor<T> guide;                   // undefined for kResNetSR
};

// f [6,h,w] and hr4 [4,2h,2w] (B2,B3,B4,B8).
template <typename T>
ForwardResult<T> forward(const UnfoldedModel<T>& m, const Tensor<T>& f, const Tensor<T>& hr4,
                         bool keep_intermediates = false,
                         guide::Routing routing = guide::Routing::kHard);

struct StageCount {
  std::uint64_t db = 0, up = 0, resnl = 0;
};

struct ParamCount {
  std::uint64_t guide = 0;
  std::vector<StageCount> stages;
  std::uint64_t total = 0;
};

template <typename T>
ParamCount count_params(const UnfoldedModel<T>& m);

}  // namespace ginet::net

namespace ginet::net {

// A SampleTriple as tensors: f [6,h,w], hr4 [4,2h,2w] (B2,B3,B4,B8), ref [6,2h,2w].
template <typename T>
struct SampleTensors {
  Tensor<T> f, hr4, ref;
};

// The listed bands of `stack`, in that order, as a constant [C,H,W] tensor.
template <typename T>
Tensor<T> stack_to_tensor(const raster::BandStack& stack, std::span<const raster::BandId> bands);

template <typename T>
SampleTensors<T> to_tensors(const dataset::SampleTriple& s);

// A [6,H,W] tensor as a stack of the 20m bands at `gsd_dm`.
raster::BandStack tensor_to_stack(const Tensor<float>& t, std::uint32_t gsd_dm);

}  // namespace ginet::net
