#include "ginet/guidance.hpp"

#include "ginet/diff/ops.hpp"
#include "ginet/error.hpp"

namespace ginet::guide {

using raster::BandId;
using raster::BandStack;

std::string_view to_string(GuideMode m) {
  return m == GuideMode::kSimilarity ? "similarity" : "cluster";
}

std::optional<GuideMode> parse_guide_mode(std::string_view s) {
  if (s == "similarity" || s == "ginet") return GuideMode::kSimilarity;
  if (s == "cluster" || s == "ginet+") return GuideMode::kCluster;
  return std::nullopt;
}

BandStack build_guide_similarity(const BandStack& hr4) {
  const auto b4 = hr4.band(BandId::kB4);
  const auto b8 = hr4.band(BandId::kB8);
  BandStack out(std::vector<BandId>(raster::kBands20m.begin(), raster::kBands20m.end()),
                hr4.height(), hr4.width(), hr4.gsd_dm());
  for (std::size_t i = 0; i < hr4.plane_size(); ++i) {
    const float avg = (b4[i] + b8[i]) * 0.5f;
    out.plane(0)[i] = avg;  // B5
    out.plane(1)[i] = avg;  // B6
    out.plane(2)[i] = avg;  // B7
    out.plane(3)[i] = b8[i];  // B8a
    out.plane(4)[i] = b8[i];  // B11
    out.plane(5)[i] = b8[i];  // B12
  }
  return out;
}

template <typename T>
Tensor<T> similarity_guide(const Tensor<T>& hr4) {
  if (hr4.rank() != 3 || hr4.dim(0) != 4) {
    throw Error(ErrorCode::kMissingBand, "similarity guide needs [4,H,W] (B2,B3,B4,B8), got " +
                                             diff::to_string(hr4.shape()));
  }
  const auto b8 = diff::slice_channels(hr4, 3, 1);
  const auto avg = diff::scale(diff::add(diff::slice_channels(hr4, 2, 1), b8), T(0.5));
  const Tensor<T> parts[] = {avg, avg, avg, b8, b8, b8};
  return diff::concat_channels<T>(std::span<const Tensor<T>>(parts));
}

template <typename T>
ClusterParams<T> ClusterParams<T>::init(const ClusterConfig& cfg, Rng& rng) {
  if (cfg.clusters == 0 || cfg.clusters > 255) {
    throw Error(ErrorCode::kInvalidArgument, "cluster count must be in [1, 255]");
  }
  ClusterParams p;
  p.cfg = cfg;
  std::size_t in = 4;
  for (std::size_t i = 0; i < cfg.conv_layers; ++i) {
    const std::size_t out = (i + 1 == cfg.conv_layers) ? cfg.clusters : cfg.conv_width;
    p.convs.push_back(ConvLayer<T>::init(in, out, 3, rng));
    in = out;
  }
  for (std::size_t l = 0; l < cfg.clusters; ++l) {
    ClusterMlp<T> mlp;
    mlp.hidden = ConvLayer<T>::init(4, cfg.mlp_hidden, 1, rng);
    mlp.out = ConvLayer<T>::init(cfg.mlp_hidden, raster::kBands20m.size(), 1, rng);
    p.mlps.push_back(std::move(mlp));
  }
  return p;
}

template <typename T>
void ClusterParams<T>::collect(NamedTensors<T>& out) const {
  for (std::size_t i = 0; i < convs.size(); ++i) {
    convs[i].collect("guide.conv" + std::to_string(i), out);
  }
  for (std::size_t l = 0; l < mlps.size(); ++l) {
    mlps[l].hidden.collect("guide.mlp" + std::to_string(l) + ".hidden", out);
    mlps[l].out.collect("guide.mlp" + std::to_string(l) + ".out", out);
  }
}

template <typename T>
std::uint64_t guide_param_count(const ClusterParams<T>& p) {
  std::uint64_t n = 0;
  for (const auto& c : p.convs) n += c.param_count();
  for (const auto& m : p.mlps) n += m.hidden.param_count() + m.out.param_count();
  return n;
}

template <typename T>
Tensor<T> cluster_logits(const Tensor<T>& hr4, const ClusterParams<T>& p) {
  if (hr4.rank() != 3 || hr4.dim(0) != 4) {
    throw Error(ErrorCode::kShapeMismatch, "cluster block needs [4,H,W]");
  }
  if (p.convs.empty()) throw Error(ErrorCode::kInvalidArgument, "cluster block has no layers");
  Tensor<T> x = hr4;
  for (std::size_t i = 0; i < p.convs.size(); ++i) {
    x = p.convs[i](x);
    if (i + 1 < p.convs.size()) x = diff::relu(x);
  }
  return x;
}

template <typename T>
std::vector<std::uint8_t> argmax_labels(const Tensor<T>& probs) {
  const std::size_t l = probs.dim(0);
  const std::size_t plane = probs.dim(1) * probs.dim(2);
  std::vector<std::uint8_t> labels(plane, 0);
  const T* v = probs.values().data();
  for (std::size_t i = 0; i < plane; ++i) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < l; ++c) {
      if (v[c * plane + i] > v[best * plane + i]) best = c;
    }
    labels[i] = static_cast<std::uint8_t>(best);
  }
  return labels;
}

template <typename T>
ClusterAssignment<T> cluster_assign(const Tensor<T>& hr4, const ClusterParams<T>& p) {
  ClusterAssignment<T> a;
  a.height = hr4.dim(1);
  a.width = hr4.dim(2);
  a.probs = diff::softmax_channels(cluster_logits(hr4, p));
  a.labels = argmax_labels(a.probs);
  return a;
}

namespace {

template <typename T>
Tensor<T> run_mlp(const ClusterMlp<T>& mlp, const Tensor<T>& x) {
  return mlp.out(diff::relu(mlp.hidden(x)));
}

}  // namespace

template <typename T>
Tensor<T> spec_up(const Tensor<T>& hr4, std::span<const std::uint8_t> labels,
                  const ClusterParams<T>& p) {
  const std::size_t h = hr4.dim(1), w = hr4.dim(2);
  if (labels.size() != h * w) {
    throw Error(ErrorCode::kShapeMismatch, "label map does not match the image");
  }
  std::vector<std::vector<std::uint32_t>> members(p.mlps.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= p.mlps.size()) {
      throw Error(ErrorCode::kLabelOutOfRange,
                  "label " + std::to_string(int(labels[i])) + " with " +
                      std::to_string(p.mlps.size()) + " clusters");
    }
    members[labels[i]].push_back(static_cast<std::uint32_t>(i));
  }
  Tensor<T> out;
  for (std::size_t l = 0; l < members.size(); ++l) {
    if (members[l].empty()) continue;
    const auto part = run_mlp(p.mlps[l], diff::gather_pixels<T>(hr4, members[l]));
    const auto placed = diff::scatter_pixels<T>(part, members[l], h, w);
    out = out.defined() ? diff::add(out, placed) : placed;
  }
  if (!out.defined()) out = Tensor<T>(diff::Shape{raster::kBands20m.size(), h, w});
  return out;
}

template <typename T>
Tensor<T> spec_up_soft(const Tensor<T>& hr4, const Tensor<T>& probs, const ClusterParams<T>& p) {
  if (probs.dim(0) != p.mlps.size()) {
    throw Error(ErrorCode::kShapeMismatch, "probability channels do not match the cluster count");
  }
  Tensor<T> out;
  for (std::size_t l = 0; l < p.mlps.size(); ++l) {
    const auto weighted =
        diff::mul_channel(run_mlp(p.mlps[l], hr4), diff::slice_channels(probs, l, 1));
    out = out.defined() ? diff::add(out, weighted) : weighted;
  }
  return out;
}

template <typename T>
GuideImage<T> build_guide(GuideMode mode, const Tensor<T>& hr4, const ClusterParams<T>* params,
                          Routing routing) {
  if (mode == GuideMode::kSimilarity) return {similarity_guide(hr4), mode};
  if (!params) throw Error(ErrorCode::kInvalidArgument, "cluster guide needs parameters");
  if (routing == Routing::kSoft) {
    const auto probs = diff::softmax_channels(cluster_logits(hr4, *params));
    return {spec_up_soft(hr4, probs, *params), mode};
  }
  const auto assignment = cluster_assign(hr4, *params);
  return {spec_up<T>(hr4, assignment.labels, *params), mode};
}

#define GINET_INSTANTIATE(T)                                                                     \
  template Tensor<T> similarity_guide(const Tensor<T>&);                                         \
  template struct ClusterParams<T>;                                                              \
  template std::uint64_t guide_param_count(const ClusterParams<T>&);                             \
  template Tensor<T> cluster_logits(const Tensor<T>&, const ClusterParams<T>&);                  \
  template std::vector<std::uint8_t> argmax_labels(const Tensor<T>&);                            \
  template ClusterAssignment<T> cluster_assign(const Tensor<T>&, const ClusterParams<T>&);       \
  template Tensor<T> spec_up(const Tensor<T>&, std::span<const std::uint8_t>,                    \
                             const ClusterParams<T>&);                                           \
  template Tensor<T> spec_up_soft(const Tensor<T>&, const Tensor<T>&, const ClusterParams<T>&);  \
  template GuideImage<T> build_guide(GuideMode, const Tensor<T>&, const ClusterParams<T>*, Routing);

GINET_INSTANTIATE(float)
GINET_INSTANTIATE(double)

}  // namespace ginet::guide
