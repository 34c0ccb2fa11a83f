#include "ginet/network.hpp"

#include <algorithm>

#include "ginet/diff/attention.hpp"
#include "ginet/diff/conv.hpp"
#include "ginet/diff/ops.hpp"
#include "ginet/error.hpp"

namespace ginet::net {

std::string_view to_string(Arch a) {
  switch (a) {
    case Arch::kResNL: return "resnl";
    case Arch::kResNet: return "resnet";
    case Arch::kResNetSR: return "resnetsr";
  }
  return "?";
}

std::optional<Arch> parse_arch(std::string_view s) {
  if (s == "resnl") return Arch::kResNL;
  if (s == "resnet") return Arch::kResNet;
  if (s == "resnetsr") return Arch::kResNetSR;
  return std::nullopt;
}

void ModelConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kInvalidArgument, msg); };
  if (width == 0) fail("width must be positive");
  const auto& a = attention;
  if (a.window == 0) fail("window must be positive");
  for (std::size_t p : {a.patch_error, a.patch_guide, a.patch_concat}) {
    if (p % 2 == 0) fail("patch sizes must be odd, got " + std::to_string(p));
  }
  if (a.feat_dim == 0 || a.fused == 0) fail("attention widths must be positive");
  if (cluster.clusters == 0 || cluster.clusters > 255) fail("clusters must be in [1, 255]");
  if (cluster.conv_layers == 0 || cluster.conv_width == 0 || cluster.mlp_hidden == 0) {
    fail("cluster block sizes must be positive");
  }
}

nlohmann::json to_json(const ModelConfig& c) {
  nlohmann::ordered_json j;
  j["mode"] = std::string(guide::to_string(c.mode));
  j["arch"] = std::string(to_string(c.arch));
  j["stages"] = c.stages;
  j["width"] = c.width;
  j["resblocks"] = c.resblocks;
  j["window"] = c.attention.window;
  j["patch_error"] = c.attention.patch_error;
  j["patch_guide"] = c.attention.patch_guide;
  j["patch_concat"] = c.attention.patch_concat;
  j["feat_dim"] = c.attention.feat_dim;
  j["fused"] = c.attention.fused;
  j["clusters"] = c.cluster.clusters;
  j["cluster_width"] = c.cluster.conv_width;
  j["cluster_layers"] = c.cluster.conv_layers;
  j["mlp_hidden"] = c.cluster.mlp_hidden;
  return j;
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  try {
    if (j.contains("mode")) {
      const auto m = guide::parse_guide_mode(j.at("mode").get<std::string>());
      if (!m) throw Error(ErrorCode::kInvalidArgument, "unknown guide mode");
      c.mode = *m;
    }
    if (j.contains("arch")) {
      const auto a = parse_arch(j.at("arch").get<std::string>());
      if (!a) throw Error(ErrorCode::kInvalidArgument, "unknown arch");
      c.arch = *a;
    }
    auto read = [&](const char* key, std::size_t& dst) {
      if (j.contains(key)) dst = j.at(key).get<std::size_t>();
    };
    read("stages", c.stages);
    read("width", c.width);
    read("resblocks", c.resblocks);
    read("window", c.attention.window);
    read("patch_error", c.attention.patch_error);
    read("patch_guide", c.attention.patch_guide);
    read("patch_concat", c.attention.patch_concat);
    read("feat_dim", c.attention.feat_dim);
    read("fused", c.attention.fused);
    read("clusters", c.cluster.clusters);
    read("cluster_width", c.cluster.conv_width);
    read("cluster_layers", c.cluster.conv_layers);
    read("mlp_hidden", c.cluster.mlp_hidden);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("model config: ") + e.what());
  }
  c.validate();
  return c;
}

namespace {

template <typename T>
HeadParams<T> init_head(std::size_t ref_channels, std::size_t d, Rng& rng) {
  return {ConvLayer<T>::init(ref_channels, d, 1, rng), ConvLayer<T>::init(ref_channels, d, 1, rng),
          ConvLayer<T>::init(kChannels, d, 1, rng), ConvLayer<T>::init(d, d, 1, rng)};
}

template <typename T>
void fill_zero(Tensor<T>& t) {
  std::fill(t.mutable_values().begin(), t.mutable_values().end(), T(0));
}

template <typename T>
StageParams<T> init_stage(const ModelConfig& cfg, Rng& rng) {
  StageParams<T> s;
  s.db = Tensor<T>({kChannels, 3, 3}, true);
  s.up = Tensor<T>({kChannels, 3, 3}, true);
  const T tent[3] = {T(0.5), T(1), T(0.5)};
  for (std::size_t c = 0; c < kChannels; ++c) {
    s.db.mutable_values()[c * 9 + 4] = T(1);
    for (std::size_t y = 0; y < 3; ++y) {
      for (std::size_t x = 0; x < 3; ++x) s.up.mutable_values()[c * 9 + y * 3 + x] = tent[y] * tent[x];
    }
  }
  std::size_t in_channels = kChannels;
  if (cfg.arch == Arch::kResNL) {
    const auto& a = cfg.attention;
    s.heads.push_back(init_head<T>(kChannels, a.feat_dim, rng));
    s.heads.push_back(init_head<T>(kChannels, a.feat_dim, rng));
    s.heads.push_back(init_head<T>(2 * kChannels, a.feat_dim, rng));
    s.fusion = ConvLayer<T>::init(kHeads * a.feat_dim, a.fused, 1, rng);
    in_channels += a.fused;
  } else if (cfg.arch == Arch::kResNet) {
    in_channels += kChannels;
  }
  s.head_in = ConvLayer<T>::init(in_channels, cfg.width, 3, rng);
  for (std::size_t b = 0; b < cfg.resblocks; ++b) {
    s.blocks.push_back({ConvLayer<T>::init(cfg.width, cfg.width, 3, rng),
                        ConvLayer<T>::init(cfg.width, cfg.width, 3, rng)});
  }
  s.tail = ConvLayer<T>::init(cfg.width, kChannels, 3, rng);
  fill_zero(s.tail.weight);
  fill_zero(s.tail.bias);
  return s;
}

template <typename T>
void collect_stage(const StageParams<T>& s, const std::string& p, NamedTensors<T>& out) {
  out.emplace_back(p + ".db", s.db);
  out.emplace_back(p + ".up", s.up);
  for (std::size_t h = 0; h < s.heads.size(); ++h) {
    const std::string hp = p + ".head" + std::to_string(h);
    s.heads[h].theta.collect(hp + ".theta", out);
    s.heads[h].phi.collect(hp + ".phi", out);
    s.heads[h].value.collect(hp + ".value", out);
    s.heads[h].out.collect(hp + ".out", out);
  }
  if (s.fusion) s.fusion->collect(p + ".fusion", out);
  s.head_in.collect(p + ".head_in", out);
  for (std::size_t b = 0; b < s.blocks.size(); ++b) {
    const std::string bp = p + ".block" + std::to_string(b);
    s.blocks[b].first.collect(bp + ".conv0", out);
    s.blocks[b].second.collect(bp + ".conv1", out);
  }
  s.tail.collect(p + ".tail", out);
}

template <typename T>
std::uint64_t total_numel(const NamedTensors<T>& named) {
  std::uint64_t n = 0;
  for (const auto& [name, t] : named) n += t.numel();
  return n;
}

}  // namespace

template <typename T>
UnfoldedModel<T> UnfoldedModel<T>::init(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  UnfoldedModel m;
  m.cfg = cfg;
  if (cfg.uses_cluster_params()) m.guide = guide::ClusterParams<T>::init(cfg.cluster, rng);
  for (std::size_t k = 0; k < cfg.stages; ++k) m.stages.push_back(init_stage<T>(cfg, rng));
  return m;
}

template <typename T>
NamedTensors<T> named_parameters(const UnfoldedModel<T>& m) {
  NamedTensors<T> out;
  if (m.guide) m.guide->collect(out);
  for (std::size_t k = 0; k < m.stages.size(); ++k) {
    collect_stage(m.stages[k], "stage" + std::to_string(k), out);
  }
  return out;
}

template <typename T, typename U>
void assign_parameters(UnfoldedModel<T>& m, const NamedTensors<U>& values) {
  std::map<std::string, const Tensor<U>*> by_name;
  for (const auto& [name, t] : values) by_name[name] = &t;
  auto params = named_parameters(m);
  for (auto& [name, t] : params) {
    const auto it = by_name.find(name);
    if (it == by_name.end()) {
      throw Error(ErrorCode::kBadCheckpoint, "missing parameter " + name);
    }
    if (it->second->shape() != t.shape()) {
      throw Error(ErrorCode::kBadCheckpoint, "parameter " + name + " has shape " +
                                                 diff::to_string(it->second->shape()) +
                                                 ", expected " + diff::to_string(t.shape()));
    }
    const auto src = it->second->values();
    auto dst = t.mutable_values();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<T>(src[i]);
  }
  if (by_name.size() != params.size()) {
    throw Error(ErrorCode::kBadCheckpoint, "checkpoint has " + std::to_string(by_name.size()) +
                                               " tensors, model expects " +
                                               std::to_string(params.size()));
  }
}

template <typename To, typename From>
UnfoldedModel<To> cast_model(const UnfoldedModel<From>& m) {
  auto out = UnfoldedModel<To>::init(m.cfg, 0);
  assign_parameters(out, named_parameters(m));
  return out;
}

template <typename T>
void zero_corrections(UnfoldedModel<T>& m) {
  for (auto& s : m.stages) {
    fill_zero(s.tail.weight);
    fill_zero(s.tail.bias);
  }
}

template <typename T>
Tensor<T> db_operator(const Tensor<T>& u, const StageParams<T>& s) {
  if (u.rank() != 3 || u.dim(1) % 2 || u.dim(2) % 2) {
    throw Error(ErrorCode::kOddDimensions, "db_operator needs an even grid, got " +
                                               diff::to_string(u.shape()));
  }
  return diff::avg_pool2(diff::depthwise_conv2d(u, s.db, 1));
}

template <typename T>
Tensor<T> upsample_error(const Tensor<T>& e_lr, const StageParams<T>& s) {
  return diff::transposed_conv2d_s2(e_lr, s.up);
}

template <typename T>
std::pair<Tensor<T>, Tensor<T>> head_descriptors(const Tensor<T>& ref, const HeadParams<T>& h,
                                                 std::size_t patch) {
  return {diff::unfold_patches(h.theta(ref), patch), diff::unfold_patches(h.phi(ref), patch)};
}

template <typename T>
Tensor<T> attention_head(const Tensor<T>& e, const Tensor<T>& ref, const HeadParams<T>& h,
                         std::size_t window, std::size_t patch, bool project) {
  if (ref.rank() != 3 || e.rank() != 3 || ref.dim(1) != e.dim(1) || ref.dim(2) != e.dim(2)) {
    throw Error(ErrorCode::kShapeMismatch, "attention reference " + diff::to_string(ref.shape()) +
                                               " is not on the error grid " +
                                               diff::to_string(e.shape()));
  }
  const auto [q, k] = head_descriptors(ref, h, patch);
  const auto o = diff::window_attention(q, k, h.value(e), window);
  return project ? h.out(o) : o;
}

template <typename T>
Tensor<T> mha(const Tensor<T>& e, const Tensor<T>& g, const StageParams<T>& s,
              const AttentionConfig& cfg) {
  if (s.heads.size() != kHeads || !s.fusion) {
    throw Error(ErrorCode::kInvalidArgument, "stage has no attention parameters");
  }
  const Tensor<T> outs[] = {
      attention_head(e, e, s.heads[0], cfg.window, cfg.patch_error),
      attention_head(e, g, s.heads[1], cfg.window, cfg.patch_guide),
      attention_head(e, diff::concat_channels(e, g), s.heads[2], cfg.window, cfg.patch_concat),
  };
  return (*s.fusion)(diff::concat_channels<T>(std::span<const Tensor<T>>(outs)));
}

template <typename T>
Tensor<T> res_nl(const Tensor<T>& e, const Tensor<T>& g, const StageParams<T>& s,
                 const ModelConfig& cfg) {
  Tensor<T> in;
  switch (cfg.arch) {
    case Arch::kResNL: in = diff::concat_channels(e, mha(e, g, s, cfg.attention)); break;
    case Arch::kResNet: in = diff::concat_channels(e, g); break;
    case Arch::kResNetSR: in = e; break;
  }
  Tensor<T> x = diff::relu(s.head_in(in));
  for (const auto& b : s.blocks) x = diff::add(x, b.second(diff::relu(b.first(x))));
  return s.tail(x);
}

template <typename T>
ForwardResult<T> forward(const UnfoldedModel<T>& m, const Tensor<T>& f, const Tensor<T>& hr4,
                         bool keep_intermediates, guide::Routing routing) {
  if (f.rank() != 3 || f.dim(0) != kChannels) {
    throw Error(ErrorCode::kShapeMismatch, "input must be [6,h,w], got " + diff::to_string(f.shape()));
  }
  if (hr4.rank() != 3 || hr4.dim(0) != 4 || hr4.dim(1) != 2 * f.dim(1) ||
      hr4.dim(2) != 2 * f.dim(2)) {
    throw Error(ErrorCode::kShapeMismatch, "guide source " + diff::to_string(hr4.shape()) +
                                               " is not on the 2x grid of " +
                                               diff::to_string(f.shape()));
  }
  ForwardResult<T> r;
  if (m.cfg.uses_guide()) {
    r.guide = guide::build_guide(m.cfg.mode, hr4, m.guide ? &*m.guide : nullptr, routing).pixels;
  }
  Tensor<T> u = diff::bicubic_up2(f);
  for (std::size_t k = 0; k < m.stages.size(); ++k) {
    const auto& s = m.stages[k];
    const auto e = upsample_error(diff::sub(db_operator(u, s), f), s);
    u = diff::add(u, res_nl(e, r.guide, s, m.cfg));
    if (keep_intermediates && k + 1 < m.stages.size()) r.intermediates.push_back(u);
  }
  r.u = u;
  return r;
}

template <typename T>
ParamCount count_params(const UnfoldedModel<T>& m) {
  ParamCount c;
  if (m.guide) c.guide = guide::guide_param_count(*m.guide);
  c.total = c.guide;
  for (const auto& s : m.stages) {
    NamedTensors<T> named;
    collect_stage(s, "s", named);
    StageCount sc;
    sc.db = s.db.numel();
    sc.up = s.up.numel();
    sc.resnl = total_numel(named) - sc.db - sc.up;
    c.total += total_numel(named);
    c.stages.push_back(sc);
  }
  return c;
}

#define GINET_INSTANTIATE(T)                                                                    \
  template struct UnfoldedModel<T>;                                                             \
  template NamedTensors<T> named_parameters(const UnfoldedModel<T>&);                           \
  template void zero_corrections(UnfoldedModel<T>&);                                            \
  template Tensor<T> db_operator(const Tensor<T>&, const StageParams<T>&);                      \
  template Tensor<T> upsample_error(const Tensor<T>&, const StageParams<T>&);                   \
  template std::pair<Tensor<T>, Tensor<T>> head_descriptors(const Tensor<T>&,                   \
                                                            const HeadParams<T>&, std::size_t); \
  template Tensor<T> attention_head(const Tensor<T>&, const Tensor<T>&, const HeadParams<T>&,   \
                                    std::size_t, std::size_t, bool);                            \
  template Tensor<T> mha(const Tensor<T>&, const Tensor<T>&, const StageParams<T>&,             \
                         const AttentionConfig&);                                               \
  template Tensor<T> res_nl(const Tensor<T>&, const Tensor<T>&, const StageParams<T>&,          \
                            const ModelConfig&);                                                \
  template ForwardResult<T> forward(const UnfoldedModel<T>&, const Tensor<T>&,                  \
                                    const Tensor<T>&, bool, guide::Routing);                    \
  template ParamCount count_params(const UnfoldedModel<T>&);

GINET_INSTANTIATE(float)
GINET_INSTANTIATE(double)

template void assign_parameters(UnfoldedModel<float>&, const NamedTensors<float>&);
template void assign_parameters(UnfoldedModel<float>&, const NamedTensors<double>&);
template void assign_parameters(UnfoldedModel<double>&, const NamedTensors<float>&);
template void assign_parameters(UnfoldedModel<double>&, const NamedTensors<double>&);
template UnfoldedModel<float> cast_model(const UnfoldedModel<double>&);
template UnfoldedModel<double> cast_model(const UnfoldedModel<float>&);
template UnfoldedModel<float> cast_model(const UnfoldedModel<float>&);
template UnfoldedModel<double> cast_model(const UnfoldedModel<double>&);

}  // namespace ginet::net

namespace ginet::net {

template <typename T>
Tensor<T> stack_to_tensor(const raster::BandStack& stack, std::span<const raster::BandId> bands) {
  const std::size_t plane = stack.plane_size();
  std::vector<T> values(bands.size() * plane);
  for (std::size_t c = 0; c < bands.size(); ++c) {
    const auto src = stack.band(bands[c]);
    std::copy(src.begin(), src.end(), values.begin() + c * plane);
  }
  return Tensor<T>({bands.size(), stack.height(), stack.width()}, std::move(values));
}

template <typename T>
SampleTensors<T> to_tensors(const dataset::SampleTriple& s) {
  SampleTensors<T> out;
  out.f = stack_to_tensor<T>(s.input_f, raster::kBands20m);
  out.hr4 = stack_to_tensor<T>(s.guide_src, raster::kBands10m);
  out.ref = stack_to_tensor<T>(s.ref, raster::kBands20m);
  return out;
}

raster::BandStack tensor_to_stack(const Tensor<float>& t, std::uint32_t gsd_dm) {
  if (t.rank() != 3 || t.dim(0) != raster::kBands20m.size()) {
    throw Error(ErrorCode::kShapeMismatch, "expected [6,H,W], got " + diff::to_string(t.shape()));
  }
  return raster::BandStack(std::vector<raster::BandId>(raster::kBands20m.begin(), raster::kBands20m.end()),
                           std::uint32_t(t.dim(1)), std::uint32_t(t.dim(2)), gsd_dm,
                           std::vector<float>(t.values().begin(), t.values().end()));
}

template Tensor<float> stack_to_tensor(const raster::BandStack&, std::span<const raster::BandId>);
template Tensor<double> stack_to_tensor(const raster::BandStack&, std::span<const raster::BandId>);
template SampleTensors<float> to_tensors(const dataset::SampleTriple&);
template SampleTensors<double> to_tensors(const dataset::SampleTriple&);

}  // namespace ginet::net
