#include "ginet/selftest.hpp"

#include <cmath>
#include <cstdio>
#include <functional>

#include "ginet/diff/attention.hpp"
#include "ginet/diff/conv.hpp"
#include "ginet/diff/gradcheck.hpp"
#include "ginet/diff/ops.hpp"
#include "ginet/metrics.hpp"
#include "ginet/network.hpp"

namespace ginet::selftest {

namespace {

using diff::GradCheckOptions;
using diff::random_projection;
using diff::random_tensor;
using diff::Tensor;

struct Entry {
  std::string name;
  std::function<Check(double corrupt, std::uint64_t seed)> run;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Check grad_entry(const std::string& name, double corrupt, std::uint64_t seed,
                 const std::function<Tensor<double>()>& loss, std::vector<Tensor<double>> inputs,
                 std::size_t coords = 64) {
  GradCheckOptions o;
  o.corrupt = corrupt;
  o.seed = seed;
  o.max_coords = coords;
  const auto r = diff::grad_check(loss, std::move(inputs), o);
  return {name, r.ok, fmt("rel_error=%.3e", r.rel_error)};
}

Check close_entry(const std::string& name, double got, double want, double tol) {
  return {name, std::abs(got - want) <= tol, fmt("got=%.9g", got) + fmt(" want=%.9g", want)};
}

std::vector<Entry> entries() {
  std::vector<Entry> e;
  e.push_back({"grad.conv2d", [](double c, std::uint64_t s) {
                 auto x = random_tensor({3, 6, 7}, s);
                 auto w = random_tensor({4, 3, 3, 3}, s + 1);
                 auto b = random_tensor({4}, s + 2);
                 return grad_entry("grad.conv2d", c, s, [=] {
                   return random_projection(diff::conv2d(x, w, b, 1), s + 3);
                 }, {x, w, b});
               }});
  e.push_back({"grad.depthwise_conv2d", [](double c, std::uint64_t s) {
                 auto x = random_tensor({3, 6, 6}, s);
                 auto w = random_tensor({3, 3, 3}, s + 1);
                 return grad_entry("grad.depthwise_conv2d", c, s, [=] {
                   return random_projection(diff::depthwise_conv2d(x, w, 1), s + 3);
                 }, {x, w});
               }});
  e.push_back({"grad.transposed_conv2d_s2", [](double c, std::uint64_t s) {
                 auto x = random_tensor({2, 4, 5}, s);
                 auto w = random_tensor({2, 3, 3}, s + 1);
                 return grad_entry("grad.transposed_conv2d_s2", c, s, [=] {
                   return random_projection(diff::transposed_conv2d_s2(x, w), s + 3);
                 }, {x, w});
               }});
  e.push_back({"grad.avg_pool2", [](double c, std::uint64_t s) {
                 auto x = random_tensor({2, 6, 4}, s);
                 return grad_entry("grad.avg_pool2", c, s, [=] {
                   return random_projection(diff::avg_pool2(x), s + 3);
                 }, {x});
               }});
  e.push_back({"grad.softmax_channels", [](double c, std::uint64_t s) {
                 auto x = random_tensor({4, 3, 3}, s, 2.0);
                 return grad_entry("grad.softmax_channels", c, s, [=] {
                   return random_projection(diff::softmax_channels(x), s + 3);
                 }, {x});
               }});
  e.push_back({"grad.unfold_patches", [](double c, std::uint64_t s) {
                 auto x = random_tensor({2, 5, 4}, s);
                 return grad_entry("grad.unfold_patches", c, s, [=] {
                   return random_projection(diff::unfold_patches(x, 3), s + 3);
                 }, {x});
               }});
  e.push_back({"grad.window_attention", [](double c, std::uint64_t s) {
                 auto q = random_tensor({3, 7, 6}, s);
                 auto k = random_tensor({3, 7, 6}, s + 1);
                 auto v = random_tensor({2, 7, 6}, s + 2);
                 return grad_entry("grad.window_attention", c, s, [=] {
                   return random_projection(diff::window_attention(q, k, v, 5), s + 3);
                 }, {q, k, v});
               }});
  e.push_back({"grad.model", [](double c, std::uint64_t s) {
                 net::ModelConfig cfg;
                 cfg.stages = 1;
                 cfg.width = 8;
                 cfg.resblocks = 1;
                 cfg.attention.feat_dim = 4;
                 cfg.attention.fused = 6;
                 cfg.cluster = {3, 6, 3, 6};
                 auto m = net::UnfoldedModel<double>::init(cfg, s);
                 Rng rng(s + 9);
                 for (auto& v : m.stages[0].tail.weight.mutable_values()) v = uniform(rng, -0.2, 0.2);
                 auto f = random_tensor({6, 6, 6}, s + 1, 1.0, false);
                 auto hr4 = random_tensor({4, 12, 12}, s + 2, 1.0, false);
                 std::vector<Tensor<double>> params;
                 for (const auto& [name, t] : net::named_parameters(m)) params.push_back(t);
                 return grad_entry("grad.model", c, s, [=] {
                   return random_projection(
                       net::forward(m, f, hr4, false, guide::Routing::kSoft).u, s + 3);
                 }, params, 6);
               }});
  e.push_back({"adjoint.transposed_conv2d_s2", [](double c, std::uint64_t s) {
                 auto x = random_tensor({3, 5, 4}, s, 1.0, false);
                 auto y = random_tensor({3, 10, 8}, s + 1, 1.0, false);
                 auto w = random_tensor({3, 3, 3}, s + 2, 1.0, false);
                 const auto tx = diff::transposed_conv2d_s2(x, w);
                 const auto ty = diff::strided_conv2d_s2(y, w);
                 double lhs = 0, rhs = 0;
                 for (std::size_t i = 0; i < tx.numel(); ++i) lhs += tx.values()[i] * y.values()[i];
                 for (std::size_t i = 0; i < x.numel(); ++i) rhs += x.values()[i] * ty.values()[i];
                 return close_entry("adjoint.transposed_conv2d_s2", lhs * c, rhs, 1e-9);
               }});
  e.push_back({"bicubic.constant", [](double c, std::uint64_t) {
                 Tensor<double> x({2, 4, 5}, std::vector<double>(40, 0.37));
                 const auto up = diff::bicubic_up2(x);
                 double worst = 0;
                 for (double v : up.values()) worst = std::max(worst, std::abs(v * c - 0.37));
                 return close_entry("bicubic.constant", worst, 0.0, 1e-12);
               }});
  e.push_back({"metrics.identity", [](double c, std::uint64_t s) {
                 const auto t = random_tensor({6, 16, 16}, s, 0.5, false);
                 std::vector<float> vals(t.values().begin(), t.values().end());
                 for (auto& v : vals) v += 0.5f;
                 const metrics::Image img{vals, 6, 16, 16};
                 const auto m = metrics::compute_all(img, img);
                 const double worst = std::max({std::abs(m.ergas), std::abs(m.psnr - metrics::kPsnrCap),
                                                std::abs(m.ssim - 1.0), std::abs(m.sam)});
                 return close_entry("metrics.identity", worst * c + (c - 1), 0.0, 1e-6);
               }});
  e.push_back({"metrics.ergas_closed_form", [](double c, std::uint64_t) {
                 const std::vector<double> ref(16, 0.2);
                 std::vector<double> pred(16);
                 for (std::size_t i = 0; i < 16; ++i) pred[i] = 0.2 + (i % 2 ? 0.01 : -0.01);
                 std::vector<float> rf(ref.begin(), ref.end()), pf(pred.begin(), pred.end());
                 const double v = metrics::ergas({pf, 1, 4, 4}, {rf, 1, 4, 4});
                 return close_entry("metrics.ergas_closed_form", v * c, 2.5, 1e-4);
               }});
  return e;
}

}  // namespace

std::vector<std::string> check_names() {
  std::vector<std::string> names;
  for (const auto& e : entries()) names.push_back(e.name);
  return names;
}

std::vector<Check> run(const Options& opts, std::ostream* out) {
  std::vector<Check> checks;
  for (const auto& e : entries()) {
    const double corrupt = e.name == opts.broken ? 1.5 : 1.0;
    Check c;
    try {
      c = e.run(corrupt, opts.seed);
    } catch (const std::exception& ex) {
      c = {e.name, false, std::string("threw: ") + ex.what()};
    }
    if (out) *out << (c.ok ? "PASS " : "FAIL ") << c.name << ' ' << c.detail << '\n';
    checks.push_back(std::move(c));
  }
  return checks;
}

}  // namespace ginet::selftest
