#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "gapfill/diff/adam.hpp"
#include "gapfill/diff/checkpoint.hpp"
#include "gapfill/diff/layer_spec.hpp"
#include "gapfill/diff/ops.hpp"
#include "gapfill/diff/tensor.hpp"
#include "gapfill/util/errors.hpp"
#include "gapfill/util/rng.hpp"
#include "oracles.hpp"

using namespace gapfill;
using namespace gapfill::diff;

namespace {

std::vector<double> random_values(std::size_t n, Rng& rng, double lo = -1.0,
                                  double hi = 1.0) {
  std::vector<double> v(n);
  for (auto& e : v) e = rng.uniform(lo, hi);
  return v;
}

double max_abs_diff(const std::vector<double>& a,
                    const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("conv1d: identity kernel, hand-checked smoothing, dilation taps") {
  // k=1, w=1: output equals input at stride 1
  auto x = Tensor::constant({1, 5}, {1, 2, 3, 4, 5});
  auto w = Tensor::constant({1, 1, 1}, {1.0});
  auto b = Tensor::constant({1}, {0.0});
  auto y = conv1d(x, w, b, 1, 1);
  CHECK(max_abs_diff(y.values(), {1, 2, 3, 4, 5}) == 0.0);

  // centered moving average with zero padding
  auto xs = Tensor::constant({1, 3}, {3, 3, 3});
  auto ws = Tensor::constant({1, 1, 3}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  auto ys = conv1d(xs, ws, b, 1, 1);
  CHECK(max_abs_diff(ys.values(), {2.0, 3.0, 2.0}) < 1e-15);

  // kernel 3, dilation 2 applied to a centered delta: taps at -2, 0, +2
  std::vector<double> delta(9, 0.0);
  delta[4] = 1.0;
  auto xd = Tensor::constant({1, 9}, delta);
  auto wd = Tensor::constant({1, 1, 3}, {10.0, 20.0, 30.0});
  auto yd = conv1d(xd, wd, b, 1, 2);
  std::vector<double> expect(9, 0.0);
  expect[2] = 30.0;  // j=2 tap reaches two positions left
  expect[4] = 20.0;
  expect[6] = 10.0;
  CHECK(max_abs_diff(yd.values(), expect) == 0.0);
}

TEST_CASE("conv1d matches the padded-buffer oracle over random geometry") {
  Rng rng(401);
  for (int inst = 0; inst < 30; ++inst) {
    const std::int64_t cin = 1 + static_cast<std::int64_t>(rng.below(3));
    const std::int64_t cout = 1 + static_cast<std::int64_t>(rng.below(3));
    const std::int64_t k = 1 + 2 * static_cast<std::int64_t>(rng.below(4));
    const std::int64_t dil = 1 + static_cast<std::int64_t>(rng.below(3));
    const std::int64_t stride = 1 + static_cast<std::int64_t>(rng.below(3));
    const std::int64_t len =
        (k - 1) * dil + 1 + static_cast<std::int64_t>(rng.below(30));

    auto xv = random_values(static_cast<std::size_t>(cin * len), rng);
    auto wv = random_values(static_cast<std::size_t>(cout * cin * k), rng);
    auto bv = random_values(static_cast<std::size_t>(cout), rng);

    auto y = conv1d(Tensor::constant({cin, len}, xv),
                    Tensor::constant({cout, cin, k}, wv),
                    Tensor::constant({cout}, bv), stride, dil);
    auto ref = oracles::conv1d(xv, cin, len, wv, cout, k, bv, stride, dil);
    REQUIRE(y.values().size() == ref.size());
    CHECK(max_abs_diff(y.values(), ref) < 1e-12);
  }
}

TEST_CASE("conv2d matches the padded-buffer oracle over random geometry") {
  Rng rng(402);
  for (int inst = 0; inst < 20; ++inst) {
    const std::int64_t cin = 1 + static_cast<std::int64_t>(rng.below(2));
    const std::int64_t cout = 1 + static_cast<std::int64_t>(rng.below(3));
    const std::int64_t kh = 1 + 2 * static_cast<std::int64_t>(rng.below(2));
    const std::int64_t kw = 1 + 2 * static_cast<std::int64_t>(rng.below(2));
    const std::int64_t dh = 1 + static_cast<std::int64_t>(rng.below(2));
    const std::int64_t dw = 1 + static_cast<std::int64_t>(rng.below(3));
    const std::int64_t sh = 1 + static_cast<std::int64_t>(rng.below(2));
    const std::int64_t sw = 1 + static_cast<std::int64_t>(rng.below(2));
    const std::int64_t h =
        (kh - 1) * dh + 1 + static_cast<std::int64_t>(rng.below(10));
    const std::int64_t wd =
        (kw - 1) * dw + 1 + static_cast<std::int64_t>(rng.below(14));

    auto xv = random_values(static_cast<std::size_t>(cin * h * wd), rng);
    auto wv =
        random_values(static_cast<std::size_t>(cout * cin * kh * kw), rng);
    auto bv = random_values(static_cast<std::size_t>(cout), rng);

    auto y = conv2d(Tensor::constant({cin, h, wd}, xv),
                    Tensor::constant({cout, cin, kh, kw}, wv),
                    Tensor::constant({cout}, bv), {sh, sw}, {dh, dw});
    auto ref =
        oracles::conv2d(xv, cin, h, wd, wv, cout, kh, kw, bv, sh, sw, dh, dw);
    REQUIRE(y.values().size() == ref.size());
    CHECK(max_abs_diff(y.values(), ref) < 1e-12);
  }
}

TEST_CASE("gated conv composition matches an elementwise oracle") {
  Rng rng(403);
  const std::int64_t cin = 2, cout = 3, k = 3, len = 17;
  auto xv = random_values(static_cast<std::size_t>(cin * len), rng);
  auto wgv = random_values(static_cast<std::size_t>(cout * cin * k), rng);
  auto bgv = random_values(static_cast<std::size_t>(cout), rng);
  auto wfv = random_values(static_cast<std::size_t>(cout * cin * k), rng);
  auto bfv = random_values(static_cast<std::size_t>(cout), rng);
  const double slope = 0.2;

  auto x = Tensor::constant({cin, len}, xv);
  auto gate = conv1d(x, Tensor::constant({cout, cin, k}, wgv),
                     Tensor::constant({cout}, bgv), 1, 1);
  auto feat = conv1d(x, Tensor::constant({cout, cin, k}, wfv),
                     Tensor::constant({cout}, bfv), 1, 1);
  auto y = mul(sigmoid(gate), leaky_relu(feat, slope));

  auto g_ref = oracles::conv1d(xv, cin, len, wgv, cout, k, bgv, 1, 1);
  auto f_ref = oracles::conv1d(xv, cin, len, wfv, cout, k, bfv, 1, 1);
  for (std::size_t i = 0; i < y.values().size(); ++i) {
    const double s = 1.0 / (1.0 + std::exp(-g_ref[i]));
    const double a = f_ref[i] >= 0.0 ? f_ref[i] : slope * f_ref[i];
    CHECK(std::abs(y.values()[i] - s * a) < 1e-12);
  }
}

TEST_CASE("finite differences validate every differentiable op") {
  Rng rng(404);
  auto run = [&](const char* who,
                 const std::vector<std::vector<std::int64_t>>& shapes,
                 const std::function<Tensor(const std::vector<Tensor>&)>& f,
                 int instances = 4) {
    for (int i = 0; i < instances; ++i) {
      auto report = oracles::fd_check(shapes, f, rng);
      INFO(who << " instance " << i);
      CHECK(report.max_rel_err < 1e-6);
    }
  };

  run("conv1d", {{2, 11}, {2, 2, 3}, {2}}, [](const std::vector<Tensor>& t) {
    return sum(conv1d(t[0], t[1], t[2], 1, 2));
  });
  run("conv1d_strided", {{1, 13}, {2, 1, 3}, {2}},
      [](const std::vector<Tensor>& t) {
        return sum(conv1d(t[0], t[1], t[2], 2, 1));
      });
  run("conv2d", {{1, 5, 7}, {2, 1, 3, 3}, {2}},
      [](const std::vector<Tensor>& t) {
        return sum(conv2d(t[0], t[1], t[2], {1, 1}, {1, 2}));
      });
  run("conv2d_strided", {{2, 6, 6}, {1, 2, 3, 3}, {1}},
      [](const std::vector<Tensor>& t) {
        return sum(conv2d(t[0], t[1], t[2], {2, 2}, {1, 1}));
      });
  run("gated_conv", {{1, 9}, {2, 1, 3}, {2}, {2, 1, 3}, {2}},
      [](const std::vector<Tensor>& t) {
        auto gate = conv1d(t[0], t[1], t[2], 1, 1);
        auto feat = conv1d(t[0], t[3], t[4], 1, 1);
        return sum(mul(sigmoid(gate), leaky_relu(feat, 0.2)));
      });
  run("activations", {{3, 4}}, [](const std::vector<Tensor>& t) {
    auto a = sigmoid(t[0]);
    auto b = tanh_of(t[0]);
    auto c = leaky_relu(t[0], 0.2);
    auto d = nonneg_softplus(t[0]);
    auto e = abs_of(t[0]);
    return sum(add(add(a, b), add(c, add(d, e))));
  });
  run("elementwise", {{2, 5}, {2, 5}}, [](const std::vector<Tensor>& t) {
    return mean(mul(sub(t[0], t[1]), add(t[0], scale(t[1], 0.5))));
  });
  run("upsample+pool+linear", {{2, 6}, {3, 2}, {3}},
      [](const std::vector<Tensor>& t) {
        auto up = upsample_nearest_1d(t[0], 3);
        auto pooled = global_avg_pool(up);
        return sum(linear(pooled, t[1], t[2]));
      });
  run("cross_entropy", {{5}}, [](const std::vector<Tensor>& t) {
    return cross_entropy_logits(t[0], 2);
  });
  run("upsample2d", {{1, 3, 4}}, [](const std::vector<Tensor>& t) {
    return mean(upsample_nearest_2d(t[0], {2, 2}));
  });
}

TEST_CASE("backward accumulation is deterministic bit-for-bit") {
  auto run_once = [](std::uint64_t seed) {
    Rng rng(seed);
    auto x = Tensor::param({2, 33},
                           random_values(66, rng));
    auto w = Tensor::param({3, 2, 5}, random_values(30, rng));
    auto b = Tensor::param({3}, random_values(3, rng));
    auto y = conv1d(x, w, b, 1, 2);
    auto loss = mean(mul(y, tanh_of(y)));
    backward(loss);
    std::vector<double> all;
    for (const auto* t : {&x, &w, &b})
      all.insert(all.end(), t->grad().begin(), t->grad().end());
    return all;
  };
  auto a = run_once(71), bb = run_once(71);
  REQUIRE(a.size() == bb.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == bb[i]);
}

TEST_CASE("adam: no-op on zero grads, closed-form first step, descent") {
  auto w = Tensor::param({2}, {1.0, -3.0});
  Adam opt({w}, 0.1);
  w.zero_grad();
  REQUIRE(opt.step());
  CHECK(w.values()[0] == 1.0);  // zero gradient: m=v=0, update is exactly 0
  CHECK(w.values()[1] == -3.0);

  // First step with gradient g: bias correction cancels and the update is
  // -lr * g / (|g| + eps'), i.e. almost exactly -lr * sign(g).
  auto p = Tensor::param({1}, {1.0});
  Adam opt2({p}, 0.1);
  p.grad()[0] = 2.0;
  REQUIRE(opt2.step());
  const double m = 0.1 * 2.0, v = 0.001 * 4.0;
  const double mhat = m / 0.1, vhat = v / 0.001;
  const double expect = 1.0 - 0.1 * mhat / (std::sqrt(vhat) + 1e-8);
  CHECK(p.values()[0] == doctest::Approx(expect).epsilon(1e-12));

  // Non-finite gradient refuses to step and leaves state untouched.
  p.grad()[0] = std::nan("");
  CHECK_FALSE(opt2.step());
  CHECK(p.values()[0] == doctest::Approx(expect).epsilon(1e-12));

  // Minimize w^2: must reach near zero quickly.
  auto q = Tensor::param({1}, {2.5});
  Adam opt3({q}, 0.05);
  for (int i = 0; i < 400; ++i) {
    q.zero_grad();
    auto loss = mul(q, q);
    auto s = sum(loss);
    backward(s);
    REQUIRE(opt3.step());
  }
  CHECK(std::abs(q.values()[0]) < 1e-2);
}

TEST_CASE("checkpoint round trip is bit-exact; corrupt data is rejected") {
  Rng rng(405);
  std::vector<TensorData> tensors;
  tensors.push_back({{3, 2, 5}, random_values(30, rng, -100.0, 100.0)});
  tensors.push_back({{7}, random_values(7, rng, -1e-30, 1e-30)});
  tensors.push_back({{1, 4}, {0.1, -0.0, 1e300, -1e-300}});

  auto bytes = encode_checkpoint(tensors);
  auto back = decode_checkpoint(bytes.data(), bytes.size());
  REQUIRE(back.size() == tensors.size());
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    CHECK(back[i].shape == tensors[i].shape);
    REQUIRE(back[i].values.size() == tensors[i].values.size());
    for (std::size_t j = 0; j < tensors[i].values.size(); ++j) {
      // bit-for-bit, including signed zero
      CHECK(std::memcmp(&back[i].values[j], &tensors[i].values[j],
                        sizeof(double)) == 0);
    }
  }
  auto bytes2 = encode_checkpoint(back);
  CHECK(bytes == bytes2);

  CHECK_THROWS_AS(decode_checkpoint(bytes.data(), bytes.size() - 3),
                  DataError);
  auto junk = bytes;
  junk[0] = 'X';
  CHECK_THROWS_AS(decode_checkpoint(junk.data(), junk.size()), DataError);
}

// Helpers for empirical receptive-field measurement.
namespace {

// Applies the layer stack with strictly positive weights and zero biases;
// positive weights + monotone activations mean no gradient cancellation,
// so the measured support equals the true dependency span.
Tensor apply_stack_1d(const std::vector<LayerSpec>& layers, const Tensor& x,
                      Rng& rng) {
  Tensor cur = x;
  for (const auto& layer : layers) {
    if (layer.kind == LayerKind::upsample_nearest) {
      cur = upsample_nearest_1d(cur, layer.factor[0]);
      continue;
    }
    auto wv = random_values(
        static_cast<std::size_t>(layer.out_channels * layer.in_channels *
                                 layer.kernel[0]),
        rng, 0.1, 1.0);
    auto bv = std::vector<double>(static_cast<std::size_t>(layer.out_channels),
                                  0.0);
    auto w = Tensor::constant(
        {layer.out_channels, layer.in_channels, layer.kernel[0]}, wv);
    auto b = Tensor::constant({layer.out_channels}, bv);
    if (layer.kind == LayerKind::gated_conv1d) {
      auto wv2 = random_values(wv.size(), rng, 0.1, 1.0);
      auto w2 = Tensor::constant(
          {layer.out_channels, layer.in_channels, layer.kernel[0]}, wv2);
      auto gate = conv1d(cur, w2, b, layer.stride[0], layer.dilation[0]);
      auto feat = conv1d(cur, w, b, layer.stride[0], layer.dilation[0]);
      cur = mul(sigmoid(gate), leaky_relu(feat, 0.2));
    } else {
      cur = conv1d(cur, w, b, layer.stride[0], layer.dilation[0]);
      cur = leaky_relu(cur, 0.2);
    }
  }
  return cur;
}

std::int64_t empirical_rf_1d(const std::vector<LayerSpec>& layers,
                             std::int64_t rf_hint, Rng& rng) {
  const std::int64_t len = 4 * rf_hint + 65;
  auto x = Tensor::param({1, len}, random_values(
                                       static_cast<std::size_t>(len), rng,
                                       0.05, 1.0));
  auto y = apply_stack_1d(layers, x, rng);
  const std::int64_t lout = y.shape()[1];
  // probe the center output position of channel 0
  std::vector<double> pick(y.numel(), 0.0);
  pick[static_cast<std::size_t>(lout / 2)] = 1.0;
  auto loss = sum(mul(y, Tensor::constant(y.shape(), pick)));
  backward(loss);

  std::int64_t first = -1, last = -1;
  for (std::int64_t t = 0; t < len; ++t) {
    if (x.grad()[static_cast<std::size_t>(t)] != 0.0) {
      if (first < 0) first = t;
      last = t;
    }
  }
  REQUIRE(first > 0);          // support must not clip at the edges
  REQUIRE(last < len - 1);
  return last - first + 1;
}

}  // namespace

TEST_CASE("receptive_field: hand-derived cases") {
  auto conv = [](std::int64_t k, std::int64_t s, std::int64_t d) {
    LayerSpec l;
    l.kind = LayerKind::conv1d;
    l.in_channels = 1;
    l.out_channels = 1;
    l.kernel = {k, k};
    l.stride = {s, s};
    l.dilation = {d, d};
    return l;
  };
  auto up = [](std::int64_t f) {
    LayerSpec l;
    l.kind = LayerKind::upsample_nearest;
    l.factor = {f, f};
    return l;
  };

  std::vector<LayerSpec> a{conv(3, 1, 1)};
  CHECK(receptive_field(a) == 3);
  std::vector<LayerSpec> b{conv(3, 1, 2)};
  CHECK(receptive_field(b) == 5);
  std::vector<LayerSpec> c{conv(3, 1, 1), conv(3, 1, 1)};
  CHECK(receptive_field(c) == 5);
  std::vector<LayerSpec> d{conv(3, 2, 1), conv(3, 1, 1)};
  CHECK(receptive_field(d) == 7);
  std::vector<LayerSpec> e{conv(3, 2, 1), up(2), conv(3, 1, 1)};
  CHECK(receptive_field(e) == 5);
  std::vector<LayerSpec> f{conv(9, 1, 1), conv(9, 1, 4), conv(9, 1, 16)};
  CHECK(receptive_field(f) == 1 + 8 + 32 + 128);
}

TEST_CASE("receptive_field matches the gradient-support oracle") {
  Rng rng(406);
  for (int inst = 0; inst < 12; ++inst) {
    std::vector<LayerSpec> layers;
    const int depth = 1 + static_cast<int>(rng.below(4));
    for (int i = 0; i < depth; ++i) {
      LayerSpec l;
      l.kind = rng.below(2) ? LayerKind::gated_conv1d : LayerKind::conv1d;
      l.in_channels = i == 0 ? 1 : 2;
      l.out_channels = i == depth - 1 ? 1 : 2;
      const std::int64_t k = 1 + 2 * static_cast<std::int64_t>(rng.below(4));
      const std::int64_t dil = std::int64_t(1) << rng.below(4);
      l.kernel = {k, k};
      l.dilation = {dil, dil};
      layers.push_back(l);
    }
    const std::int64_t analytic = receptive_field(layers);
    CHECK(analytic == empirical_rf_1d(layers, analytic, rng));
  }

  // strided downsampling chain
  {
    std::vector<LayerSpec> layers;
    LayerSpec l;
    l.kind = LayerKind::conv1d;
    l.in_channels = 1;
    l.out_channels = 2;
    l.kernel = {5, 5};
    l.stride = {2, 2};
    layers.push_back(l);
    l.in_channels = 2;
    l.out_channels = 1;
    l.kernel = {3, 3};
    l.stride = {2, 2};
    layers.push_back(l);
    const std::int64_t analytic = receptive_field(layers);
    CHECK(analytic == 5 + 2 * 2);
    CHECK(analytic == empirical_rf_1d(layers, analytic, rng));
  }

  // mirrored stride-2 encoder / nearest-upsample decoder
  {
    std::vector<LayerSpec> layers;
    LayerSpec enc;
    enc.kind = LayerKind::conv1d;
    enc.in_channels = 1;
    enc.out_channels = 2;
    enc.kernel = {3, 3};
    enc.stride = {2, 2};
    layers.push_back(enc);
    LayerSpec up;
    up.kind = LayerKind::upsample_nearest;
    up.factor = {2, 2};
    layers.push_back(up);
    LayerSpec dec;
    dec.kind = LayerKind::conv1d;
    dec.in_channels = 2;
    dec.out_channels = 1;
    dec.kernel = {3, 3};
    layers.push_back(dec);
    const std::int64_t analytic = receptive_field(layers);
    CHECK(analytic == 5);
    CHECK(analytic == empirical_rf_1d(layers, analytic, rng));
  }
}

TEST_CASE("receptive_field rejects misaligned upsampling") {
  LayerSpec conv;
  conv.kind = LayerKind::conv1d;
  conv.in_channels = 1;
  conv.out_channels = 1;
  conv.kernel = {3, 3};
  LayerSpec up;
  up.kind = LayerKind::upsample_nearest;
  up.factor = {3, 3};
  std::vector<LayerSpec> layers{up, conv};  // (3-1)/3 is not an integer
  CHECK_THROWS_AS(receptive_field(layers), std::invalid_argument);
}

TEST_CASE("op shape validation throws") {
  auto x = Tensor::constant({2, 5}, std::vector<double>(10, 0.0));
  auto y = Tensor::constant({2, 4}, std::vector<double>(8, 0.0));
  CHECK_THROWS_AS(add(x, y), std::invalid_argument);
  CHECK_THROWS_AS(mul(x, y), std::invalid_argument);
  auto w = Tensor::constant({1, 3, 3}, std::vector<double>(9, 0.0));
  auto b = Tensor::constant({1}, {0.0});
  CHECK_THROWS_AS(conv1d(x, w, b, 1, 1), std::invalid_argument);  // cin 2!=3
  CHECK_THROWS_AS(conv1d(x, w, b, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(Tensor::constant({2, 2}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(Tensor().item(), std::invalid_argument);
}
