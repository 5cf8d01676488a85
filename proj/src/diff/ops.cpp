#include "gapfill/diff/ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gapfill::diff {

namespace {

constexpr double kLog2 = 0.69314718055994530941723212145818;

Tensor make_op(std::vector<std::int64_t> shape,
               std::vector<std::shared_ptr<Node>> parents) {
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  bool req = false;
  for (const auto& p : parents) req = req || p->requires_grad;
  n->requires_grad = req;
  n->value.assign(n->numel(), 0.0);
  if (req) n->grad.assign(n->numel(), 0.0);
  n->parents = std::move(parents);
  return Tensor(std::move(n));
}

void require_defined(const Tensor& t, const char* who) {
  if (!t.defined())
    throw std::invalid_argument(std::string(who) + ": undefined tensor");
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* who) {
  require_defined(a, who);
  require_defined(b, who);
  if (a.shape() != b.shape())
    throw std::invalid_argument(std::string(who) + ": shape mismatch");
}

template <typename Fwd, typename Dydx>
Tensor unary_elementwise(const Tensor& a, const char* who, Fwd fwd,
                         Dydx dydx) {
  require_defined(a, who);
  Tensor out = make_op(a.shape(), {a.node()});
  Node* an = a.node().get();
  Node* on = out.node().get();
  const std::size_t n = on->numel();
  for (std::size_t i = 0; i < n; ++i) on->value[i] = fwd(an->value[i]);
  if (on->requires_grad) {
    on->backward_fn = [an, on, n, dydx]() {
      for (std::size_t i = 0; i < n; ++i)
        an->grad[i] += on->grad[i] * dydx(an->value[i], on->value[i]);
    };
  }
  return out;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor out = make_op(a.shape(), {a.node(), b.node()});
  Node* an = a.node().get();
  Node* bn = b.node().get();
  Node* on = out.node().get();
  const std::size_t n = on->numel();
  for (std::size_t i = 0; i < n; ++i)
    on->value[i] = an->value[i] + bn->value[i];
  if (on->requires_grad) {
    on->backward_fn = [an, bn, on, n]() {
      if (an->requires_grad)
        for (std::size_t i = 0; i < n; ++i) an->grad[i] += on->grad[i];
      if (bn->requires_grad)
        for (std::size_t i = 0; i < n; ++i) bn->grad[i] += on->grad[i];
    };
  }
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  Tensor out = make_op(a.shape(), {a.node(), b.node()});
  Node* an = a.node().get();
  Node* bn = b.node().get();
  Node* on = out.node().get();
  const std::size_t n = on->numel();
  for (std::size_t i = 0; i < n; ++i)
    on->value[i] = an->value[i] - bn->value[i];
  if (on->requires_grad) {
    on->backward_fn = [an, bn, on, n]() {
      if (an->requires_grad)
        for (std::size_t i = 0; i < n; ++i) an->grad[i] += on->grad[i];
      if (bn->requires_grad)
        for (std::size_t i = 0; i < n; ++i) bn->grad[i] -= on->grad[i];
    };
  }
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  Tensor out = make_op(a.shape(), {a.node(), b.node()});
  Node* an = a.node().get();
  Node* bn = b.node().get();
  Node* on = out.node().get();
  const std::size_t n = on->numel();
  for (std::size_t i = 0; i < n; ++i)
    on->value[i] = an->value[i] * bn->value[i];
  if (on->requires_grad) {
    on->backward_fn = [an, bn, on, n]() {
      if (an->requires_grad)
        for (std::size_t i = 0; i < n; ++i)
          an->grad[i] += on->grad[i] * bn->value[i];
      if (bn->requires_grad)
        for (std::size_t i = 0; i < n; ++i)
          bn->grad[i] += on->grad[i] * an->value[i];
    };
  }
  return out;
}

Tensor scale(const Tensor& a, double c) {
  return unary_elementwise(
      a, "scale", [c](double x) { return c * x; },
      [c](double, double) { return c; });
}

Tensor abs_of(const Tensor& a) {
  return unary_elementwise(
      a, "abs_of", [](double x) { return std::abs(x); },
      [](double x, double) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Tensor sigmoid(const Tensor& a) {
  return unary_elementwise(
      a, "sigmoid", [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh_of(const Tensor& a) {
  return unary_elementwise(
      a, "tanh_of", [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor leaky_relu(const Tensor& a, double slope) {
  return unary_elementwise(
      a, "leaky_relu", [slope](double x) { return x >= 0.0 ? x : slope * x; },
      [slope](double x, double) { return x >= 0.0 ? 1.0 : slope; });
}

Tensor nonneg_softplus(const Tensor& a) {
  auto softplus = [](double x) {
    return x > 30.0 ? x : std::log1p(std::exp(x));
  };
  return unary_elementwise(
      a, "nonneg_softplus",
      [softplus](double x) { return x <= 0.0 ? 0.0 : softplus(x) - kLog2; },
      [](double x, double) {
        return x <= 0.0 ? 0.0 : 1.0 / (1.0 + std::exp(-x));
      });
}

Tensor sum(const Tensor& a) {
  require_defined(a, "sum");
  Tensor out = make_op({1}, {a.node()});
  Node* an = a.node().get();
  Node* on = out.node().get();
  const std::size_t n = an->numel();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += an->value[i];
  on->value[0] = acc;
  if (on->requires_grad) {
    on->backward_fn = [an, on, n]() {
      const double g = on->grad[0];
      for (std::size_t i = 0; i < n; ++i) an->grad[i] += g;
    };
  }
  return out;
}

Tensor mean(const Tensor& a) {
  require_defined(a, "mean");
  if (a.numel() == 0) throw std::invalid_argument("mean: empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.numel()));
}

Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& b,
              std::int64_t stride, std::int64_t dilation) {
  require_defined(x, "conv1d");
  require_defined(w, "conv1d");
  require_defined(b, "conv1d");
  if (x.shape().size() != 2 || w.shape().size() != 3 || b.shape().size() != 1)
    throw std::invalid_argument("conv1d: want x[C,L], w[Co,Ci,K], b[Co]");
  if (stride < 1 || dilation < 1)
    throw std::invalid_argument("conv1d: stride/dilation must be >= 1");
  const std::int64_t cin = x.shape()[0], len = x.shape()[1];
  const std::int64_t cout = w.shape()[0], k = w.shape()[2];
  if (w.shape()[1] != cin)
    throw std::invalid_argument("conv1d: channel mismatch");
  if (b.shape()[0] != cout)
    throw std::invalid_argument("conv1d: bias size mismatch");
  if (len < 1) throw std::invalid_argument("conv1d: empty input");

  const std::int64_t pad_left = ((k - 1) * dilation) / 2;
  const std::int64_t lout = (len - 1) / stride + 1;

  Tensor out = make_op({cout, lout}, {x.node(), w.node(), b.node()});
  Node* xn = x.node().get();
  Node* wn = w.node().get();
  Node* bn = b.node().get();
  Node* on = out.node().get();

  const double* xv = xn->value.data();
  const double* wv = wn->value.data();
  const double* bv = bn->value.data();
  double* ov = on->value.data();

  for (std::int64_t co = 0; co < cout; ++co) {
    double* orow = ov + co * lout;
    std::fill(orow, orow + lout, bv[co]);
    for (std::int64_t ci = 0; ci < cin; ++ci) {
      const double* xrow = xv + ci * len;
      const double* wrow = wv + (co * cin + ci) * k;
      for (std::int64_t j = 0; j < k; ++j) {
        const double wj = wrow[j];
        const std::int64_t off = j * dilation - pad_left;
        std::int64_t t0 = off < 0 ? (-off + stride - 1) / stride : 0;
        if (off > len - 1) continue;
        std::int64_t t1 = std::min(lout, (len - 1 - off) / stride + 1);
        if (stride == 1) {
          const double* src = xrow + off;
          for (std::int64_t t = t0; t < t1; ++t) orow[t] += wj * src[t];
        } else {
          for (std::int64_t t = t0; t < t1; ++t)
            orow[t] += wj * xrow[t * stride + off];
        }
      }
    }
  }

  if (on->requires_grad) {
    on->backward_fn = [xn, wn, bn, on, cin, len, cout, k, stride, dilation,
                       pad_left, lout]() {
      const double* xv = xn->value.data();
      const double* wv = wn->value.data();
      const double* gv = on->grad.data();
      const bool need_x = xn->requires_grad;
      const bool need_w = wn->requires_grad;
      const bool need_b = bn->requires_grad;
      for (std::int64_t co = 0; co < cout; ++co) {
        const double* grow = gv + co * lout;
        if (need_b) {
          double acc = 0.0;
          for (std::int64_t t = 0; t < lout; ++t) acc += grow[t];
          bn->grad[co] += acc;
        }
        for (std::int64_t ci = 0; ci < cin; ++ci) {
          const double* xrow = xv + ci * len;
          const double* wrow = wv + (co * cin + ci) * k;
          double* gxrow = need_x ? xn->grad.data() + ci * len : nullptr;
          double* gwrow =
              need_w ? wn->grad.data() + (co * cin + ci) * k : nullptr;
          for (std::int64_t j = 0; j < k; ++j) {
            const std::int64_t off = j * dilation - pad_left;
            std::int64_t t0 = off < 0 ? (-off + stride - 1) / stride : 0;
            if (off > len - 1) continue;
            std::int64_t t1 = std::min(lout, (len - 1 - off) / stride + 1);
            if (need_w) {
              double acc = 0.0;
              if (stride == 1) {
                const double* src = xrow + off;
                for (std::int64_t t = t0; t < t1; ++t) acc += grow[t] * src[t];
              } else {
                for (std::int64_t t = t0; t < t1; ++t)
                  acc += grow[t] * xrow[t * stride + off];
              }
              gwrow[j] += acc;
            }
            if (need_x) {
              const double wj = wrow[j];
              if (stride == 1) {
                double* dst = gxrow + off;
                for (std::int64_t t = t0; t < t1; ++t) dst[t] += wj * grow[t];
              } else {
                for (std::int64_t t = t0; t < t1; ++t)
                  gxrow[t * stride + off] += wj * grow[t];
              }
            }
          }
        }
      }
    };
  }
  return out;
}

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b,
              std::array<std::int64_t, 2> stride,
              std::array<std::int64_t, 2> dilation) {
  require_defined(x, "conv2d");
  require_defined(w, "conv2d");
  require_defined(b, "conv2d");
  if (x.shape().size() != 3 || w.shape().size() != 4 || b.shape().size() != 1)
    throw std::invalid_argument(
        "conv2d: want x[C,H,W], w[Co,Ci,KH,KW], b[Co]");
  if (stride[0] < 1 || stride[1] < 1 || dilation[0] < 1 || dilation[1] < 1)
    throw std::invalid_argument("conv2d: stride/dilation must be >= 1");
  const std::int64_t cin = x.shape()[0], h = x.shape()[1], wd = x.shape()[2];
  const std::int64_t cout = w.shape()[0];
  const std::int64_t kh = w.shape()[2], kw = w.shape()[3];
  if (w.shape()[1] != cin)
    throw std::invalid_argument("conv2d: channel mismatch");
  if (b.shape()[0] != cout)
    throw std::invalid_argument("conv2d: bias size mismatch");
  if (h < 1 || wd < 1) throw std::invalid_argument("conv2d: empty input");

  const std::int64_t ph = ((kh - 1) * dilation[0]) / 2;
  const std::int64_t pw = ((kw - 1) * dilation[1]) / 2;
  const std::int64_t hout = (h - 1) / stride[0] + 1;
  const std::int64_t wout = (wd - 1) / stride[1] + 1;

  Tensor out = make_op({cout, hout, wout}, {x.node(), w.node(), b.node()});
  Node* xn = x.node().get();
  Node* wn = w.node().get();
  Node* bn = b.node().get();
  Node* on = out.node().get();

  const double* xv = xn->value.data();
  const double* wv = wn->value.data();
  const double* bv = bn->value.data();
  double* ov = on->value.data();

  const std::int64_t sh = stride[0], sw = stride[1];
  const std::int64_t dh = dilation[0], dw = dilation[1];

  for (std::int64_t co = 0; co < cout; ++co) {
    double* oplane = ov + co * hout * wout;
    std::fill(oplane, oplane + hout * wout, bv[co]);
    for (std::int64_t ci = 0; ci < cin; ++ci) {
      const double* xplane = xv + ci * h * wd;
      const double* wk = wv + (co * cin + ci) * kh * kw;
      for (std::int64_t jh = 0; jh < kh; ++jh) {
        const std::int64_t offh = jh * dh - ph;
        std::int64_t th0 = offh < 0 ? (-offh + sh - 1) / sh : 0;
        if (offh > h - 1) continue;
        std::int64_t th1 = std::min(hout, (h - 1 - offh) / sh + 1);
        for (std::int64_t jw = 0; jw < kw; ++jw) {
          const double wj = wk[jh * kw + jw];
          const std::int64_t offw = jw * dw - pw;
          std::int64_t tw0 = offw < 0 ? (-offw + sw - 1) / sw : 0;
          if (offw > wd - 1) continue;
          std::int64_t tw1 = std::min(wout, (wd - 1 - offw) / sw + 1);
          for (std::int64_t th = th0; th < th1; ++th) {
            const double* xrow = xplane + (th * sh + offh) * wd;
            double* orow = oplane + th * wout;
            if (sw == 1) {
              const double* src = xrow + offw;
              for (std::int64_t tw = tw0; tw < tw1; ++tw)
                orow[tw] += wj * src[tw];
            } else {
              for (std::int64_t tw = tw0; tw < tw1; ++tw)
                orow[tw] += wj * xrow[tw * sw + offw];
            }
          }
        }
      }
    }
  }

  if (on->requires_grad) {
    on->backward_fn = [xn, wn, bn, on, cin, h, wd, cout, kh, kw, sh, sw, dh,
                       dw, ph, pw, hout, wout]() {
      const double* xv = xn->value.data();
      const double* wv = wn->value.data();
      const double* gv = on->grad.data();
      const bool need_x = xn->requires_grad;
      const bool need_w = wn->requires_grad;
      const bool need_b = bn->requires_grad;
      for (std::int64_t co = 0; co < cout; ++co) {
        const double* gplane = gv + co * hout * wout;
        if (need_b) {
          double acc = 0.0;
          for (std::int64_t i = 0; i < hout * wout; ++i) acc += gplane[i];
          bn->grad[co] += acc;
        }
        for (std::int64_t ci = 0; ci < cin; ++ci) {
          const double* xplane = xv + ci * h * wd;
          const double* wk = wv + (co * cin + ci) * kh * kw;
          double* gxplane = need_x ? xn->grad.data() + ci * h * wd : nullptr;
          double* gwk =
              need_w ? wn->grad.data() + (co * cin + ci) * kh * kw : nullptr;
          for (std::int64_t jh = 0; jh < kh; ++jh) {
            const std::int64_t offh = jh * dh - ph;
            std::int64_t th0 = offh < 0 ? (-offh + sh - 1) / sh : 0;
            if (offh > h - 1) continue;
            std::int64_t th1 = std::min(hout, (h - 1 - offh) / sh + 1);
            for (std::int64_t jw = 0; jw < kw; ++jw) {
              const std::int64_t offw = jw * dw - pw;
              std::int64_t tw0 = offw < 0 ? (-offw + sw - 1) / sw : 0;
              if (offw > wd - 1) continue;
              std::int64_t tw1 = std::min(wout, (wd - 1 - offw) / sw + 1);
              double wacc = 0.0;
              const double wj = wk[jh * kw + jw];
              for (std::int64_t th = th0; th < th1; ++th) {
                const double* xrow = xplane + (th * sh + offh) * wd;
                const double* grow = gplane + th * wout;
                double* gxrow =
                    need_x ? gxplane + (th * sh + offh) * wd : nullptr;
                if (need_w) {
                  for (std::int64_t tw = tw0; tw < tw1; ++tw)
                    wacc += grow[tw] * xrow[tw * sw + offw];
                }
                if (need_x) {
                  for (std::int64_t tw = tw0; tw < tw1; ++tw)
                    gxrow[tw * sw + offw] += wj * grow[tw];
                }
              }
              if (need_w) gwk[jh * kw + jw] += wacc;
            }
          }
        }
      }
    };
  }
  return out;
}

Tensor upsample_nearest_1d(const Tensor& x, std::int64_t factor) {
  require_defined(x, "upsample_nearest_1d");
  if (x.shape().size() != 2)
    throw std::invalid_argument("upsample_nearest_1d: want x[C,L]");
  if (factor < 1)
    throw std::invalid_argument("upsample_nearest_1d: factor must be >= 1");
  const std::int64_t c = x.shape()[0], len = x.shape()[1];
  const std::int64_t lout = len * factor;
  Tensor out = make_op({c, lout}, {x.node()});
  Node* xn = x.node().get();
  Node* on = out.node().get();
  for (std::int64_t ci = 0; ci < c; ++ci)
    for (std::int64_t t = 0; t < lout; ++t)
      on->value[ci * lout + t] = xn->value[ci * len + t / factor];
  if (on->requires_grad) {
    on->backward_fn = [xn, on, c, len, lout, factor]() {
      for (std::int64_t ci = 0; ci < c; ++ci)
        for (std::int64_t t = 0; t < lout; ++t)
          xn->grad[ci * len + t / factor] += on->grad[ci * lout + t];
    };
  }
  return out;
}

Tensor upsample_nearest_2d(const Tensor& x,
                           std::array<std::int64_t, 2> factor) {
  require_defined(x, "upsample_nearest_2d");
  if (x.shape().size() != 3)
    throw std::invalid_argument("upsample_nearest_2d: want x[C,H,W]");
  if (factor[0] < 1 || factor[1] < 1)
    throw std::invalid_argument("upsample_nearest_2d: factors must be >= 1");
  const std::int64_t c = x.shape()[0], h = x.shape()[1], wd = x.shape()[2];
  const std::int64_t ho = h * factor[0], wo = wd * factor[1];
  Tensor out = make_op({c, ho, wo}, {x.node()});
  Node* xn = x.node().get();
  Node* on = out.node().get();
  for (std::int64_t ci = 0; ci < c; ++ci)
    for (std::int64_t i = 0; i < ho; ++i)
      for (std::int64_t j = 0; j < wo; ++j)
        on->value[(ci * ho + i) * wo + j] =
            xn->value[(ci * h + i / factor[0]) * wd + j / factor[1]];
  if (on->requires_grad) {
    on->backward_fn = [xn, on, c, h, wd, ho, wo, factor]() {
      for (std::int64_t ci = 0; ci < c; ++ci)
        for (std::int64_t i = 0; i < ho; ++i)
          for (std::int64_t j = 0; j < wo; ++j)
            xn->grad[(ci * h + i / factor[0]) * wd + j / factor[1]] +=
                on->grad[(ci * ho + i) * wo + j];
    };
  }
  return out;
}

Tensor global_avg_pool(const Tensor& x) {
  require_defined(x, "global_avg_pool");
  if (x.shape().size() < 2)
    throw std::invalid_argument("global_avg_pool: want x[C, ...spatial]");
  const std::int64_t c = x.shape()[0];
  const std::size_t spatial = x.numel() / static_cast<std::size_t>(c);
  if (spatial == 0)
    throw std::invalid_argument("global_avg_pool: empty spatial extent");
  Tensor out = make_op({c}, {x.node()});
  Node* xn = x.node().get();
  Node* on = out.node().get();
  for (std::int64_t ci = 0; ci < c; ++ci) {
    double acc = 0.0;
    const double* row = xn->value.data() + ci * spatial;
    for (std::size_t i = 0; i < spatial; ++i) acc += row[i];
    on->value[ci] = acc / static_cast<double>(spatial);
  }
  if (on->requires_grad) {
    on->backward_fn = [xn, on, c, spatial]() {
      for (std::int64_t ci = 0; ci < c; ++ci) {
        const double g = on->grad[ci] / static_cast<double>(spatial);
        double* grow = xn->grad.data() + ci * spatial;
        for (std::size_t i = 0; i < spatial; ++i) grow[i] += g;
      }
    };
  }
  return out;
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
  require_defined(x, "linear");
  require_defined(w, "linear");
  require_defined(b, "linear");
  if (x.shape().size() != 1 || w.shape().size() != 2 || b.shape().size() != 1)
    throw std::invalid_argument("linear: want x[C], w[K,C], b[K]");
  const std::int64_t c = x.shape()[0], k = w.shape()[0];
  if (w.shape()[1] != c || b.shape()[0] != k)
    throw std::invalid_argument("linear: shape mismatch");
  Tensor out = make_op({k}, {x.node(), w.node(), b.node()});
  Node* xn = x.node().get();
  Node* wn = w.node().get();
  Node* bn = b.node().get();
  Node* on = out.node().get();
  for (std::int64_t i = 0; i < k; ++i) {
    double acc = bn->value[i];
    const double* wrow = wn->value.data() + i * c;
    for (std::int64_t j = 0; j < c; ++j) acc += wrow[j] * xn->value[j];
    on->value[i] = acc;
  }
  if (on->requires_grad) {
    on->backward_fn = [xn, wn, bn, on, c, k]() {
      for (std::int64_t i = 0; i < k; ++i) {
        const double g = on->grad[i];
        const double* wrow = wn->value.data() + i * c;
        if (bn->requires_grad) bn->grad[i] += g;
        if (wn->requires_grad) {
          double* gwrow = wn->grad.data() + i * c;
          for (std::int64_t j = 0; j < c; ++j)
            gwrow[j] += g * xn->value[j];
        }
        if (xn->requires_grad) {
          for (std::int64_t j = 0; j < c; ++j)
            xn->grad[j] += g * wrow[j];
        }
      }
    };
  }
  return out;
}

Tensor cross_entropy_logits(const Tensor& logits, std::int64_t target) {
  require_defined(logits, "cross_entropy_logits");
  if (logits.shape().size() != 1)
    throw std::invalid_argument("cross_entropy_logits: want logits[K]");
  const std::int64_t k = logits.shape()[0];
  if (target < 0 || target >= k)
    throw std::invalid_argument("cross_entropy_logits: target out of range");
  Tensor out = make_op({1}, {logits.node()});
  Node* ln = logits.node().get();
  Node* on = out.node().get();

  double hi = ln->value[0];
  for (std::int64_t i = 1; i < k; ++i) hi = std::max(hi, ln->value[i]);
  double z = 0.0;
  std::vector<double> p(static_cast<std::size_t>(k));
  for (std::int64_t i = 0; i < k; ++i) {
    p[i] = std::exp(ln->value[i] - hi);
    z += p[i];
  }
  for (auto& v : p) v /= z;
  on->value[0] = hi + std::log(z) - ln->value[target];

  if (on->requires_grad) {
    on->backward_fn = [ln, on, k, target, p = std::move(p)]() {
      const double g = on->grad[0];
      for (std::int64_t i = 0; i < k; ++i)
        ln->grad[i] += g * (p[i] - (i == target ? 1.0 : 0.0));
    };
  }
  return out;
}

}  // namespace gapfill::diff
