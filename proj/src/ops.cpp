#include "tokengan/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "kernels.hpp"
#include "tokengan/errors.hpp"

namespace tokengan {

using detail::accumulate;
using detail::make_result;
using detail::Node;

namespace {

using Indices = std::shared_ptr<const std::vector<std::size_t>>;

std::span<const double> values(const Node& n) { return *n.data; }

bool wants_grad(const Node& n) { return n.requires_grad; }

void require(bool ok, const std::string& what) {
  if (!ok) throw DimensionError(what);
}

// Number of trailing elements b repeats over when broadcast against a.
std::size_t broadcast_period(const Tensor& a, const Tensor& b,
                             const char* op) {
  const auto& sa = a.shape();
  const auto& sb = b.shape();
  const bool ok =
      sb.size() <= sa.size() &&
      std::equal(sb.begin(), sb.end(), sa.end() - static_cast<long>(sb.size()));
  require(ok, std::string(op) + ": cannot broadcast " + shape_str(sb) +
                  " against " + shape_str(sa));
  return b.numel();
}

// Calls f(i, j) for every flat index i of a tensor of n elements with
// j = i mod nb, in ascending i.
template <class F>
inline void for_broadcast(std::size_t n, std::size_t nb, F f) {
  if (nb == n) {
    for (std::size_t i = 0; i < n; ++i) f(i, i);
    return;
  }
  for (std::size_t base = 0; base < n; base += nb) {
    for (std::size_t j = 0; j < nb; ++j) f(base + j, j);
  }
}

// Sums g (length a.numel()) into the b-sized gradient with period nb.
void reduce_broadcast(std::span<const double> g, std::span<double> out) {
  for_broadcast(g.size(), out.size(),
                [&](std::size_t i, std::size_t j) { out[j] += g[i]; });
}

template <class F, class DF>
Tensor unary(const Tensor& x, F f, DF df) {
  const auto in = x.data();
  std::vector<double> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = f(in[i]);
  return make_result(x.shape(), std::move(out), {x}, [df](Node& self) {
    Node& xn = *self.inputs[0];
    const auto xv = values(xn);
    const auto yv = values(self);
    auto gx = xn.grad_buffer();
    for (std::size_t i = 0; i < gx.size(); ++i) {
      gx[i] += self.grad[i] * df(xv[i], yv[i]);
    }
  });
}

// Output element i copies input element src[i]; pure rearrangement.
Tensor gather(const Tensor& x, Shape shape, Indices src) {
  const auto in = x.data();
  std::vector<double> out(src->size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = in[(*src)[i]];
  return make_result(std::move(shape), std::move(out), {x},
                     [src](Node& self) {
                       auto gx = self.inputs[0]->grad_buffer();
                       for (std::size_t i = 0; i < src->size(); ++i) {
                         gx[(*src)[i]] += self.grad[i];
                       }
                     });
}

struct AxisSplit {
  std::size_t outer = 1, len = 1, inner = 1;
};

AxisSplit split_at(const Shape& shape, std::size_t axis) {
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.len = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

std::size_t last_dim(const Tensor& x, const char* op) {
  require(x.rank() >= 1 && x.shape().back() >= 1,
          std::string(op) + ": needs a non-empty last axis, got " +
              shape_str(x.shape()));
  return x.shape().back();
}

// Standardizes groups of `len` elements spaced `inner` apart. Layer norm is
// (rows, d, 1); instance norm over tokens is (batch, m, d).
Tensor standardize(const Tensor& x, AxisSplit s, double eps) {
  const auto in = x.data();
  std::vector<double> out(in.size());
  auto inv_std =
      std::make_shared<std::vector<double>>(s.outer * s.inner, 0.0);
  const double n = static_cast<double>(s.len);
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t c = 0; c < s.inner; ++c) {
      const std::size_t base = o * s.len * s.inner + c;
      double mu = 0.0;
      for (std::size_t i = 0; i < s.len; ++i) mu += in[base + i * s.inner];
      mu /= n;
      double var = 0.0;
      for (std::size_t i = 0; i < s.len; ++i) {
        const double dlt = in[base + i * s.inner] - mu;
        var += dlt * dlt;
      }
      var /= n;
      const double r = 1.0 / std::sqrt(var + eps);
      (*inv_std)[o * s.inner + c] = r;
      for (std::size_t i = 0; i < s.len; ++i) {
        out[base + i * s.inner] = (in[base + i * s.inner] - mu) * r;
      }
    }
  }
  return make_result(x.shape(), std::move(out), {x}, [s, inv_std](Node& self) {
    auto gx = self.inputs[0]->grad_buffer();
    const auto y = values(self);
    const auto& g = self.grad;
    const double n = static_cast<double>(s.len);
    for (std::size_t o = 0; o < s.outer; ++o) {
      for (std::size_t c = 0; c < s.inner; ++c) {
        const std::size_t base = o * s.len * s.inner + c;
        double mg = 0.0, mgy = 0.0;
        for (std::size_t i = 0; i < s.len; ++i) {
          const std::size_t k = base + i * s.inner;
          mg += g[k];
          mgy += g[k] * y[k];
        }
        mg /= n;
        mgy /= n;
        const double r = (*inv_std)[o * s.inner + c];
        for (std::size_t i = 0; i < s.len; ++i) {
          const std::size_t k = base + i * s.inner;
          gx[k] += r * (g[k] - mg - y[k] * mgy);
        }
      }
    }
  });
}

// Source taps for one axis of a 2x resampling.
struct Taps {
  std::vector<std::size_t> lo, hi;
  std::vector<double> w;  // weight of `hi`
};

Taps make_taps(std::size_t in, Resample mode) {
  Taps t;
  const std::size_t out = 2 * in;
  t.lo.resize(out);
  t.hi.resize(out);
  t.w.assign(out, 0.0);
  for (std::size_t o = 0; o < out; ++o) {
    if (mode == Resample::kNearest) {
      t.lo[o] = t.hi[o] = o / 2;
      continue;
    }
    const double src = (static_cast<double>(o) + 0.5) / 2.0 - 0.5;
    if (src <= 0.0) {
      t.lo[o] = t.hi[o] = 0;
    } else if (src >= static_cast<double>(in - 1)) {
      t.lo[o] = t.hi[o] = in - 1;
    } else {
      const auto lo = static_cast<std::size_t>(std::floor(src));
      t.lo[o] = lo;
      t.hi[o] = lo + 1;
      t.w[o] = src - static_cast<double>(lo);
    }
  }
  return t;
}

// Layout [outer, h, w, inner] -> [outer, 2h, 2w, inner].
Tensor upsample_layout(const Tensor& x, Shape out_shape, std::size_t outer,
                       std::size_t h, std::size_t w, std::size_t inner,
                       Resample mode) {
  auto ty = std::make_shared<Taps>(make_taps(h, mode));
  auto tx = std::make_shared<Taps>(make_taps(w, mode));
  const std::size_t oh = 2 * h, ow = 2 * w;
  const auto in = x.data();
  std::vector<double> out(outer * oh * ow * inner);
  for (std::size_t o = 0; o < outer; ++o) {
    const double* src = in.data() + o * h * w * inner;
    double* dst = out.data() + o * oh * ow * inner;
    for (std::size_t y = 0; y < oh; ++y) {
      const double* r0 = src + ty->lo[y] * w * inner;
      const double* r1 = src + ty->hi[y] * w * inner;
      const double wy = ty->w[y];
      for (std::size_t xx = 0; xx < ow; ++xx) {
        const std::size_t c0 = tx->lo[xx] * inner, c1 = tx->hi[xx] * inner;
        const double wx = tx->w[xx];
        double* d = dst + (y * ow + xx) * inner;
        for (std::size_t c = 0; c < inner; ++c) {
          const double top = r0[c0 + c] + wx * (r0[c1 + c] - r0[c0 + c]);
          const double bot = r1[c0 + c] + wx * (r1[c1 + c] - r1[c0 + c]);
          d[c] = top + wy * (bot - top);
        }
      }
    }
  }
  return make_result(
      std::move(out_shape), std::move(out), {x},
      [ty, tx, outer, h, w, inner](Node& self) {
        const std::size_t oh = 2 * h, ow = 2 * w;
        auto gx = self.inputs[0]->grad_buffer();
        for (std::size_t o = 0; o < outer; ++o) {
          double* src = gx.data() + o * h * w * inner;
          const double* g = self.grad.data() + o * oh * ow * inner;
          for (std::size_t y = 0; y < oh; ++y) {
            double* r0 = src + ty->lo[y] * w * inner;
            double* r1 = src + ty->hi[y] * w * inner;
            const double wy = ty->w[y];
            for (std::size_t xx = 0; xx < ow; ++xx) {
              const std::size_t c0 = tx->lo[xx] * inner,
                                c1 = tx->hi[xx] * inner;
              const double wx = tx->w[xx];
              const double* gd = g + (y * ow + xx) * inner;
              for (std::size_t c = 0; c < inner; ++c) {
                const double gtop = (1.0 - wy) * gd[c];
                const double gbot = wy * gd[c];
                r0[c0 + c] += (1.0 - wx) * gtop;
                r0[c1 + c] += wx * gtop;
                r1[c0 + c] += (1.0 - wx) * gbot;
                r1[c1 + c] += wx * gbot;
              }
            }
          }
        }
      });
}

// cols[(c*k + i)*k + j][y*W + x] = img[c][y + i - pad][x + j - pad]
void im2col(const double* img, double* cols, std::size_t C, std::size_t H,
            std::size_t W, std::size_t k) {
  const long pad = static_cast<long>(k / 2);
  const std::size_t hw = H * W;
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        double* row = cols + ((c * k + i) * k + j) * hw;
        for (std::size_t y = 0; y < H; ++y) {
          const long sy = static_cast<long>(y + i) - pad;
          for (std::size_t x = 0; x < W; ++x) {
            const long sx = static_cast<long>(x + j) - pad;
            row[y * W + x] =
                (sy < 0 || sy >= static_cast<long>(H) || sx < 0 ||
                 sx >= static_cast<long>(W))
                    ? 0.0
                    : img[(c * H + static_cast<std::size_t>(sy)) * W +
                          static_cast<std::size_t>(sx)];
          }
        }
      }
    }
  }
}

void col2im_add(const double* cols, double* img, std::size_t C, std::size_t H,
                std::size_t W, std::size_t k) {
  const long pad = static_cast<long>(k / 2);
  const std::size_t hw = H * W;
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        const double* row = cols + ((c * k + i) * k + j) * hw;
        for (std::size_t y = 0; y < H; ++y) {
          const long sy = static_cast<long>(y + i) - pad;
          if (sy < 0 || sy >= static_cast<long>(H)) continue;
          for (std::size_t x = 0; x < W; ++x) {
            const long sx = static_cast<long>(x + j) - pad;
            if (sx < 0 || sx >= static_cast<long>(W)) continue;
            img[(c * H + static_cast<std::size_t>(sy)) * W +
                static_cast<std::size_t>(sx)] += row[y * W + x];
          }
        }
      }
    }
  }
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  const std::size_t nb = broadcast_period(a, b, "add");
  const auto av = a.data(), bv = b.data();
  std::vector<double> out(av.size());
  for_broadcast(out.size(), nb, [&](std::size_t i, std::size_t j) {
    out[i] = av[i] + bv[j];
  });
  return make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
    accumulate(*self.inputs[0], self.grad);
    Node& bn = *self.inputs[1];
    if (wants_grad(bn)) reduce_broadcast(self.grad, bn.grad_buffer());
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  const std::size_t nb = broadcast_period(a, b, "sub");
  const auto av = a.data(), bv = b.data();
  std::vector<double> out(av.size());
  for_broadcast(out.size(), nb, [&](std::size_t i, std::size_t j) {
    out[i] = av[i] - bv[j];
  });
  return make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
    accumulate(*self.inputs[0], self.grad);
    Node& bn = *self.inputs[1];
    if (wants_grad(bn)) {
      auto gb = bn.grad_buffer();
      for_broadcast(self.grad.size(), gb.size(),
                    [&](std::size_t i, std::size_t j) { gb[j] -= self.grad[i]; });
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  const std::size_t nb = broadcast_period(a, b, "mul");
  const auto av = a.data(), bv = b.data();
  std::vector<double> out(av.size());
  for_broadcast(out.size(), nb, [&](std::size_t i, std::size_t j) {
    out[i] = av[i] * bv[j];
  });
  return make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
    Node& an = *self.inputs[0];
    Node& bn = *self.inputs[1];
    const auto av = values(an), bv = values(bn);
    const std::size_t nb = bv.size();
    if (wants_grad(an)) {
      auto ga = an.grad_buffer();
      for_broadcast(ga.size(), nb, [&](std::size_t i, std::size_t j) {
        ga[i] += self.grad[i] * bv[j];
      });
    }
    if (wants_grad(bn)) {
      auto gb = bn.grad_buffer();
      for_broadcast(self.grad.size(), nb, [&](std::size_t i, std::size_t j) {
        gb[j] += self.grad[i] * av[i];
      });
    }
  });
}

Tensor scale(const Tensor& x, double factor) {
  return unary(
      x, [factor](double v) { return v * factor; },
      [factor](double, double) { return factor; });
}

Tensor add_scalar(const Tensor& x, double value) {
  return unary(
      x, [value](double v) { return v + value; },
      [](double, double) { return 1.0; });
}

Tensor neg(const Tensor& x) { return scale(x, -1.0); }

Tensor square(const Tensor& x) {
  return unary(
      x, [](double v) { return v * v; },
      [](double v, double) { return 2.0 * v; });
}

Tensor leaky_relu(const Tensor& x, double slope) {
  return unary(
      x, [slope](double v) { return v > 0.0 ? v : slope * v; },
      [slope](double v, double) { return v > 0.0 ? 1.0 : slope; });
}

Tensor softplus(const Tensor& x) {
  return unary(
      x,
      [](double v) { return std::max(v, 0.0) + std::log1p(std::exp(-std::abs(v))); },
      [](double v, double) {
        // sigmoid(v), split by sign to avoid overflow
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      });
}

Tensor sum(const Tensor& x) {
  double s = 0.0;
  for (double v : x.data()) s += v;
  return make_result({}, {s}, {x}, [](Node& self) {
    auto gx = self.inputs[0]->grad_buffer();
    const double g = self.grad[0];
    for (double& v : gx) v += g;
  });
}

Tensor mean(const Tensor& x) {
  return scale(sum(x), 1.0 / static_cast<double>(x.numel()));
}

Tensor sum_last(const Tensor& x) {
  const std::size_t d = last_dim(x, "sum_last");
  const std::size_t rows = x.numel() / d;
  Shape shape(x.shape().begin(), x.shape().end() - 1);
  const auto in = x.data();
  std::vector<double> out(rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < d; ++j) out[r] += in[r * d + j];
  }
  return make_result(std::move(shape), std::move(out), {x}, [d](Node& self) {
    auto gx = self.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += self.grad[i / d];
  });
}

Tensor mean_last(const Tensor& x) {
  const std::size_t d = last_dim(x, "mean_last");
  return scale(sum_last(x), 1.0 / static_cast<double>(d));
}

Tensor var_last(const Tensor& x) {
  const std::size_t d = last_dim(x, "var_last");
  const std::size_t rows = x.numel() / d;
  Shape shape(x.shape().begin(), x.shape().end() - 1);
  const auto in = x.data();
  auto mu = std::make_shared<std::vector<double>>(rows, 0.0);
  std::vector<double> out(rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    double m = 0.0;
    for (std::size_t j = 0; j < d; ++j) m += in[r * d + j];
    m /= static_cast<double>(d);
    (*mu)[r] = m;
    double v = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      v += (in[r * d + j] - m) * (in[r * d + j] - m);
    }
    out[r] = v / static_cast<double>(d);
  }
  return make_result(std::move(shape), std::move(out), {x},
                     [d, mu](Node& self) {
                       Node& xn = *self.inputs[0];
                       const auto xv = values(xn);
                       auto gx = xn.grad_buffer();
                       for (std::size_t i = 0; i < gx.size(); ++i) {
                         const std::size_t r = i / d;
                         gx[i] += self.grad[r] * 2.0 * (xv[i] - (*mu)[r]) /
                                  static_cast<double>(d);
                       }
                     });
}

Tensor reshape(const Tensor& x, Shape shape) {
  require(shape_numel(shape) == x.numel(),
          "reshape " + shape_str(x.shape()) + " -> " + shape_str(shape));
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->data = x.node()->data;
  if (GradMode::enabled() && x.requires_grad()) {
    node->requires_grad = true;
    node->inputs = {x.node()};
    node->backward = [](Node& self) { accumulate(*self.inputs[0], self.grad); };
  }
  return Tensor(std::move(node));
}

Tensor permute(const Tensor& x, const std::vector<std::size_t>& axes) {
  const Shape& in_shape = x.shape();
  const std::size_t r = in_shape.size();
  require(axes.size() == r, "permute: " + std::to_string(axes.size()) +
                                " axes for " + shape_str(in_shape));
  std::vector<bool> seen(r, false);
  for (auto a : axes) {
    require(a < r && !seen[a], "permute: axes are not a permutation");
    seen[a] = true;
  }
  std::vector<std::size_t> in_stride(r, 1);
  for (std::size_t i = r; i-- > 1;) in_stride[i - 1] = in_stride[i] * in_shape[i];
  Shape out_shape(r);
  for (std::size_t i = 0; i < r; ++i) out_shape[i] = in_shape[axes[i]];

  auto src = std::make_shared<std::vector<std::size_t>>(x.numel());
  std::vector<std::size_t> idx(r, 0);
  for (std::size_t flat = 0; flat < src->size(); ++flat) {
    std::size_t s = 0;
    for (std::size_t i = 0; i < r; ++i) s += idx[i] * in_stride[axes[i]];
    (*src)[flat] = s;
    for (std::size_t i = r; i-- > 0;) {
      if (++idx[i] < out_shape[i]) break;
      idx[i] = 0;
    }
  }
  return gather(x, std::move(out_shape), std::move(src));
}

Tensor transpose(const Tensor& x) {
  require(x.rank() >= 2, "transpose needs rank >= 2, got " + shape_str(x.shape()));
  std::vector<std::size_t> axes(x.rank());
  for (std::size_t i = 0; i < axes.size(); ++i) axes[i] = i;
  std::swap(axes[axes.size() - 1], axes[axes.size() - 2]);
  return permute(x, axes);
}

Tensor slice(const Tensor& x, std::size_t axis, std::size_t begin,
             std::size_t end) {
  require(axis < x.rank(), "slice: axis out of range for " + shape_str(x.shape()));
  require(begin <= end && end <= x.shape()[axis],
          "slice [" + std::to_string(begin) + ", " + std::to_string(end) +
              ") out of range for axis of size " +
              std::to_string(x.shape()[axis]));
  const AxisSplit s = split_at(x.shape(), axis);
  const std::size_t len = end - begin;
  Shape shape = x.shape();
  shape[axis] = len;
  const auto in = x.data();
  std::vector<double> out(s.outer * len * s.inner);
  for (std::size_t o = 0; o < s.outer; ++o) {
    std::copy_n(in.data() + (o * s.len + begin) * s.inner, len * s.inner,
                out.data() + o * len * s.inner);
  }
  return make_result(std::move(shape), std::move(out), {x},
                     [s, begin, len](Node& self) {
                       auto gx = self.inputs[0]->grad_buffer();
                       for (std::size_t o = 0; o < s.outer; ++o) {
                         double* dst = gx.data() + (o * s.len + begin) * s.inner;
                         const double* g = self.grad.data() + o * len * s.inner;
                         for (std::size_t i = 0; i < len * s.inner; ++i) {
                           dst[i] += g[i];
                         }
                       }
                     });
}

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
  require(!parts.empty(), "concat of zero tensors");
  const Shape& ref = parts.front().shape();
  require(axis < ref.size(), "concat: axis out of range for " + shape_str(ref));
  Shape shape = ref;
  shape[axis] = 0;
  auto lens = std::make_shared<std::vector<std::size_t>>();
  for (const auto& p : parts) {
    Shape a = p.shape(), b = ref;
    require(a.size() == b.size(), "concat: rank mismatch " + shape_str(a) +
                                      " vs " + shape_str(b));
    a[axis] = b[axis] = 0;
    require(a == b, "concat: shapes " + shape_str(p.shape()) + " and " +
                        shape_str(ref) + " differ off the concat axis");
    lens->push_back(p.shape()[axis]);
    shape[axis] += p.shape()[axis];
  }
  const AxisSplit s = split_at(shape, axis);
  std::vector<double> out(shape_numel(shape));
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto in = parts[k].data();
    const std::size_t len = (*lens)[k];
    for (std::size_t o = 0; o < s.outer; ++o) {
      std::copy_n(in.data() + o * len * s.inner, len * s.inner,
                  out.data() + (o * s.len + offset) * s.inner);
    }
    offset += len;
  }
  return make_result(std::move(shape), std::move(out), parts,
                     [s, lens](Node& self) {
                       std::size_t offset = 0;
                       for (std::size_t k = 0; k < self.inputs.size(); ++k) {
                         Node& in = *self.inputs[k];
                         const std::size_t len = (*lens)[k];
                         if (wants_grad(in)) {
                           auto gx = in.grad_buffer();
                           for (std::size_t o = 0; o < s.outer; ++o) {
                             const double* g =
                                 self.grad.data() + (o * s.len + offset) * s.inner;
                             double* dst = gx.data() + o * len * s.inner;
                             for (std::size_t i = 0; i < len * s.inner; ++i) {
                               dst[i] += g[i];
                             }
                           }
                         }
                         offset += len;
                       }
                     });
}

Tensor repeat_batch(const Tensor& x, std::size_t copies) {
  require(copies >= 1, "repeat_batch needs at least one copy");
  Shape shape{copies};
  shape.insert(shape.end(), x.shape().begin(), x.shape().end());
  const auto in = x.data();
  std::vector<double> out;
  out.reserve(copies * in.size());
  for (std::size_t c = 0; c < copies; ++c) out.insert(out.end(), in.begin(), in.end());
  return make_result(std::move(shape), std::move(out), {x}, [](Node& self) {
    reduce_broadcast(self.grad, self.inputs[0]->grad_buffer());
  });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require(a.rank() >= 1 && b.rank() == 2 && a.shape().back() == b.shape()[0],
          "matmul " + shape_str(a.shape()) + " . " + shape_str(b.shape()));
  const std::size_t k = b.shape()[0], n = b.shape()[1];
  const std::size_t m = a.numel() / k;
  Shape shape = a.shape();
  shape.back() = n;
  std::vector<double> out(m * n);
  kernels::gemm_nn(a.data().data(), b.data().data(), out.data(), m, k, n, false);
  return make_result(std::move(shape), std::move(out), {a, b},
                     [m, k, n](Node& self) {
                       Node& an = *self.inputs[0];
                       Node& bn = *self.inputs[1];
                       if (wants_grad(an)) {
                         std::vector<double> bt(k * n);
                         kernels::transpose(bn.data->data(), bt.data(), k, n);
                         kernels::gemm_nn(self.grad.data(), bt.data(),
                                          an.grad_buffer().data(), m, n, k, true);
                       }
                       if (wants_grad(bn)) {
                         kernels::gemm_tn(an.data->data(), self.grad.data(),
                                          bn.grad_buffer().data(), m, k, n, true);
                       }
                     });
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require(a.rank() >= 1 && b.rank() == 2 && a.shape().back() == b.shape()[1],
          "matmul_nt " + shape_str(a.shape()) + " . " + shape_str(b.shape()) +
              "^T");
  const std::size_t n = b.shape()[0], k = b.shape()[1];
  const std::size_t m = a.numel() / k;
  Shape shape = a.shape();
  shape.back() = n;
  std::vector<double> bt(k * n);
  kernels::transpose(b.data().data(), bt.data(), n, k);
  std::vector<double> out(m * n);
  kernels::gemm_nn(a.data().data(), bt.data(), out.data(), m, k, n, false);
  return make_result(std::move(shape), std::move(out), {a, b},
                     [m, k, n](Node& self) {
                       Node& an = *self.inputs[0];
                       Node& bn = *self.inputs[1];
                       if (wants_grad(an)) {
                         kernels::gemm_nn(self.grad.data(), bn.data->data(),
                                          an.grad_buffer().data(), m, n, k, true);
                       }
                       if (wants_grad(bn)) {
                         kernels::gemm_tn(self.grad.data(), an.data->data(),
                                          bn.grad_buffer().data(), m, n, k, true);
                       }
                     });
}

Tensor bmm(const Tensor& a, const Tensor& b) {
  require(a.rank() == 3 && b.rank() == 3 && a.shape()[0] == b.shape()[0] &&
              a.shape()[2] == b.shape()[1],
          "bmm " + shape_str(a.shape()) + " . " + shape_str(b.shape()));
  const std::size_t batch = a.shape()[0], r = a.shape()[1], k = a.shape()[2],
                    c = b.shape()[2];
  std::vector<double> out(batch * r * c);
  for (std::size_t i = 0; i < batch; ++i) {
    kernels::gemm_nn(a.data().data() + i * r * k, b.data().data() + i * k * c,
                     out.data() + i * r * c, r, k, c, false);
  }
  return make_result(
      {batch, r, c}, std::move(out), {a, b}, [batch, r, k, c](Node& self) {
        Node& an = *self.inputs[0];
        Node& bn = *self.inputs[1];
        std::vector<double> bt(k * c);
        for (std::size_t i = 0; i < batch; ++i) {
          const double* g = self.grad.data() + i * r * c;
          if (wants_grad(an)) {
            kernels::transpose(bn.data->data() + i * k * c, bt.data(), k, c);
            kernels::gemm_nn(g, bt.data(), an.grad_buffer().data() + i * r * k,
                             r, c, k, true);
          }
          if (wants_grad(bn)) {
            kernels::gemm_tn(an.data->data() + i * r * k, g,
                             bn.grad_buffer().data() + i * k * c, r, k, c, true);
          }
        }
      });
}

Tensor softmax_rows(const Tensor& x) {
  const std::size_t d = last_dim(x, "softmax_rows");
  const std::size_t rows = x.numel() / d;
  const auto in = x.data();
  std::vector<double> out(in.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = in.data() + r * d;
    double* yr = out.data() + r * d;
    const double mx = *std::max_element(xr, xr + d);
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      yr[j] = std::exp(xr[j] - mx);
      s += yr[j];
    }
    for (std::size_t j = 0; j < d; ++j) yr[j] /= s;
  }
  return make_result(x.shape(), std::move(out), {x}, [d, rows](Node& self) {
    auto gx = self.inputs[0]->grad_buffer();
    const auto y = values(self);
    for (std::size_t r = 0; r < rows; ++r) {
      double dot = 0.0;
      for (std::size_t j = 0; j < d; ++j) dot += self.grad[r * d + j] * y[r * d + j];
      for (std::size_t j = 0; j < d; ++j) {
        gx[r * d + j] += y[r * d + j] * (self.grad[r * d + j] - dot);
      }
    }
  });
}

Tensor layer_norm(const Tensor& x, double eps) {
  const std::size_t d = last_dim(x, "layer_norm");
  return standardize(x, AxisSplit{x.numel() / d, d, 1}, eps);
}

Tensor instance_norm(const Tensor& x, double eps) {
  require(x.rank() >= 2, "instance_norm needs [..., m, d], got " +
                             shape_str(x.shape()));
  const std::size_t d = x.shape().back();
  const std::size_t m = x.shape()[x.rank() - 2];
  return standardize(x, AxisSplit{x.numel() / (m * d), m, d}, eps);
}

Tensor pixel_norm(const Tensor& x, double eps) {
  const std::size_t d = last_dim(x, "pixel_norm");
  const std::size_t rows = x.numel() / d;
  const auto in = x.data();
  std::vector<double> out(in.size());
  auto inv = std::make_shared<std::vector<double>>(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    double ms = 0.0;
    for (std::size_t j = 0; j < d; ++j) ms += in[r * d + j] * in[r * d + j];
    ms /= static_cast<double>(d);
    const double s = 1.0 / std::sqrt(ms + eps);
    (*inv)[r] = s;
    for (std::size_t j = 0; j < d; ++j) out[r * d + j] = in[r * d + j] * s;
  }
  return make_result(x.shape(), std::move(out), {x}, [d, rows, inv](Node& self) {
    Node& xn = *self.inputs[0];
    const auto xv = values(xn);
    auto gx = xn.grad_buffer();
    for (std::size_t r = 0; r < rows; ++r) {
      const double s = (*inv)[r];
      double gdotx = 0.0;
      for (std::size_t j = 0; j < d; ++j) gdotx += self.grad[r * d + j] * xv[r * d + j];
      const double c = s * s * s * gdotx / static_cast<double>(d);
      for (std::size_t j = 0; j < d; ++j) {
        gx[r * d + j] += s * self.grad[r * d + j] - c * xv[r * d + j];
      }
    }
  });
}

Tensor upsample2x(const Tensor& image, Resample mode) {
  require(image.rank() >= 2, "upsample2x needs [..., H, W], got " +
                                 shape_str(image.shape()));
  const std::size_t h = image.shape()[image.rank() - 2];
  const std::size_t w = image.shape().back();
  Shape shape = image.shape();
  shape[shape.size() - 2] = 2 * h;
  shape.back() = 2 * w;
  return upsample_layout(image, std::move(shape), image.numel() / (h * w), h, w,
                         1, mode);
}

Tensor upsample2x_tokens(const Tensor& tokens, std::size_t grid_h,
                         std::size_t grid_w, Resample mode) {
  require(tokens.rank() >= 2 && tokens.shape()[tokens.rank() - 2] == grid_h * grid_w,
          "token grid " + std::to_string(grid_h) + "x" + std::to_string(grid_w) +
              " does not factor tokens " + shape_str(tokens.shape()));
  const std::size_t d = tokens.shape().back();
  Shape shape = tokens.shape();
  shape[shape.size() - 2] = 4 * grid_h * grid_w;
  return upsample_layout(tokens, std::move(shape),
                         tokens.numel() / (grid_h * grid_w * d), grid_h, grid_w,
                         d, mode);
}

Tensor avg_pool2x(const Tensor& image) {
  require(image.rank() >= 2, "avg_pool2x needs [..., H, W], got " +
                                 shape_str(image.shape()));
  const std::size_t h = image.shape()[image.rank() - 2];
  const std::size_t w = image.shape().back();
  require(h % 2 == 0 && w % 2 == 0,
          "avg_pool2x needs even spatial size, got " + shape_str(image.shape()));
  const std::size_t planes = image.numel() / (h * w);
  const std::size_t oh = h / 2, ow = w / 2;
  Shape shape = image.shape();
  shape[shape.size() - 2] = oh;
  shape.back() = ow;
  const auto in = image.data();
  std::vector<double> out(planes * oh * ow);
  for (std::size_t p = 0; p < planes; ++p) {
    const double* src = in.data() + p * h * w;
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t x = 0; x < ow; ++x) {
        const double* s = src + 2 * y * w + 2 * x;
        out[(p * oh + y) * ow + x] = 0.25 * (s[0] + s[1] + s[w] + s[w + 1]);
      }
    }
  }
  return make_result(std::move(shape), std::move(out), {image},
                     [planes, h, w](Node& self) {
                       const std::size_t oh = h / 2, ow = w / 2;
                       auto gx = self.inputs[0]->grad_buffer();
                       for (std::size_t p = 0; p < planes; ++p) {
                         double* dst = gx.data() + p * h * w;
                         for (std::size_t y = 0; y < oh; ++y) {
                           for (std::size_t x = 0; x < ow; ++x) {
                             const double g = 0.25 * self.grad[(p * oh + y) * ow + x];
                             double* d = dst + 2 * y * w + 2 * x;
                             d[0] += g;
                             d[1] += g;
                             d[w] += g;
                             d[w + 1] += g;
                           }
                         }
                       }
                     });
}

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& bias) {
  require(x.rank() == 4 && w.rank() == 4 && w.shape()[1] == x.shape()[1] &&
              w.shape()[2] == w.shape()[3] && w.shape()[2] % 2 == 1,
          "conv2d input " + shape_str(x.shape()) + " with kernel " +
              shape_str(w.shape()));
  const std::size_t batch = x.shape()[0], C = x.shape()[1], H = x.shape()[2],
                    W = x.shape()[3];
  const std::size_t O = w.shape()[0], k = w.shape()[2];
  const bool has_bias = bias.defined();
  if (has_bias) {
    require(bias.rank() == 1 && bias.shape()[0] == O,
            "conv2d bias " + shape_str(bias.shape()) + " for " +
                std::to_string(O) + " output channels");
  }
  const std::size_t ckk = C * k * k, hw = H * W;
  std::vector<double> out(batch * O * hw);
  std::vector<double> cols(k == 1 ? 0 : ckk * hw);
  const auto xv = x.data();
  for (std::size_t b = 0; b < batch; ++b) {
    const double* img = xv.data() + b * C * hw;
    const double* col = img;
    if (k != 1) {
      im2col(img, cols.data(), C, H, W, k);
      col = cols.data();
    }
    double* o = out.data() + b * O * hw;
    kernels::gemm_nn(w.data().data(), col, o, O, ckk, hw, false);
    if (has_bias) {
      const auto bv = bias.data();
      for (std::size_t oc = 0; oc < O; ++oc) {
        for (std::size_t p = 0; p < hw; ++p) o[oc * hw + p] += bv[oc];
      }
    }
  }
  std::vector<Tensor> inputs{x, w};
  if (has_bias) inputs.push_back(bias);
  return make_result(
      {batch, O, H, W}, std::move(out), std::move(inputs),
      [batch, C, H, W, O, k, has_bias](Node& self) {
        const std::size_t ckk = C * k * k, hw = H * W;
        Node& xn = *self.inputs[0];
        Node& wn = *self.inputs[1];
        const bool gx = wants_grad(xn), gw = wants_grad(wn);
        const bool gb = has_bias && wants_grad(*self.inputs[2]);
        std::vector<double> cols(ckk * hw), colst(gw ? ckk * hw : 0);
        std::vector<double> wt;
        if (gx) {
          wt.resize(ckk * O);
          kernels::transpose(wn.data->data(), wt.data(), O, ckk);
        }
        for (std::size_t b = 0; b < batch; ++b) {
          const double* g = self.grad.data() + b * O * hw;
          if (gw) {
            const double* img = xn.data->data() + b * C * hw;
            const double* col = img;
            if (k != 1) {
              im2col(img, cols.data(), C, H, W, k);
              col = cols.data();
            }
            kernels::transpose(col, colst.data(), ckk, hw);
            kernels::gemm_nn(g, colst.data(), wn.grad_buffer().data(), O, hw, ckk,
                             true);
          }
          if (gb) {
            auto gbias = self.inputs[2]->grad_buffer();
            for (std::size_t oc = 0; oc < O; ++oc) {
              double s = 0.0;
              for (std::size_t p = 0; p < hw; ++p) s += g[oc * hw + p];
              gbias[oc] += s;
            }
          }
          if (gx) {
            double* dst = xn.grad_buffer().data() + b * C * hw;
            if (k == 1) {
              kernels::gemm_nn(wt.data(), g, dst, ckk, O, hw, true);
            } else {
              kernels::gemm_nn(wt.data(), g, cols.data(), ckk, O, hw, false);
              col2im_add(cols.data(), dst, C, H, W, k);
            }
          }
        }
      });
}

Tensor conv_adjoint_weight(const Tensor& w) {
  require(w.rank() == 4 && w.shape()[2] == w.shape()[3],
          "conv_adjoint_weight needs [O x C x k x k], got " + shape_str(w.shape()));
  const std::size_t O = w.shape()[0], C = w.shape()[1], k = w.shape()[2];
  auto src = std::make_shared<std::vector<std::size_t>>(w.numel());
  std::size_t flat = 0;
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t o = 0; o < O; ++o) {
      for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
          (*src)[flat++] = ((o * C + c) * k + (k - 1 - i)) * k + (k - 1 - j);
        }
      }
    }
  }
  return gather(w, {C, O, k, k}, std::move(src));
}

Tensor leaky_relu_slope_mask(const Tensor& x, double slope) {
  std::vector<double> out(x.numel());
  const auto in = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = in[i] > 0.0 ? 1.0 : slope;
  return Tensor::from(x.shape(), std::move(out));
}

}  // namespace tokengan
