#include "reenact/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

REENACT_NS_BEGIN

namespace {

using MatR = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapR = Eigen::Map<MatR>;
using CMapR = Eigen::Map<const MatR>;

bool wants(const TensorImpl* t) { return t != nullptr && t->requires_grad; }

// Strides that map an index in `full` onto a tensor of shape `part`, where
// every extent of `part` is either equal to `full` or 1.
struct BroadcastStrides {
  std::size_t n, c, h, w;
};

BroadcastStrides broadcast_strides(const Shape& full, const Shape& part, const char* op) {
  auto ok = [](int f, int p) { return p == f || p == 1; };
  if (!ok(full.n, part.n) || !ok(full.c, part.c) || !ok(full.h, part.h) || !ok(full.w, part.w)) {
    throw ShapeError(std::string(op) + ": cannot broadcast " + part.str() + " to " + full.str());
  }
  const std::size_t sw = 1;
  const std::size_t sh = static_cast<std::size_t>(part.w);
  const std::size_t sc = sh * part.h;
  const std::size_t sn = sc * part.c;
  return {part.n == 1 ? 0 : sn, part.c == 1 ? 0 : sc, part.h == 1 ? 0 : sh, part.w == 1 ? 0 : sw};
}

template <typename F>
void for_each_broadcast(const Shape& s, const BroadcastStrides& b, F&& f) {
  std::size_t i = 0;
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < s.c; ++c)
      for (int h = 0; h < s.h; ++h) {
        const std::size_t base = n * b.n + c * b.c + h * b.h;
        for (int w = 0; w < s.w; ++w, ++i) f(i, base + w * b.w);
      }
}

template <typename Fwd, typename DA, typename DB>
Tensor broadcast_binary(const Tensor& a, const Tensor& b, const char* name, Fwd fwd, DA da, DB db) {
  const Shape s = a.shape();
  const BroadcastStrides bs = broadcast_strides(s, b.shape(), name);
  std::vector<Real> out(s.numel());
  const Real* pa = a.data().data();
  const Real* pb = b.data().data();
  for_each_broadcast(s, bs, [&](std::size_t i, std::size_t j) { out[i] = fwd(pa[i], pb[j]); });
  TensorImpl* ia = a.impl();
  TensorImpl* ib = b.impl();
  return make_result(s, std::move(out), {a, b}, [ia, ib, s, bs, da, db](TensorImpl& self) {
    const Real* g = self.grad.data();
    const Real* pa = ia->data.data();
    const Real* pb = ib->data.data();
    Real* ga = wants(ia) ? ia->grad_buffer() : nullptr;
    Real* gb = wants(ib) ? ib->grad_buffer() : nullptr;
    for_each_broadcast(s, bs, [&](std::size_t i, std::size_t j) {
      if (ga) ga[i] += g[i] * da(pa[i], pb[j]);
      if (gb) gb[j] += g[i] * db(pa[i], pb[j]);
    });
  });
}

template <typename Fwd, typename Deriv>
Tensor unary(const Tensor& x, Fwd fwd, Deriv deriv) {
  std::vector<Real> out(x.numel());
  const auto in = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(in[i]);
  TensorImpl* ix = x.impl();
  return make_result(x.shape(), std::move(out), {x}, [ix, deriv](TensorImpl& self) {
    Real* gx = ix->grad_buffer();
    const Real* g = self.grad.data();
    const Real* px = ix->data.data();
    const Real* py = self.data.data();
    for (std::size_t i = 0; i < self.grad.size(); ++i) gx[i] += g[i] * deriv(px[i], py[i]);
  });
}

}  // namespace

// ---------------------------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) {
  return broadcast_binary(
      a, b, "add", [](Real x, Real y) { return x + y; }, [](Real, Real) { return Real(1); },
      [](Real, Real) { return Real(1); });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return broadcast_binary(
      a, b, "sub", [](Real x, Real y) { return x - y; }, [](Real, Real) { return Real(1); },
      [](Real, Real) { return Real(-1); });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return broadcast_binary(
      a, b, "mul", [](Real x, Real y) { return x * y; }, [](Real, Real y) { return y; },
      [](Real x, Real) { return x; });
}

Tensor scale(const Tensor& a, Real factor) {
  return unary(
      a, [factor](Real x) { return x * factor; }, [factor](Real, Real) { return factor; });
}

Tensor add_scalar(const Tensor& a, Real value) {
  return unary(
      a, [value](Real x) { return x + value; }, [](Real, Real) { return Real(1); });
}

Tensor relu(const Tensor& x) {
  return unary(
      x, [](Real v) { return v > 0 ? v : Real(0); },
      [](Real v, Real) { return v > 0 ? Real(1) : Real(0); });
}

Tensor leaky_relu(const Tensor& x, Real slope) {
  return unary(
      x, [slope](Real v) { return v > 0 ? v : slope * v; },
      [slope](Real v, Real) { return v > 0 ? Real(1) : slope; });
}

Tensor tanh(const Tensor& x) {
  return unary(
      x, [](Real v) { return std::tanh(v); }, [](Real, Real y) { return Real(1) - y * y; });
}

Tensor sigmoid(const Tensor& x) {
  return unary(
      x,
      [](Real v) {
        return v >= 0 ? Real(1) / (Real(1) + std::exp(-v)) : std::exp(v) / (Real(1) + std::exp(v));
      },
      [](Real, Real y) { return y * (Real(1) - y); });
}

Tensor abs(const Tensor& x) {
  return unary(
      x, [](Real v) { return std::abs(v); },
      [](Real v, Real) { return v > 0 ? Real(1) : (v < 0 ? Real(-1) : Real(0)); });
}

Tensor log(const Tensor& x) {
  return unary(
      x, [](Real v) { return std::log(std::max(v, kLogClamp)); },
      [](Real v, Real) { return v > kLogClamp ? Real(1) / v : Real(0); });
}

// ---------------------------------------------------------------------------

Tensor sum(const Tensor& x) {
  double acc = 0.0;
  for (Real v : x.data()) acc += v;
  TensorImpl* ix = x.impl();
  return make_result(Shape{}, {static_cast<Real>(acc)}, {x}, [ix](TensorImpl& self) {
    Real* gx = ix->grad_buffer();
    const Real g = self.grad[0];
    for (std::size_t i = 0; i < ix->data.size(); ++i) gx[i] += g;
  });
}

Tensor mean(const Tensor& x) {
  const double count = static_cast<double>(x.numel());
  double acc = 0.0;
  for (Real v : x.data()) acc += v;
  TensorImpl* ix = x.impl();
  return make_result(Shape{}, {static_cast<Real>(acc / count)}, {x}, [ix, count](TensorImpl& self) {
    Real* gx = ix->grad_buffer();
    const Real g = static_cast<Real>(self.grad[0] / count);
    for (std::size_t i = 0; i < ix->data.size(); ++i) gx[i] += g;
  });
}

Tensor concat_channels(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ShapeError("concat_channels: no inputs");
  Shape out = parts.front().shape();
  out.c = 0;
  for (const Tensor& p : parts) {
    const Shape& s = p.shape();
    if (s.n != out.n || s.h != out.h || s.w != out.w) {
      throw ShapeError("concat_channels: " + s.str() + " incompatible with " +
                       parts.front().shape().str());
    }
    out.c += s.c;
  }
  std::vector<Real> data(out.numel());
  const std::size_t plane = out.plane();
  std::vector<TensorImpl*> impls;
  int c0 = 0;
  for (const Tensor& p : parts) {
    const int pc = p.shape().c;
    for (int n = 0; n < out.n; ++n) {
      std::copy_n(p.data().data() + n * pc * plane, pc * plane,
                  data.data() + (n * out.c + c0) * plane);
    }
    c0 += pc;
    impls.push_back(p.impl());
  }
  return make_result(out, std::move(data), parts, [impls, out, plane](TensorImpl& self) {
    int c0 = 0;
    for (TensorImpl* p : impls) {
      const int pc = p->shape.c;
      if (wants(p)) {
        Real* gp = p->grad_buffer();
        for (int n = 0; n < out.n; ++n) {
          const Real* src = self.grad.data() + (n * out.c + c0) * plane;
          Real* dst = gp + n * pc * plane;
          for (std::size_t i = 0; i < pc * plane; ++i) dst[i] += src[i];
        }
      }
      c0 += pc;
    }
  });
}

Tensor stack_batch(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ShapeError("stack_batch: no inputs");
  Shape out = parts.front().shape();
  out.n = 0;
  for (const Tensor& p : parts) {
    Shape s = p.shape();
    if (s.c != out.c || s.h != out.h || s.w != out.w) {
      throw ShapeError("stack_batch: " + s.str() + " incompatible with " +
                       parts.front().shape().str());
    }
    out.n += s.n;
  }
  std::vector<Real> data;
  data.reserve(out.numel());
  std::vector<TensorImpl*> impls;
  for (const Tensor& p : parts) {
    data.insert(data.end(), p.data().begin(), p.data().end());
    impls.push_back(p.impl());
  }
  return make_result(out, std::move(data), parts, [impls](TensorImpl& self) {
    std::size_t off = 0;
    for (TensorImpl* p : impls) {
      const std::size_t len = p->data.size();
      if (wants(p)) {
        Real* gp = p->grad_buffer();
        for (std::size_t i = 0; i < len; ++i) gp[i] += self.grad[off + i];
      }
      off += len;
    }
  });
}

Tensor slice_batch(const Tensor& x, int index) {
  const Shape s = x.shape();
  if (index < 0 || index >= s.n) {
    throw ShapeError("slice_batch: index " + std::to_string(index) + " out of range for " +
                     s.str());
  }
  const std::size_t len = static_cast<std::size_t>(s.c) * s.plane();
  std::vector<Real> data(x.data().begin() + index * len, x.data().begin() + (index + 1) * len);
  TensorImpl* ix = x.impl();
  return make_result(Shape{1, s.c, s.h, s.w}, std::move(data), {x},
                     [ix, index, len](TensorImpl& self) {
                       Real* gx = ix->grad_buffer() + index * len;
                       for (std::size_t i = 0; i < len; ++i) gx[i] += self.grad[i];
                     });
}

Tensor slice_channels(const Tensor& x, int begin, int end) {
  const Shape s = x.shape();
  if (begin < 0 || end > s.c || begin >= end) {
    throw ShapeError("slice_channels: [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") out of range for " + s.str());
  }
  const Shape out{s.n, end - begin, s.h, s.w};
  const std::size_t plane = s.plane();
  std::vector<Real> data(out.numel());
  for (int n = 0; n < s.n; ++n) {
    std::copy_n(x.data().data() + (n * s.c + begin) * plane, out.c * plane,
                data.data() + n * out.c * plane);
  }
  TensorImpl* ix = x.impl();
  return make_result(out, std::move(data), {x}, [ix, s, out, begin, plane](TensorImpl& self) {
    Real* gx = ix->grad_buffer();
    for (int n = 0; n < s.n; ++n) {
      const Real* src = self.grad.data() + n * out.c * plane;
      Real* dst = gx + (n * s.c + begin) * plane;
      for (std::size_t i = 0; i < out.c * plane; ++i) dst[i] += src[i];
    }
  });
}

// ---------------------------------------------------------------------------
// Convolution via im2col + GEMM.

namespace {

struct ConvGeometry {
  int in_c, in_h, in_w, k, stride, pad, out_h, out_w;
  int rows() const { return in_c * k * k; }
  int cols() const { return out_h * out_w; }
};

// Output columns [lo, hi) whose tap at kernel column kw lands inside the row.
std::pair<int, int> valid_columns(const ConvGeometry& g, int kw) {
  const int first = g.pad - kw;  // ow * stride >= first
  const int lo = first <= 0 ? 0 : (first + g.stride - 1) / g.stride;
  const int last = g.in_w - 1 + g.pad - kw;  // ow * stride <= last
  const int hi = last < 0 ? 0 : std::min(g.out_w, last / g.stride + 1);
  return {lo, std::max(lo, hi)};
}

void im2col(const Real* in, const ConvGeometry& g, Real* col) {
  for (int c = 0; c < g.in_c; ++c)
    for (int kh = 0; kh < g.k; ++kh)
      for (int kw = 0; kw < g.k; ++kw) {
        Real* row = col + static_cast<std::size_t>((c * g.k + kh) * g.k + kw) * g.cols();
        const Real* plane = in + static_cast<std::size_t>(c) * g.in_h * g.in_w;
        const auto [lo, hi] = valid_columns(g, kw);
        const int offset = kw - g.pad;
        for (int oh = 0; oh < g.out_h; ++oh) {
          const int ih = oh * g.stride - g.pad + kh;
          Real* dst = row + oh * g.out_w;
          if (ih < 0 || ih >= g.in_h) {
            std::fill_n(dst, g.out_w, Real(0));
            continue;
          }
          const Real* src = plane + ih * g.in_w + offset;
          std::fill(dst, dst + lo, Real(0));
          if (g.stride == 1) {
            std::copy(src + lo, src + hi, dst + lo);
          } else {
            for (int ow = lo; ow < hi; ++ow) dst[ow] = src[ow * g.stride];
          }
          std::fill(dst + hi, dst + g.out_w, Real(0));
        }
      }
}

void col2im(const Real* col, const ConvGeometry& g, Real* in) {
  for (int c = 0; c < g.in_c; ++c)
    for (int kh = 0; kh < g.k; ++kh)
      for (int kw = 0; kw < g.k; ++kw) {
        const Real* row = col + static_cast<std::size_t>((c * g.k + kh) * g.k + kw) * g.cols();
        Real* plane = in + static_cast<std::size_t>(c) * g.in_h * g.in_w;
        const auto [lo, hi] = valid_columns(g, kw);
        const int offset = kw - g.pad;
        for (int oh = 0; oh < g.out_h; ++oh) {
          const int ih = oh * g.stride - g.pad + kh;
          if (ih < 0 || ih >= g.in_h) continue;
          const Real* src = row + oh * g.out_w;
          Real* dst = plane + ih * g.in_w + offset;
          if (g.stride == 1) {
            for (int ow = lo; ow < hi; ++ow) dst[ow] += src[ow];
          } else {
            for (int ow = lo; ow < hi; ++ow) dst[ow * g.stride] += src[ow];
          }
        }
      }
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, int stride,
              int padding) {
  const Shape is = input.shape();
  const Shape ws = weight.shape();
  if (ws.h != ws.w || ws.c != is.c) {
    throw ShapeError("conv2d: input " + is.str() + " incompatible with weight " + ws.str());
  }
  if (stride < 1 || padding < 0) {
    throw ShapeError("conv2d: invalid stride/padding");
  }
  if (bias.defined() && bias.numel() != static_cast<std::size_t>(ws.n)) {
    throw ShapeError("conv2d: bias " + bias.shape().str() + " does not match weight " + ws.str());
  }
  const int k = ws.h;
  ConvGeometry g{is.c, is.h, is.w, k, stride, padding, 0, 0};
  g.out_h = (is.h + 2 * padding - k) / stride + 1;
  g.out_w = (is.w + 2 * padding - k) / stride + 1;
  if (g.out_h <= 0 || g.out_w <= 0) {
    throw ShapeError("conv2d: kernel " + ws.str() + " larger than padded input " + is.str());
  }
  const Shape os{is.n, ws.n, g.out_h, g.out_w};
  const bool direct = (k == 1 && stride == 1 && padding == 0);
  const std::size_t in_len = static_cast<std::size_t>(is.c) * is.plane();
  const std::size_t out_len = static_cast<std::size_t>(os.c) * os.plane();

  std::vector<Real> out(os.numel());
  const auto col = std::make_unique_for_overwrite<Real[]>(
      direct ? 0 : static_cast<std::size_t>(g.rows()) * g.cols());
  CMapR wmat(weight.data().data(), ws.n, g.rows());
  for (int n = 0; n < is.n; ++n) {
    const Real* src = input.data().data() + n * in_len;
    if (!direct) im2col(src, g, col.get());
    CMapR cmat(direct ? src : col.get(), g.rows(), g.cols());
    MapR omat(out.data() + n * out_len, os.c, g.cols());
    omat.noalias() = wmat * cmat;
    if (bias.defined()) {
      for (int o = 0; o < os.c; ++o) omat.row(o).array() += bias.data()[o];
    }
  }

  TensorImpl* ix = input.impl();
  TensorImpl* iw = weight.impl();
  TensorImpl* ib = bias.defined() ? bias.impl() : nullptr;
  return make_result(os, std::move(out), {input, weight, bias},
                     [ix, iw, ib, g, is, os, direct, in_len, out_len](TensorImpl& self) {
                       const std::size_t col_len =
                           direct ? 0 : static_cast<std::size_t>(g.rows()) * g.cols();
                       const auto col = std::make_unique_for_overwrite<Real[]>(col_len);
                       const auto dcol = std::make_unique_for_overwrite<Real[]>(col_len);
                       CMapR wmat(iw->data.data(), os.c, g.rows());
                       for (int n = 0; n < is.n; ++n) {
                         CMapR gout(self.grad.data() + n * out_len, os.c, g.cols());
                         if (wants(iw)) {
                           const Real* src = ix->data.data() + n * in_len;
                           if (!direct) im2col(src, g, col.get());
                           CMapR cmat(direct ? src : col.get(), g.rows(), g.cols());
                           MapR gw(iw->grad_buffer(), os.c, g.rows());
                           gw.noalias() += gout * cmat.transpose();
                         }
                         if (wants(ix)) {
                           Real* gin = ix->grad_buffer() + n * in_len;
                           if (direct) {
                             MapR gi(gin, g.rows(), g.cols());
                             gi.noalias() += wmat.transpose() * gout;
                           } else {
                             MapR dc(dcol.get(), g.rows(), g.cols());
                             dc.noalias() = wmat.transpose() * gout;
                             col2im(dcol.get(), g, gin);
                           }
                         }
                         if (wants(ib)) {
                           Real* gb = ib->grad_buffer();
                           // Fixed summation order: Eigen reductions peel by runtime alignment.
                           for (int o = 0; o < os.c; ++o) {
                             Real s = 0;
                             for (Eigen::Index j = 0; j < g.cols(); ++j) s += gout(o, j);
                             gb[o] += s;
                           }
                         }
                       }
                     });
}

// ---------------------------------------------------------------------------

namespace {

// Index map for pixel shuffle: output offset -> input offset.
std::vector<std::size_t> shuffle_map(const Shape& in, int r) {
  const Shape out{in.n, in.c / (r * r), in.h * r, in.w * r};
  std::vector<std::size_t> map(in.numel());
  std::size_t o = 0;
  for (int n = 0; n < out.n; ++n)
    for (int c = 0; c < out.c; ++c)
      for (int y = 0; y < out.h; ++y)
        for (int x = 0; x < out.w; ++x, ++o) {
          const int ic = c * r * r + (y % r) * r + (x % r);
          map[o] = ((static_cast<std::size_t>(n) * in.c + ic) * in.h + y / r) * in.w + x / r;
        }
  return map;
}

Tensor gather(const Tensor& x, Shape out_shape, std::vector<std::size_t> map) {
  std::vector<Real> out(map.size());
  const auto in = x.data();
  for (std::size_t i = 0; i < map.size(); ++i) out[i] = in[map[i]];
  TensorImpl* ix = x.impl();
  return make_result(out_shape, std::move(out), {x}, [ix, map = std::move(map)](TensorImpl& self) {
    Real* gx = ix->grad_buffer();
    for (std::size_t i = 0; i < map.size(); ++i) gx[map[i]] += self.grad[i];
  });
}

}  // namespace

Tensor pixel_shuffle(const Tensor& x, int r) {
  const Shape s = x.shape();
  if (r < 1 || s.c % (r * r) != 0) {
    throw ShapeError("pixel_shuffle: channel count " + std::to_string(s.c) + " not divisible by " +
                     std::to_string(r * r));
  }
  return gather(x, Shape{s.n, s.c / (r * r), s.h * r, s.w * r}, shuffle_map(s, r));
}

Tensor pixel_unshuffle(const Tensor& x, int r) {
  const Shape s = x.shape();
  if (r < 1 || s.h % r != 0 || s.w % r != 0) {
    throw ShapeError("pixel_unshuffle: extent " + s.str() + " not divisible by " +
                     std::to_string(r));
  }
  const Shape packed{s.n, s.c * r * r, s.h / r, s.w / r};
  // Invert the shuffle map: output of unshuffle at packed offset p reads the
  // shuffled offset that pixel_shuffle would have written from p.
  const std::vector<std::size_t> fwd = shuffle_map(packed, r);
  std::vector<std::size_t> inv(fwd.size());
  for (std::size_t o = 0; o < fwd.size(); ++o) inv[fwd[o]] = o;
  return gather(x, packed, std::move(inv));
}

Tensor upsample_nearest(const Tensor& x, int factor) {
  const Shape s = x.shape();
  const Shape out{s.n, s.c, s.h * factor, s.w * factor};
  std::vector<std::size_t> map(out.numel());
  std::size_t o = 0;
  for (int n = 0; n < out.n; ++n)
    for (int c = 0; c < out.c; ++c)
      for (int y = 0; y < out.h; ++y)
        for (int xx = 0; xx < out.w; ++xx, ++o)
          map[o] = ((static_cast<std::size_t>(n) * s.c + c) * s.h + y / factor) * s.w + xx / factor;
  return gather(x, out, std::move(map));
}

Tensor avg_pool2(const Tensor& x) {
  const Shape s = x.shape();
  const Shape out{s.n, s.c, s.h / 2, s.w / 2};
  if (out.h == 0 || out.w == 0) throw ShapeError("avg_pool2: input too small " + s.str());
  std::vector<Real> data(out.numel());
  const Real* in = x.data().data();
  for (int nc = 0; nc < s.n * s.c; ++nc)
    for (int y = 0; y < out.h; ++y)
      for (int xx = 0; xx < out.w; ++xx) {
        const Real* p = in + static_cast<std::size_t>(nc) * s.plane() + 2 * y * s.w + 2 * xx;
        data[static_cast<std::size_t>(nc) * out.plane() + y * out.w + xx] =
            Real(0.25) * (p[0] + p[1] + p[s.w] + p[s.w + 1]);
      }
  TensorImpl* ix = x.impl();
  return make_result(out, std::move(data), {x}, [ix, s, out](TensorImpl& self) {
    Real* gx = ix->grad_buffer();
    for (int nc = 0; nc < s.n * s.c; ++nc)
      for (int y = 0; y < out.h; ++y)
        for (int xx = 0; xx < out.w; ++xx) {
          const Real g =
              Real(0.25) * self.grad[static_cast<std::size_t>(nc) * out.plane() + y * out.w + xx];
          Real* p = gx + static_cast<std::size_t>(nc) * s.plane() + 2 * y * s.w + 2 * xx;
          p[0] += g;
          p[1] += g;
          p[s.w] += g;
          p[s.w + 1] += g;
        }
  });
}

// ---------------------------------------------------------------------------
// Bilinear resampling.

namespace {

struct Tap {
  int i0, i1;
  Real frac;
};

// Align-corners source coordinate for each destination index.
std::vector<Tap> resize_taps(int in, int out) {
  std::vector<Tap> taps(out);
  for (int o = 0; o < out; ++o) {
    const double src = out > 1 ? static_cast<double>(o) * (in - 1) / (out - 1) : 0.0;
    int i0 = static_cast<int>(std::floor(src));
    i0 = std::clamp(i0, 0, in - 1);
    const int i1 = std::min(i0 + 1, in - 1);
    taps[o] = {i0, i1, static_cast<Real>(src - i0)};
  }
  return taps;
}

}  // namespace

Tensor bilinear_resize(const Tensor& x, int out_h, int out_w) {
  if (out_h < 1 || out_w < 1) throw ShapeError("bilinear_resize: non-positive extent");
  const Shape s = x.shape();
  if (s.h == out_h && s.w == out_w) {
    return unary(
        x, [](Real v) { return v; }, [](Real, Real) { return Real(1); });
  }
  const Shape out{s.n, s.c, out_h, out_w};
  const auto ty = resize_taps(s.h, out_h);
  const auto tx = resize_taps(s.w, out_w);
  std::vector<Real> data(out.numel());
  const Real* in = x.data().data();
  for (int nc = 0; nc < s.n * s.c; ++nc) {
    const Real* p = in + static_cast<std::size_t>(nc) * s.plane();
    Real* d = data.data() + static_cast<std::size_t>(nc) * out.plane();
    for (int y = 0; y < out_h; ++y) {
      const Tap& a = ty[y];
      for (int xx = 0; xx < out_w; ++xx) {
        const Tap& b = tx[xx];
        const Real top = p[a.i0 * s.w + b.i0] * (1 - b.frac) + p[a.i0 * s.w + b.i1] * b.frac;
        const Real bot = p[a.i1 * s.w + b.i0] * (1 - b.frac) + p[a.i1 * s.w + b.i1] * b.frac;
        d[y * out_w + xx] = top * (1 - a.frac) + bot * a.frac;
      }
    }
  }
  TensorImpl* ix = x.impl();
  return make_result(out, std::move(data), {x}, [ix, s, out, ty, tx](TensorImpl& self) {
    Real* gx = ix->grad_buffer();
    for (int nc = 0; nc < s.n * s.c; ++nc) {
      Real* p = gx + static_cast<std::size_t>(nc) * s.plane();
      const Real* d = self.grad.data() + static_cast<std::size_t>(nc) * out.plane();
      for (int y = 0; y < out.h; ++y) {
        const Tap& a = ty[y];
        for (int xx = 0; xx < out.w; ++xx) {
          const Tap& b = tx[xx];
          const Real g = d[y * out.w + xx];
          p[a.i0 * s.w + b.i0] += g * (1 - a.frac) * (1 - b.frac);
          p[a.i0 * s.w + b.i1] += g * (1 - a.frac) * b.frac;
          p[a.i1 * s.w + b.i0] += g * a.frac * (1 - b.frac);
          p[a.i1 * s.w + b.i1] += g * a.frac * b.frac;
        }
      }
    }
  });
}

namespace {

// Bilinear footprint of a clamped sampling position.
struct Footprint {
  int x0, x1, y0, y1;
  Real ax, ay;
  bool clamped_x, clamped_y;
};

Footprint border_footprint(Real px, Real py, int w, int h) {
  Footprint f{};
  f.clamped_x = px < 0 || px > w - 1;
  f.clamped_y = py < 0 || py > h - 1;
  px = std::clamp(px, Real(0), static_cast<Real>(w - 1));
  py = std::clamp(py, Real(0), static_cast<Real>(h - 1));
  f.x0 = std::min(static_cast<int>(std::floor(px)), std::max(w - 2, 0));
  f.y0 = std::min(static_cast<int>(std::floor(py)), std::max(h - 2, 0));
  f.x1 = std::min(f.x0 + 1, w - 1);
  f.y1 = std::min(f.y0 + 1, h - 1);
  f.ax = px - f.x0;
  f.ay = py - f.y0;
  return f;
}

}  // namespace

Tensor grid_sample(const Tensor& input, const Tensor& flow) {
  const Shape is = input.shape();
  const Shape fs = flow.shape();
  if (fs.c != 2 || fs.n != is.n) {
    throw ShapeError("grid_sample: flow " + fs.str() + " incompatible with input " + is.str());
  }
  const Shape os{is.n, is.c, fs.h, fs.w};
  const Real sx = is.w > 1 ? Real(0.5) * (is.w - 1) : Real(0);
  const Real sy = is.h > 1 ? Real(0.5) * (is.h - 1) : Real(0);
  std::vector<Footprint> fp(static_cast<std::size_t>(fs.n) * fs.plane());
  const Real* fl = flow.data().data();
  for (int n = 0; n < fs.n; ++n)
    for (int y = 0; y < fs.h; ++y)
      for (int x = 0; x < fs.w; ++x) {
        const Real bx = fs.w > 1 ? Real(-1) + Real(2) * x / (fs.w - 1) : Real(0);
        const Real by = fs.h > 1 ? Real(-1) + Real(2) * y / (fs.h - 1) : Real(0);
        const std::size_t p = static_cast<std::size_t>(y) * fs.w + x;
        const Real fx = fl[(static_cast<std::size_t>(n) * 2) * fs.plane() + p];
        const Real fy = fl[(static_cast<std::size_t>(n) * 2 + 1) * fs.plane() + p];
        fp[n * fs.plane() + p] =
            border_footprint((bx + fx + 1) * sx, (by + fy + 1) * sy, is.w, is.h);
      }

  std::vector<Real> out(os.numel());
  const Real* in = input.data().data();
  for (int n = 0; n < os.n; ++n)
    for (int c = 0; c < os.c; ++c) {
      const Real* plane = in + (static_cast<std::size_t>(n) * is.c + c) * is.plane();
      Real* d = out.data() + (static_cast<std::size_t>(n) * os.c + c) * os.plane();
      for (std::size_t p = 0; p < os.plane(); ++p) {
        const Footprint& f = fp[n * os.plane() + p];
        const Real top = plane[f.y0 * is.w + f.x0] * (1 - f.ax) + plane[f.y0 * is.w + f.x1] * f.ax;
        const Real bot = plane[f.y1 * is.w + f.x0] * (1 - f.ax) + plane[f.y1 * is.w + f.x1] * f.ax;
        d[p] = top * (1 - f.ay) + bot * f.ay;
      }
    }

  TensorImpl* ii = input.impl();
  TensorImpl* iflow = flow.impl();
  return make_result(
      os, std::move(out), {input, flow},
      [ii, iflow, is, os, fp = std::move(fp), sx, sy](TensorImpl& self) {
        Real* gi = wants(ii) ? ii->grad_buffer() : nullptr;
        Real* gf = wants(iflow) ? iflow->grad_buffer() : nullptr;
        for (int n = 0; n < os.n; ++n)
          for (int c = 0; c < os.c; ++c) {
            const std::size_t ibase = (static_cast<std::size_t>(n) * is.c + c) * is.plane();
            const Real* plane = ii->data.data() + ibase;
            const Real* g =
                self.grad.data() + (static_cast<std::size_t>(n) * os.c + c) * os.plane();
            for (std::size_t p = 0; p < os.plane(); ++p) {
              const Footprint& f = fp[n * os.plane() + p];
              if (gi) {
                Real* q = gi + ibase;
                q[f.y0 * is.w + f.x0] += g[p] * (1 - f.ax) * (1 - f.ay);
                q[f.y0 * is.w + f.x1] += g[p] * f.ax * (1 - f.ay);
                q[f.y1 * is.w + f.x0] += g[p] * (1 - f.ax) * f.ay;
                q[f.y1 * is.w + f.x1] += g[p] * f.ax * f.ay;
              }
              if (gf) {
                const Real v00 = plane[f.y0 * is.w + f.x0];
                const Real v01 = plane[f.y0 * is.w + f.x1];
                const Real v10 = plane[f.y1 * is.w + f.x0];
                const Real v11 = plane[f.y1 * is.w + f.x1];
                if (!f.clamped_x && f.x1 != f.x0) {
                  const Real d = (v01 - v00) * (1 - f.ay) + (v11 - v10) * f.ay;
                  gf[(static_cast<std::size_t>(n) * 2) * os.plane() + p] += g[p] * d * sx;
                }
                if (!f.clamped_y && f.y1 != f.y0) {
                  const Real d = (v10 - v00) * (1 - f.ax) + (v11 - v01) * f.ax;
                  gf[(static_cast<std::size_t>(n) * 2 + 1) * os.plane() + p] += g[p] * d * sy;
                }
              }
            }
          }
      });
}

Tensor remap_bilinear(const Tensor& input, const std::vector<Real>& coords, int out_h, int out_w) {
  const Shape is = input.shape();
  const Shape os{is.n, is.c, out_h, out_w};
  if (coords.size() != static_cast<std::size_t>(is.n) * out_h * out_w * 2) {
    throw ShapeError("remap_bilinear: coordinate map size does not match " + os.str());
  }
  struct Taps {
    int x0, y0;
    Real ax, ay;
  };
  std::vector<Taps> taps(coords.size() / 2);
  for (std::size_t i = 0; i < taps.size(); ++i) {
    const Real x = coords[2 * i];
    const Real y = coords[2 * i + 1];
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    taps[i] = {x0, y0, x - x0, y - y0};
  }
  auto fetch = [&](const Real* plane, int x, int y) {
    return (x >= 0 && x < is.w && y >= 0 && y < is.h) ? plane[y * is.w + x] : Real(0);
  };
  std::vector<Real> out(os.numel());
  for (int n = 0; n < os.n; ++n)
    for (int c = 0; c < os.c; ++c) {
      const Real* plane =
          input.data().data() + (static_cast<std::size_t>(n) * is.c + c) * is.plane();
      Real* d = out.data() + (static_cast<std::size_t>(n) * os.c + c) * os.plane();
      for (std::size_t p = 0; p < os.plane(); ++p) {
        const Taps& t = taps[n * os.plane() + p];
        d[p] =
            (fetch(plane, t.x0, t.y0) * (1 - t.ax) + fetch(plane, t.x0 + 1, t.y0) * t.ax) *
                (1 - t.ay) +
            (fetch(plane, t.x0, t.y0 + 1) * (1 - t.ax) + fetch(plane, t.x0 + 1, t.y0 + 1) * t.ax) *
                t.ay;
      }
    }
  TensorImpl* ii = input.impl();
  return make_result(
      os, std::move(out), {input}, [ii, is, os, taps = std::move(taps)](TensorImpl& self) {
        Real* gi = ii->grad_buffer();
        for (int n = 0; n < os.n; ++n)
          for (int c = 0; c < os.c; ++c) {
            Real* q = gi + (static_cast<std::size_t>(n) * is.c + c) * is.plane();
            const Real* g =
                self.grad.data() + (static_cast<std::size_t>(n) * os.c + c) * os.plane();
            auto put = [&](int x, int y, Real v) {
              if (x >= 0 && x < is.w && y >= 0 && y < is.h) q[y * is.w + x] += v;
            };
            for (std::size_t p = 0; p < os.plane(); ++p) {
              const Taps& t = taps[n * os.plane() + p];
              put(t.x0, t.y0, g[p] * (1 - t.ax) * (1 - t.ay));
              put(t.x0 + 1, t.y0, g[p] * t.ax * (1 - t.ay));
              put(t.x0, t.y0 + 1, g[p] * (1 - t.ax) * t.ay);
              put(t.x0 + 1, t.y0 + 1, g[p] * t.ax * t.ay);
            }
          }
      });
}

// ---------------------------------------------------------------------------
// Channel statistics and element-wise denormalization.

ChannelStats channel_stats(const Tensor& x, Real eps) {
  const Shape s = x.shape();
  if (x.numel() == 0) throw ShapeError("channel_stats: empty input");
  const double count = static_cast<double>(s.n) * s.plane();
  std::vector<Real> mu(s.c), sd(s.c);
  std::vector<char> clamped(s.c, 0);
  const Real* px = x.data().data();
  for (int c = 0; c < s.c; ++c) {
    double acc = 0.0;
    for (int n = 0; n < s.n; ++n) {
      const Real* p = px + (static_cast<std::size_t>(n) * s.c + c) * s.plane();
      for (std::size_t i = 0; i < s.plane(); ++i) acc += p[i];
    }
    const double m = acc / count;
    // E[x^2] - mean^2, accumulated about the mean to avoid cancellation.
    double sq = 0.0;
    for (int n = 0; n < s.n; ++n) {
      const Real* p = px + (static_cast<std::size_t>(n) * s.c + c) * s.plane();
      for (std::size_t i = 0; i < s.plane(); ++i) sq += (p[i] - m) * (p[i] - m);
    }
    const double var = sq / count;
    clamped[c] = var <= 0.0;
    mu[c] = static_cast<Real>(m);
    sd[c] = static_cast<Real>(std::sqrt(std::max(var, 0.0) + eps));
  }
  TensorImpl* ix = x.impl();
  const Shape stat_shape{1, s.c, 1, 1};
  Tensor mean_t = make_result(stat_shape, mu, {x}, [ix, s, count](TensorImpl& self) {
    Real* gx = ix->grad_buffer();
    for (int n = 0; n < s.n; ++n)
      for (int c = 0; c < s.c; ++c) {
        const Real g = static_cast<Real>(self.grad[c] / count);
        Real* q = gx + (static_cast<std::size_t>(n) * s.c + c) * s.plane();
        for (std::size_t i = 0; i < s.plane(); ++i) q[i] += g;
      }
  });
  Tensor std_t = make_result(stat_shape, sd, {x}, [ix, s, count, mu, clamped](TensorImpl& self) {
    Real* gx = ix->grad_buffer();
    const Real* px = ix->data.data();
    for (int n = 0; n < s.n; ++n)
      for (int c = 0; c < s.c; ++c) {
        if (clamped[c]) continue;
        // d std / d x_i = (x_i - mean) / (count * std)
        const Real k = static_cast<Real>(self.grad[c] / (count * self.data[c]));
        const std::size_t base = (static_cast<std::size_t>(n) * s.c + c) * s.plane();
        for (std::size_t i = 0; i < s.plane(); ++i) gx[base + i] += k * (px[base + i] - mu[c]);
      }
  });
  return {mean_t, std_t};
}

Tensor adaptive_denormalize(const Tensor& x, const ChannelStats& stats, const Tensor& gamma,
                            const Tensor& beta) {
  const Shape s = x.shape();
  for (const Tensor* t : {&gamma, &beta}) {
    const Shape& p = t->shape();
    if ((p.n != 1 && p.n != s.n) || p.c != s.c || p.h != s.h || p.w != s.w) {
      throw ShapeError("adaptive_denormalize: modulation " + p.str() + " does not match feature " +
                       s.str());
    }
  }
  if (stats.mean.numel() != static_cast<std::size_t>(s.c) ||
      stats.std.numel() != static_cast<std::size_t>(s.c)) {
    throw ShapeError("adaptive_denormalize: statistics do not match " + s.str());
  }
  const std::size_t chw = static_cast<std::size_t>(s.c) * s.plane();
  const bool batched_g = gamma.shape().n != 1;
  const bool batched_b = beta.shape().n != 1;
  std::vector<Real> out(s.numel());
  const Real* px = x.data().data();
  const Real* pg = gamma.data().data();
  const Real* pb = beta.data().data();
  const Real* pm = stats.mean.data().data();
  const Real* ps = stats.std.data().data();
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < s.c; ++c) {
      const Real inv = Real(1) / ps[c];
      for (std::size_t i = 0; i < s.plane(); ++i) {
        const std::size_t e = c * s.plane() + i;
        const std::size_t o = n * chw + e;
        out[o] = pg[(batched_g ? n * chw : 0) + e] * (px[o] - pm[c]) * inv +
                 pb[(batched_b ? n * chw : 0) + e];
      }
    }
  TensorImpl* ix = x.impl();
  TensorImpl* im = stats.mean.impl();
  TensorImpl* is = stats.std.impl();
  TensorImpl* ig = gamma.impl();
  TensorImpl* ib = beta.impl();
  return make_result(s, std::move(out), {x, stats.mean, stats.std, gamma, beta},
                     [ix, im, is, ig, ib, s, chw, batched_g, batched_b](TensorImpl& self) {
                       Real* gx = wants(ix) ? ix->grad_buffer() : nullptr;
                       Real* gm = wants(im) ? im->grad_buffer() : nullptr;
                       Real* gs = wants(is) ? is->grad_buffer() : nullptr;
                       Real* gg = wants(ig) ? ig->grad_buffer() : nullptr;
                       Real* gb = wants(ib) ? ib->grad_buffer() : nullptr;
                       const Real* px = ix->data.data();
                       const Real* pg = ig->data.data();
                       const Real* pm = im->data.data();
                       const Real* ps = is->data.data();
                       for (int n = 0; n < s.n; ++n)
                         for (int c = 0; c < s.c; ++c) {
                           const Real inv = Real(1) / ps[c];
                           double dmean = 0.0, dstd = 0.0;
                           for (std::size_t i = 0; i < s.plane(); ++i) {
                             const std::size_t e = c * s.plane() + i;
                             const std::size_t o = n * chw + e;
                             const Real g = self.grad[o];
                             const std::size_t ge = (batched_g ? n * chw : 0) + e;
                             const Real gam = pg[ge];
                             const Real centered = px[o] - pm[c];
                             if (gx) gx[o] += g * gam * inv;
                             if (gg) gg[ge] += g * centered * inv;
                             if (gb) gb[(batched_b ? n * chw : 0) + e] += g;
                             dmean -= g * gam * inv;
                             dstd -= g * gam * centered * inv * inv;
                           }
                           if (gm) gm[c] += static_cast<Real>(dmean);
                           if (gs) gs[c] += static_cast<Real>(dstd);
                         }
                     });
}

REENACT_NS_END
