#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "partrep/core/rng.hpp"
#include "partrep/core/tensor.hpp"
#include "partrep/kern/kernels.hpp"

// Layers with explicit forward/backward. Activations needed by backward
// live in per-call Cache objects rather than inside the layer, so one
// parameter set can run several forward passes (anchor + positive, two
// views) before the backward sweep. backward() accumulates into grads.

namespace partrep::nn {

template <class T>
struct ParamRef {
  std::string name;
  Tensor<T>* value;
  Tensor<T>* grad;
};

template <class T>
struct ParamRefs {
  std::vector<ParamRef<T>> items;
  void add(const std::string& name, Tensor<T>& value, Tensor<T>& grad) {
    items.push_back({name, &value, &grad});
  }
};

template <class T>
struct Param {
  Tensor<T> value;
  Tensor<T> grad;
  void init_shape(std::vector<int64_t> shape) {
    value = Tensor<T>(shape);
    grad = Tensor<T>(shape);
  }
};

struct ConvGeom {
  int c, h, w;       // source plane
  int k, s, p;       // kernel, stride, pad
  int oh, ow;        // kernel positions

  static ConvGeom make(int c, int h, int w, int k, int s, int p) {
    ConvGeom g{c, h, w, k, s, p, 0, 0};
    g.oh = (h + 2 * p - k) / s + 1;
    g.ow = (w + 2 * p - k) / s + 1;
    return g;
  }
  int64_t rows() const { return static_cast<int64_t>(c) * k * k; }
  int64_t cols() const { return static_cast<int64_t>(oh) * ow; }
};

// col is [c*k*k, B*oh*ow]; image b occupies the column block [b*S, (b+1)*S).
template <class T>
void im2col_batch(const T* x, T* col, const ConvGeom& g, int batch) {
  int64_t plane = static_cast<int64_t>(g.h) * g.w;
  int64_t s_img = g.cols();
  int64_t s_all = s_img * batch;
  for (int b = 0; b < batch; ++b) {
    const T* xb = x + static_cast<int64_t>(b) * g.c * plane;
    for (int c = 0; c < g.c; ++c) {
      const T* xc = xb + c * plane;
      for (int ki = 0; ki < g.k; ++ki) {
        for (int kj = 0; kj < g.k; ++kj) {
          T* row = col + ((static_cast<int64_t>(c) * g.k + ki) * g.k + kj) * s_all +
                   static_cast<int64_t>(b) * s_img;
          for (int oy = 0; oy < g.oh; ++oy) {
            int iy = oy * g.s - g.p + ki;
            T* dst = row + static_cast<int64_t>(oy) * g.ow;
            if (iy < 0 || iy >= g.h) {
              for (int ox = 0; ox < g.ow; ++ox) dst[ox] = T(0);
              continue;
            }
            const T* src = xc + static_cast<int64_t>(iy) * g.w;
            for (int ox = 0; ox < g.ow; ++ox) {
              int ix = ox * g.s - g.p + kj;
              dst[ox] = (ix >= 0 && ix < g.w) ? src[ix] : T(0);
            }
          }
        }
      }
    }
  }
}

// Transpose of im2col: scatter-add column entries back into the image.
template <class T>
void col2im_add_batch(const T* col, T* x, const ConvGeom& g, int batch) {
  int64_t plane = static_cast<int64_t>(g.h) * g.w;
  int64_t s_img = g.cols();
  int64_t s_all = s_img * batch;
  for (int b = 0; b < batch; ++b) {
    T* xb = x + static_cast<int64_t>(b) * g.c * plane;
    for (int c = 0; c < g.c; ++c) {
      T* xc = xb + c * plane;
      for (int ki = 0; ki < g.k; ++ki) {
        for (int kj = 0; kj < g.k; ++kj) {
          const T* row = col + ((static_cast<int64_t>(c) * g.k + ki) * g.k + kj) * s_all +
                         static_cast<int64_t>(b) * s_img;
          for (int oy = 0; oy < g.oh; ++oy) {
            int iy = oy * g.s - g.p + ki;
            if (iy < 0 || iy >= g.h) continue;
            T* dst = xc + static_cast<int64_t>(iy) * g.w;
            const T* src = row + static_cast<int64_t>(oy) * g.ow;
            for (int ox = 0; ox < g.ow; ++ox) {
              int ix = ox * g.s - g.p + kj;
              if (ix >= 0 && ix < g.w) dst[ix] += src[ox];
            }
          }
        }
      }
    }
  }
}

template <class T>
class Conv2d {
public:
  Conv2d() = default;
  Conv2d(std::string name, int in_ch, int out_ch, int kernel, int stride, int pad)
      : name_(std::move(name)), in_ch_(in_ch), out_ch_(out_ch), k_(kernel), s_(stride), p_(pad) {
    weight_.init_shape({out_ch, static_cast<int64_t>(in_ch) * kernel * kernel});
    bias_.init_shape({out_ch});
  }

  void init(Rng& rng) {
    T std = std::sqrt(T(2) / static_cast<T>(in_ch_ * k_ * k_));
    for (auto& v : weight_.value.vec()) v = static_cast<T>(rng.normal()) * std;
    bias_.value.zero();
  }

  struct Cache {
    Tensor<T> col;  // [in_ch*k*k, B*oh*ow]
    ConvGeom geom{};
    int batch = 0;
  };

  Tensor<T> forward(const Tensor<T>& x, Cache& cache) const {
    const auto& sh = x.shape();
    if (sh.size() != 4 || sh[1] != in_ch_)
      throw std::invalid_argument(name_ + ": bad input shape " + shape_str(sh));
    int batch = static_cast<int>(sh[0]);
    ConvGeom g = ConvGeom::make(in_ch_, static_cast<int>(sh[2]), static_cast<int>(sh[3]), k_, s_, p_);
    cache.geom = g;
    cache.batch = batch;
    int64_t s_img = g.cols(), s_all = s_img * batch;
    cache.col = Tensor<T>({g.rows(), s_all});
    im2col_batch(x.data(), cache.col.data(), g, batch);

    Tensor<T> packed({out_ch_, s_all});
    kern::gemm_nn(weight_.value.data(), cache.col.data(), packed.data(),
                  out_ch_, s_all, g.rows(), false);

    Tensor<T> y({batch, out_ch_, g.oh, g.ow});
    for (int b = 0; b < batch; ++b) {
      for (int oc = 0; oc < out_ch_; ++oc) {
        const T* src = packed.data() + oc * s_all + static_cast<int64_t>(b) * s_img;
        T* dst = y.data() + (static_cast<int64_t>(b) * out_ch_ + oc) * s_img;
        T bv = bias_.value[oc];
        for (int64_t i = 0; i < s_img; ++i) dst[i] = src[i] + bv;
      }
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy, const Cache& cache) {
    const ConvGeom& g = cache.geom;
    int batch = cache.batch;
    int64_t s_img = g.cols(), s_all = s_img * batch;

    Tensor<T> packed({out_ch_, s_all});
    for (int b = 0; b < batch; ++b) {
      for (int oc = 0; oc < out_ch_; ++oc) {
        const T* src = dy.data() + (static_cast<int64_t>(b) * out_ch_ + oc) * s_img;
        T* dst = packed.data() + oc * s_all + static_cast<int64_t>(b) * s_img;
        std::copy(src, src + s_img, dst);
      }
    }
    for (int oc = 0; oc < out_ch_; ++oc)
      bias_.grad[oc] += kern::sum(packed.data() + oc * s_all, s_all);

    kern::gemm_nt(packed.data(), cache.col.data(), weight_.grad.data(),
                  out_ch_, g.rows(), s_all, true);

    Tensor<T> dcol({g.rows(), s_all});
    kern::gemm_tn(weight_.value.data(), packed.data(), dcol.data(),
                  g.rows(), s_all, out_ch_, false);

    Tensor<T> dx({batch, in_ch_, g.h, g.w});
    col2im_add_batch(dcol.data(), dx.data(), g, batch);
    return dx;
  }

  void collect(ParamRefs<T>& out) {
    out.add(name_ + ".weight", weight_.value, weight_.grad);
    out.add(name_ + ".bias", bias_.value, bias_.grad);
  }

  int out_channels() const { return out_ch_; }

private:
  std::string name_;
  int in_ch_ = 0, out_ch_ = 0, k_ = 0, s_ = 0, p_ = 0;
  Param<T> weight_, bias_;
};

template <class T>
class ConvTranspose2d {
public:
  ConvTranspose2d() = default;
  ConvTranspose2d(std::string name, int in_ch, int out_ch, int kernel, int stride, int pad,
                  int out_pad)
      : name_(std::move(name)), in_ch_(in_ch), out_ch_(out_ch), k_(kernel), s_(stride), p_(pad),
        op_(out_pad) {
    weight_.init_shape({in_ch, static_cast<int64_t>(out_ch) * kernel * kernel});
    bias_.init_shape({out_ch});
  }

  void init(Rng& rng) {
    T std = std::sqrt(T(2) / static_cast<T>(in_ch_ * k_ * k_));
    for (auto& v : weight_.value.vec()) v = static_cast<T>(rng.normal()) * std;
    bias_.value.zero();
  }

  struct Cache {
    Tensor<T> packed;  // input gathered to [in_ch, B*h*w]
    ConvGeom geom{};   // geometry over the *output* plane
    int batch = 0;
    int h = 0, w = 0;
  };

  Tensor<T> forward(const Tensor<T>& x, Cache& cache) const {
    const auto& sh = x.shape();
    if (sh.size() != 4 || sh[1] != in_ch_)
      throw std::invalid_argument(name_ + ": bad input shape " + shape_str(sh));
    int batch = static_cast<int>(sh[0]);
    int h = static_cast<int>(sh[2]), w = static_cast<int>(sh[3]);
    int oh = (h - 1) * s_ - 2 * p_ + k_ + op_;
    int ow = (w - 1) * s_ - 2 * p_ + k_ + op_;
    ConvGeom g = ConvGeom::make(out_ch_, oh, ow, k_, s_, p_);
    if (g.oh != h || g.ow != w)
      throw std::invalid_argument(name_ + ": inconsistent transpose geometry");
    cache.geom = g;
    cache.batch = batch;
    cache.h = h;
    cache.w = w;

    int64_t s_img = static_cast<int64_t>(h) * w;
    int64_t s_all = s_img * batch;
    cache.packed = Tensor<T>({in_ch_, s_all});
    for (int b = 0; b < batch; ++b)
      for (int ic = 0; ic < in_ch_; ++ic)
        std::copy(x.data() + (static_cast<int64_t>(b) * in_ch_ + ic) * s_img,
                  x.data() + (static_cast<int64_t>(b) * in_ch_ + ic + 1) * s_img,
                  cache.packed.data() + ic * s_all + static_cast<int64_t>(b) * s_img);

    Tensor<T> col({g.rows(), s_all});
    kern::gemm_tn(weight_.value.data(), cache.packed.data(), col.data(),
                  g.rows(), s_all, in_ch_, false);

    Tensor<T> y({batch, out_ch_, oh, ow});
    col2im_add_batch(col.data(), y.data(), g, batch);
    int64_t o_img = static_cast<int64_t>(oh) * ow;
    for (int b = 0; b < batch; ++b)
      for (int oc = 0; oc < out_ch_; ++oc) {
        T* dst = y.data() + (static_cast<int64_t>(b) * out_ch_ + oc) * o_img;
        T bv = bias_.value[oc];
        for (int64_t i = 0; i < o_img; ++i) dst[i] += bv;
      }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy, const Cache& cache) {
    const ConvGeom& g = cache.geom;
    int batch = cache.batch;
    int64_t s_img = static_cast<int64_t>(cache.h) * cache.w;
    int64_t s_all = s_img * batch;
    int64_t o_img = static_cast<int64_t>(g.h) * g.w;

    for (int oc = 0; oc < out_ch_; ++oc) {
      T acc = 0;
      for (int b = 0; b < batch; ++b)
        acc += kern::sum(dy.data() + (static_cast<int64_t>(b) * out_ch_ + oc) * o_img, o_img);
      bias_.grad[oc] += acc;
    }

    Tensor<T> dcol({g.rows(), s_all});
    im2col_batch(dy.data(), dcol.data(), g, batch);

    // dW[in_ch, oc*k*k] += packed . dcol^T
    kern::gemm_nt(cache.packed.data(), dcol.data(), weight_.grad.data(),
                  in_ch_, g.rows(), s_all, true);

    Tensor<T> dpacked({in_ch_, s_all});
    kern::gemm_nn(weight_.value.data(), dcol.data(), dpacked.data(),
                  in_ch_, s_all, g.rows(), false);

    Tensor<T> dx({batch, in_ch_, cache.h, cache.w});
    for (int b = 0; b < batch; ++b)
      for (int ic = 0; ic < in_ch_; ++ic)
        std::copy(dpacked.data() + ic * s_all + static_cast<int64_t>(b) * s_img,
                  dpacked.data() + ic * s_all + static_cast<int64_t>(b + 1) * s_img,
                  dx.data() + (static_cast<int64_t>(b) * in_ch_ + ic) * s_img);
    return dx;
  }

  void collect(ParamRefs<T>& out) {
    out.add(name_ + ".weight", weight_.value, weight_.grad);
    out.add(name_ + ".bias", bias_.value, bias_.grad);
  }

private:
  std::string name_;
  int in_ch_ = 0, out_ch_ = 0, k_ = 0, s_ = 0, p_ = 0, op_ = 0;
  Param<T> weight_, bias_;
};

template <class T>
class Linear {
public:
  Linear() = default;
  Linear(std::string name, int in_dim, int out_dim)
      : name_(std::move(name)), in_(in_dim), out_(out_dim) {
    weight_.init_shape({out_dim, in_dim});
    bias_.init_shape({out_dim});
  }

  void init(Rng& rng, T gain = T(2)) {
    T std = std::sqrt(gain / static_cast<T>(in_));
    for (auto& v : weight_.value.vec()) v = static_cast<T>(rng.normal()) * std;
    bias_.value.zero();
  }

  struct Cache {
    Tensor<T> x;
  };

  Tensor<T> forward(const Tensor<T>& x, Cache& cache) const {
    const auto& sh = x.shape();
    if (sh.size() != 2 || sh[1] != in_)
      throw std::invalid_argument(name_ + ": bad input shape " + shape_str(sh));
    int64_t batch = sh[0];
    cache.x = x;
    Tensor<T> y({batch, out_});
    kern::gemm_nt(x.data(), weight_.value.data(), y.data(), batch, out_, in_, false);
    for (int64_t b = 0; b < batch; ++b)
      kern::add(y.data() + b * out_, bias_.value.data(), y.data() + b * out_, out_);
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy, const Cache& cache) {
    int64_t batch = dy.dim(0);
    kern::gemm_tn(dy.data(), cache.x.data(), weight_.grad.data(), out_, in_, batch, true);
    for (int64_t b = 0; b < batch; ++b)
      kern::add(bias_.grad.data(), dy.data() + b * out_, bias_.grad.data(), out_);
    Tensor<T> dx({batch, in_});
    kern::gemm_nn(dy.data(), weight_.value.data(), dx.data(), batch, in_, out_, false);
    return dx;
  }

  void collect(ParamRefs<T>& out) {
    out.add(name_ + ".weight", weight_.value, weight_.grad);
    out.add(name_ + ".bias", bias_.value, bias_.grad);
  }

private:
  std::string name_;
  int in_ = 0, out_ = 0;
  Param<T> weight_, bias_;
};

template <class T>
struct ReluCache {
  Tensor<T> x;
};

template <class T>
Tensor<T> relu_forward(const Tensor<T>& x, ReluCache<T>& cache) {
  cache.x = x;
  Tensor<T> y(x.shape());
  kern::relu_fwd(x.data(), y.data(), x.numel());
  return y;
}

template <class T>
Tensor<T> relu_backward(const Tensor<T>& dy, const ReluCache<T>& cache) {
  Tensor<T> dx(dy.shape());
  kern::relu_bwd(cache.x.data(), dy.data(), dx.data(), dy.numel());
  return dx;
}

/// Batch normalization over rows of [N, C] (1d) or per channel of
/// [B, C, H, W] (2d; N = B*H*W). Training mode normalizes with batch
/// statistics; eval mode uses the running estimates.
template <class T>
class BatchNorm {
public:
  BatchNorm() = default;
  BatchNorm(std::string name, int channels, T momentum = T(0.1), T eps = T(1e-5))
      : name_(std::move(name)), ch_(channels), momentum_(momentum), eps_(eps) {
    gamma_.init_shape({channels});
    beta_.init_shape({channels});
    running_mean_ = Tensor<T>({channels});
    running_var_ = Tensor<T>::full({channels}, T(1));
    for (auto& v : gamma_.value.vec()) v = T(1);
  }

  struct Cache {
    Tensor<T> xhat;
    Tensor<T> invstd;  // [C]
    std::vector<int64_t> shape;
  };

  Tensor<T> forward(const Tensor<T>& x, Cache& cache, bool training) {
    auto [batch, spatial] = dims(x);
    Tensor<T> y(x.shape());
    cache.shape = x.shape();
    cache.xhat = Tensor<T>(x.shape());
    cache.invstd = Tensor<T>({ch_});
    int64_t n = batch * spatial;
    for (int c = 0; c < ch_; ++c) {
      T mean, var;
      if (training) {
        T s = 0, s2 = 0;
        for_channel(x, c, [&](const T* p, int64_t len) {
          s += kern::sum(p, len);
          s2 += kern::sumsq(p, len);
        });
        mean = s / static_cast<T>(n);
        var = s2 / static_cast<T>(n) - mean * mean;
        if (var < T(0)) var = T(0);
        T unbiased = n > 1 ? var * static_cast<T>(n) / static_cast<T>(n - 1) : var;
        running_mean_[c] = (T(1) - momentum_) * running_mean_[c] + momentum_ * mean;
        running_var_[c] = (T(1) - momentum_) * running_var_[c] + momentum_ * unbiased;
      } else {
        mean = running_mean_[c];
        var = running_var_[c];
      }
      T invstd = T(1) / std::sqrt(var + eps_);
      cache.invstd[c] = invstd;
      T g = gamma_.value[c], b = beta_.value[c];
      transform_channel(x, y, cache.xhat, c, [&](T v, T& out, T& xh) {
        xh = (v - mean) * invstd;
        out = g * xh + b;
      });
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy, const Cache& cache) {
    Tensor<T> dx(cache.shape);
    auto [batch, spatial] = dims(dy);
    int64_t n = batch * spatial;
    for (int c = 0; c < ch_; ++c) {
      T sum_dy = 0, sum_dy_xhat = 0;
      for_channel_pair(dy, cache.xhat, c, [&](const T* pdy, const T* pxh, int64_t len) {
        sum_dy += kern::sum(pdy, len);
        sum_dy_xhat += kern::dot(pdy, pxh, len);
      });
      gamma_.grad[c] += sum_dy_xhat;
      beta_.grad[c] += sum_dy;
      T g = gamma_.value[c] * cache.invstd[c];
      T mean_dy = sum_dy / static_cast<T>(n);
      T mean_dy_xhat = sum_dy_xhat / static_cast<T>(n);
      transform_channel_bwd(dy, cache.xhat, dx, c, [&](T vdy, T xh, T& out) {
        out = g * (vdy - mean_dy - xh * mean_dy_xhat);
      });
    }
    return dx;
  }

  void collect(ParamRefs<T>& out) {
    out.add(name_ + ".gamma", gamma_.value, gamma_.grad);
    out.add(name_ + ".beta", beta_.value, beta_.grad);
  }

  /// Running statistics are state, not gradient-trained parameters.
  void collect_buffers(std::vector<ParamRef<T>>& out) {
    out.push_back({name_ + ".running_mean", &running_mean_, nullptr});
    out.push_back({name_ + ".running_var", &running_var_, nullptr});
  }

private:
  std::pair<int64_t, int64_t> dims(const Tensor<T>& x) const {
    const auto& sh = x.shape();
    if (sh.size() == 2) {
      if (sh[1] != ch_) throw std::invalid_argument(name_ + ": channel mismatch");
      return {sh[0], 1};
    }
    if (sh.size() == 4) {
      if (sh[1] != ch_) throw std::invalid_argument(name_ + ": channel mismatch");
      return {sh[0], sh[2] * sh[3]};
    }
    throw std::invalid_argument(name_ + ": expected 2d or 4d input");
  }

  template <class Fn>
  void for_channel(const Tensor<T>& x, int c, Fn fn) const {
    auto [batch, spatial] = dims(x);
    for (int64_t b = 0; b < batch; ++b)
      fn(x.data() + (b * ch_ + c) * spatial, spatial);
  }

  template <class Fn>
  void for_channel_pair(const Tensor<T>& a, const Tensor<T>& b2, int c, Fn fn) const {
    auto [batch, spatial] = dims(a);
    for (int64_t b = 0; b < batch; ++b)
      fn(a.data() + (b * ch_ + c) * spatial, b2.data() + (b * ch_ + c) * spatial, spatial);
  }

  template <class Fn>
  void transform_channel(const Tensor<T>& x, Tensor<T>& y, Tensor<T>& xhat, int c, Fn fn) const {
    auto [batch, spatial] = dims(x);
    for (int64_t b = 0; b < batch; ++b) {
      int64_t off = (b * ch_ + c) * spatial;
      for (int64_t i = 0; i < spatial; ++i) fn(x[off + i], y[off + i], xhat[off + i]);
    }
  }

  template <class Fn>
  void transform_channel_bwd(const Tensor<T>& dy, const Tensor<T>& xhat, Tensor<T>& dx, int c,
                             Fn fn) const {
    auto [batch, spatial] = dims(dy);
    for (int64_t b = 0; b < batch; ++b) {
      int64_t off = (b * ch_ + c) * spatial;
      for (int64_t i = 0; i < spatial; ++i) fn(dy[off + i], xhat[off + i], dx[off + i]);
    }
  }

  std::string name_;
  int ch_ = 0;
  T momentum_ = T(0.1), eps_ = T(1e-5);
  Param<T> gamma_, beta_;
  Tensor<T> running_mean_, running_var_;
};

template <class T>
Tensor<T> global_avg_pool(const Tensor<T>& x) {
  const auto& sh = x.shape();
  if (sh.size() != 4) throw std::invalid_argument("global_avg_pool: expected 4d input");
  int64_t batch = sh[0], ch = sh[1], spatial = sh[2] * sh[3];
  Tensor<T> y({batch, ch});
  for (int64_t b = 0; b < batch; ++b)
    for (int64_t c = 0; c < ch; ++c)
      y[b * ch + c] = kern::sum(x.data() + (b * ch + c) * spatial, spatial) / static_cast<T>(spatial);
  return y;
}

template <class T>
Tensor<T> global_avg_pool_backward(const Tensor<T>& dy, const std::vector<int64_t>& in_shape) {
  int64_t batch = in_shape[0], ch = in_shape[1], spatial = in_shape[2] * in_shape[3];
  Tensor<T> dx(in_shape);
  for (int64_t b = 0; b < batch; ++b)
    for (int64_t c = 0; c < ch; ++c) {
      T v = dy[b * ch + c] / static_cast<T>(spatial);
      T* dst = dx.data() + (b * ch + c) * spatial;
      for (int64_t i = 0; i < spatial; ++i) dst[i] = v;
    }
  return dx;
}

}  // namespace partrep::nn
