#pragma once

#include <string>
#include <vector>

#include "partrep/core/rng.hpp"
#include "partrep/nn/layers.hpp"
#include "partrep/prcore/pr_loss.hpp"

namespace partrep::byol {

/// Dual-network spec. The desk-scale default is a reduced residual
/// backbone (stride-1 stem, one block per stage) for 32 px inputs with a
/// 64-wide representation split 48/16; the paper-scale preset (resnet18,
/// 256 split 192/64) is expressible through the same fields.
struct ByolSpec {
  int image_size = 32;
  int in_channels = 3;
  int stem_channels = 16;
  std::vector<int> stage_channels = {16, 32, 64};
  int blocks_per_stage = 1;
  int repr_width = 64;
  int content_dim = 48;
  int style_dim = 16;
  double alpha = 1.0;
  int hidden_mult = 4;  // projector/predictor hidden = mult * repr_width

  PartitionSpec partition() const { return {content_dim, style_dim, alpha}; }

  void validate() const {
    if (repr_width != content_dim + style_dim)
      throw std::invalid_argument("ByolSpec: repr_width != content_dim + style_dim");
    if (stage_channels.empty() || blocks_per_stage < 1)
      throw std::invalid_argument("ByolSpec: bad stage configuration");
  }
};

template <class T>
class BasicBlock {
public:
  BasicBlock() = default;
  BasicBlock(const std::string& name, int in_ch, int out_ch, int stride)
      : conv1_(name + ".conv1", in_ch, out_ch, 3, stride, 1),
        conv2_(name + ".conv2", out_ch, out_ch, 3, 1, 1),
        bn1_(name + ".bn1", out_ch),
        bn2_(name + ".bn2", out_ch),
        has_proj_(stride != 1 || in_ch != out_ch) {
    if (has_proj_) {
      proj_ = nn::Conv2d<T>(name + ".proj", in_ch, out_ch, 1, stride, 0);
      proj_bn_ = nn::BatchNorm<T>(name + ".proj_bn", out_ch);
    }
  }

  void init(Rng& rng) {
    conv1_.init(rng);
    conv2_.init(rng);
    if (has_proj_) proj_.init(rng);
  }

  struct Cache {
    typename nn::Conv2d<T>::Cache c1, c2, cp;
    typename nn::BatchNorm<T>::Cache b1, b2, bp;
    nn::ReluCache<T> r1, r2;
  };

  Tensor<T> forward(const Tensor<T>& x, Cache& cache, bool training) {
    Tensor<T> h = conv1_.forward(x, cache.c1);
    h = bn1_.forward(h, cache.b1, training);
    h = nn::relu_forward(h, cache.r1);
    h = conv2_.forward(h, cache.c2);
    h = bn2_.forward(h, cache.b2, training);
    Tensor<T> skip = x;
    if (has_proj_) {
      skip = proj_.forward(x, cache.cp);
      skip = proj_bn_.forward(skip, cache.bp, training);
    }
    kern::add(h.data(), skip.data(), h.data(), h.numel());
    return nn::relu_forward(h, cache.r2);
  }

  Tensor<T> backward(const Tensor<T>& dy, const Cache& cache) {
    Tensor<T> d = nn::relu_backward(dy, cache.r2);
    Tensor<T> dmain = bn2_.backward(d, cache.b2);
    dmain = conv2_.backward(dmain, cache.c2);
    dmain = nn::relu_backward(dmain, cache.r1);
    dmain = bn1_.backward(dmain, cache.b1);
    Tensor<T> dx = conv1_.backward(dmain, cache.c1);
    if (has_proj_) {
      Tensor<T> dskip = proj_bn_.backward(d, cache.bp);
      dskip = proj_.backward(dskip, cache.cp);
      kern::add(dx.data(), dskip.data(), dx.data(), dx.numel());
    } else {
      kern::add(dx.data(), d.data(), dx.data(), dx.numel());
    }
    return dx;
  }

  void collect(nn::ParamRefs<T>& out) {
    conv1_.collect(out);
    bn1_.collect(out);
    conv2_.collect(out);
    bn2_.collect(out);
    if (has_proj_) {
      proj_.collect(out);
      proj_bn_.collect(out);
    }
  }

  void collect_buffers(std::vector<nn::ParamRef<T>>& out) {
    bn1_.collect_buffers(out);
    bn2_.collect_buffers(out);
    if (has_proj_) proj_bn_.collect_buffers(out);
  }

private:
  nn::Conv2d<T> conv1_, conv2_;
  nn::BatchNorm<T> bn1_, bn2_;
  bool has_proj_ = false;
  nn::Conv2d<T> proj_;
  nn::BatchNorm<T> proj_bn_;
};

/// Two-layer MLP with batch norm on the hidden layer; the shape both the
/// projector and the predictor use.
template <class T>
class MlpHead {
public:
  MlpHead() = default;
  MlpHead(const std::string& name, int in_dim, int hidden, int out_dim)
      : fc1_(name + ".fc1", in_dim, hidden),
        bn_(name + ".bn", hidden),
        fc2_(name + ".fc2", hidden, out_dim) {}

  void init(Rng& rng) {
    fc1_.init(rng);
    fc2_.init(rng, T(1));
  }

  struct Cache {
    typename nn::Linear<T>::Cache f1, f2;
    typename nn::BatchNorm<T>::Cache b;
    nn::ReluCache<T> r;
  };

  Tensor<T> forward(const Tensor<T>& x, Cache& cache, bool training) {
    Tensor<T> h = fc1_.forward(x, cache.f1);
    h = bn_.forward(h, cache.b, training);
    h = nn::relu_forward(h, cache.r);
    return fc2_.forward(h, cache.f2);
  }

  Tensor<T> backward(const Tensor<T>& dy, const Cache& cache) {
    Tensor<T> d = fc2_.backward(dy, cache.f2);
    d = nn::relu_backward(d, cache.r);
    d = bn_.backward(d, cache.b);
    return fc1_.backward(d, cache.f1);
  }

  void collect(nn::ParamRefs<T>& out) {
    fc1_.collect(out);
    bn_.collect(out);
    fc2_.collect(out);
  }
  void collect_buffers(std::vector<nn::ParamRef<T>>& out) { bn_.collect_buffers(out); }

private:
  nn::Linear<T> fc1_;
  nn::BatchNorm<T> bn_;
  nn::Linear<T> fc2_;
};

/// Backbone + projector: the shared trunk of both networks. The target is
/// a second instance whose state is an EMA shadow of the online one.
template <class T>
class ByolEncoder {
public:
  ByolEncoder() = default;

  explicit ByolEncoder(const ByolSpec& spec, const std::string& prefix) : spec_(spec) {
    spec.validate();
    stem_ = nn::Conv2d<T>(prefix + ".stem", spec.in_channels, spec.stem_channels, 3, 1, 1);
    stem_bn_ = nn::BatchNorm<T>(prefix + ".stem_bn", spec.stem_channels);
    int in_ch = spec.stem_channels;
    for (size_t s = 0; s < spec.stage_channels.size(); ++s) {
      for (int b = 0; b < spec.blocks_per_stage; ++b) {
        int stride = (s > 0 && b == 0) ? 2 : 1;
        blocks_.emplace_back(prefix + ".s" + std::to_string(s) + "b" + std::to_string(b), in_ch,
                             spec.stage_channels[s], stride);
        in_ch = spec.stage_channels[s];
      }
    }
    feat_dim_ = in_ch;
    projector_ = MlpHead<T>(prefix + ".proj", feat_dim_, spec.hidden_mult * spec.repr_width,
                            spec.repr_width);
  }

  void init(Rng& rng) {
    stem_.init(rng);
    for (auto& b : blocks_) b.init(rng);
    projector_.init(rng);
  }

  struct Cache {
    typename nn::Conv2d<T>::Cache stem;
    typename nn::BatchNorm<T>::Cache stem_bn;
    nn::ReluCache<T> stem_relu;
    std::vector<typename BasicBlock<T>::Cache> blocks;
    std::vector<int64_t> pool_in_shape;
    typename MlpHead<T>::Cache proj;
  };

  /// Backbone feature (pre-projector), the linear-evaluation input.
  Tensor<T> features(const Tensor<T>& x, Cache& cache, bool training) {
    Tensor<T> h = stem_.forward(x, cache.stem);
    h = stem_bn_.forward(h, cache.stem_bn, training);
    h = nn::relu_forward(h, cache.stem_relu);
    cache.blocks.resize(blocks_.size());
    for (size_t i = 0; i < blocks_.size(); ++i) h = blocks_[i].forward(h, cache.blocks[i], training);
    cache.pool_in_shape = h.shape();
    return nn::global_avg_pool(h);
  }

  /// Full projection path.
  Tensor<T> project(const Tensor<T>& x, Cache& cache, bool training) {
    Tensor<T> f = features(x, cache, training);
    return projector_.forward(f, cache.proj, training);
  }

  void backward(const Tensor<T>& dproj, const Cache& cache) {
    Tensor<T> d = projector_.backward(dproj, cache.proj);
    d = nn::global_avg_pool_backward(d, cache.pool_in_shape);
    for (size_t i = blocks_.size(); i-- > 0;) d = blocks_[i].backward(d, cache.blocks[i]);
    d = nn::relu_backward(d, cache.stem_relu);
    d = stem_bn_.backward(d, cache.stem_bn);
    stem_.backward(d, cache.stem);
  }

  void collect(nn::ParamRefs<T>& out) {
    stem_.collect(out);
    stem_bn_.collect(out);
    for (auto& b : blocks_) b.collect(out);
    projector_.collect(out);
  }
  void collect_buffers(std::vector<nn::ParamRef<T>>& out) {
    stem_bn_.collect_buffers(out);
    for (auto& b : blocks_) b.collect_buffers(out);
    projector_.collect_buffers(out);
  }

  int feature_dim() const { return feat_dim_; }
  const ByolSpec& spec() const { return spec_; }

private:
  ByolSpec spec_;
  nn::Conv2d<T> stem_;
  nn::BatchNorm<T> stem_bn_;
  std::vector<BasicBlock<T>> blocks_;
  MlpHead<T> projector_;
  int feat_dim_ = 0;
};

/// theta_t <- tau * theta_t + (1 - tau) * theta_o over every matched
/// state tensor (parameters and batch-norm running statistics).
template <class T>
void ema_update(std::vector<nn::ParamRef<T>>& target_state,
                std::vector<nn::ParamRef<T>>& online_state, T tau) {
  if (target_state.size() != online_state.size())
    throw std::invalid_argument("ema_update: state list size mismatch");
  for (size_t i = 0; i < target_state.size(); ++i) {
    Tensor<T>& t = *target_state[i].value;
    const Tensor<T>& o = *online_state[i].value;
    if (t.shape() != o.shape())
      throw std::invalid_argument("ema_update: shape mismatch at " + target_state[i].name);
    for (int64_t j = 0; j < t.numel(); ++j) t[j] = tau * t[j] + (T(1) - tau) * o[j];
  }
}

/// Full state (trainable params + buffers) as a flat ref list, for EMA
/// and checkpointing.
template <class T>
std::vector<nn::ParamRef<T>> full_state(ByolEncoder<T>& enc) {
  nn::ParamRefs<T> params;
  enc.collect(params);
  std::vector<nn::ParamRef<T>> out = params.items;
  enc.collect_buffers(out);
  return out;
}

}  // namespace partrep::byol
