#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "partrep/core/rng.hpp"
#include "partrep/core/tensor.hpp"
#include "partrep/nn/layers.hpp"
#include "partrep/prcore/pr_loss.hpp"

namespace partrep::vae {

/// Convolutional VAE with a partitioned mean vector. Encoder: stride-2
/// conv stack, ReLU between layers, then affine heads for mu and logvar.
/// Decoder mirrors the encoder with transposed convs and emits logits;
/// the reconstruction is their sigmoid.
struct ConvVaeSpec {
  int in_channels = 3;
  int image_size = 28;
  std::vector<int> channels = {32, 64, 128};
  int latent_dim = 10;
  int content_dim = 7;
  int style_dim = 3;
  double alpha = 1.0;
  int kernel = 3, stride = 2, pad = 1;
  bool mse_recon = false;        // Bernoulli cross-entropy by default
  bool symmetrize_elbo = false;  // also add ELBO(x_p)

  PartitionSpec partition() const { return {content_dim, style_dim, alpha}; }

  void validate() const {
    if (latent_dim != content_dim + style_dim)
      throw std::invalid_argument("ConvVaeSpec: latent_dim != content_dim + style_dim");
    if (channels.empty()) throw std::invalid_argument("ConvVaeSpec: empty channel list");
  }

  /// Spatial sizes after each encoder conv, starting from image_size.
  std::vector<int> spatial_chain() const {
    std::vector<int> sizes{image_size};
    for (size_t i = 0; i < channels.size(); ++i)
      sizes.push_back((sizes.back() + 2 * pad - kernel) / stride + 1);
    return sizes;
  }
};

/// Per-dimension posterior parameters for one batch.
template <class T>
struct LatentBatch {
  Tensor<T> mu;      // [B, latent]
  Tensor<T> logvar;  // [B, latent]
};

/// Single-sample view matching the (mu, logvar) pair contract.
template <class T>
struct LatentDistribution {
  std::vector<T> mu;
  std::vector<T> logvar;
};

/// z = mu + exp(logvar/2) * n, n ~ N(0, I).
template <class T>
std::vector<T> reparameterize(const LatentDistribution<T>& dist, Rng& rng) {
  if (dist.mu.size() != dist.logvar.size())
    throw std::invalid_argument("reparameterize: mu/logvar length mismatch");
  std::vector<T> z(dist.mu.size());
  for (size_t i = 0; i < z.size(); ++i)
    z[i] = dist.mu[i] + std::exp(dist.logvar[i] / T(2)) * static_cast<T>(rng.normal());
  return z;
}

template <class T>
struct VaeLossBreakdown {
  T reconstruction = 0;
  T kl = 0;
  T pr = 0;
  T total = 0;
  PrLossBreakdown<T> pr_parts;
};

template <class T>
class VaeModel {
public:
  VaeModel() = default;

  explicit VaeModel(const ConvVaeSpec& spec) : spec_(spec) {
    spec.validate();
    auto sizes = spec.spatial_chain();
    int in_ch = spec.in_channels;
    for (size_t i = 0; i < spec.channels.size(); ++i) {
      enc_.emplace_back("enc" + std::to_string(i), in_ch, spec.channels[i], spec.kernel,
                        spec.stride, spec.pad);
      in_ch = spec.channels[i];
    }
    feat_hw_ = sizes.back();
    feat_dim_ = spec.channels.back() * feat_hw_ * feat_hw_;
    fc_mu_ = nn::Linear<T>("fc_mu", feat_dim_, spec.latent_dim);
    fc_logvar_ = nn::Linear<T>("fc_logvar", feat_dim_, spec.latent_dim);
    fc_dec_ = nn::Linear<T>("fc_dec", spec.latent_dim, feat_dim_);
    int ch = spec.channels.back();
    for (size_t i = spec.channels.size(); i-- > 0;) {
      int out_ch = i == 0 ? spec.in_channels : spec.channels[i - 1];
      int in_size = sizes[i + 1], target = sizes[i];
      int out_pad = target - ((in_size - 1) * spec.stride - 2 * spec.pad + spec.kernel);
      if (out_pad < 0 || out_pad >= spec.stride)
        throw std::invalid_argument("VaeModel: decoder cannot mirror encoder geometry");
      dec_.emplace_back("dec" + std::to_string(spec.channels.size() - 1 - i), ch, out_ch,
                        spec.kernel, spec.stride, spec.pad, out_pad);
      ch = out_ch;
    }
  }

  void init(Rng& rng) {
    for (auto& l : enc_) l.init(rng);
    fc_mu_.init(rng, T(1));
    fc_logvar_.init(rng, T(1));
    fc_dec_.init(rng);
    for (auto& l : dec_) l.init(rng);
  }

  const ConvVaeSpec& spec() const { return spec_; }

  struct EncodeCache {
    std::vector<typename nn::Conv2d<T>::Cache> convs;
    std::vector<nn::ReluCache<T>> relus;
    typename nn::Linear<T>::Cache mu_cache, logvar_cache;
    int batch = 0;
  };

  struct DecodeCache {
    typename nn::Linear<T>::Cache fc;
    nn::ReluCache<T> fc_relu;
    std::vector<typename nn::ConvTranspose2d<T>::Cache> convs;
    std::vector<nn::ReluCache<T>> relus;
    int batch = 0;
  };

  LatentBatch<T> encode(const Tensor<T>& x, EncodeCache& cache) const {
    const auto& sh = x.shape();
    if (sh.size() != 4 || sh[1] != spec_.in_channels || sh[2] != spec_.image_size ||
        sh[3] != spec_.image_size)
      throw std::invalid_argument("encode: input shape " + shape_str(sh) + " does not match spec");
    cache.batch = static_cast<int>(sh[0]);
    cache.convs.resize(enc_.size());
    cache.relus.resize(enc_.size());
    Tensor<T> h = x;
    for (size_t i = 0; i < enc_.size(); ++i) {
      h = enc_[i].forward(h, cache.convs[i]);
      h = nn::relu_forward(h, cache.relus[i]);
    }
    h.reshape({sh[0], feat_dim_});
    LatentBatch<T> out;
    out.mu = fc_mu_.forward(h, cache.mu_cache);
    out.logvar = fc_logvar_.forward(h, cache.logvar_cache);
    return out;
  }

  /// Accumulates parameter grads for d(loss)/dmu and d(loss)/dlogvar.
  void encode_backward(const Tensor<T>& dmu, const Tensor<T>& dlogvar, const EncodeCache& cache) {
    Tensor<T> dh = fc_mu_.backward(dmu, cache.mu_cache);
    Tensor<T> dh2 = fc_logvar_.backward(dlogvar, cache.logvar_cache);
    kern::add(dh.data(), dh2.data(), dh.data(), dh.numel());
    auto sizes = spec_.spatial_chain();
    dh.reshape({static_cast<int64_t>(cache.batch), spec_.channels.back(), sizes.back(),
                sizes.back()});
    for (size_t i = enc_.size(); i-- > 0;) {
      dh = nn::relu_backward(dh, cache.relus[i]);
      dh = enc_[i].backward(dh, cache.convs[i]);
    }
  }

  /// Decoder up to logits; reconstruction = sigmoid(logits).
  Tensor<T> decode_logits(const Tensor<T>& z, DecodeCache& cache) const {
    const auto& sh = z.shape();
    if (sh.size() != 2 || sh[1] != spec_.latent_dim)
      throw std::invalid_argument("decode: latent shape mismatch");
    cache.batch = static_cast<int>(sh[0]);
    cache.convs.resize(dec_.size());
    cache.relus.resize(dec_.size());
    Tensor<T> h = fc_dec_.forward(z, cache.fc);
    h = nn::relu_forward(h, cache.fc_relu);
    auto sizes = spec_.spatial_chain();
    h.reshape({sh[0], spec_.channels.back(), sizes.back(), sizes.back()});
    for (size_t i = 0; i < dec_.size(); ++i) {
      h = dec_[i].forward(h, cache.convs[i]);
      if (i + 1 < dec_.size()) h = nn::relu_forward(h, cache.relus[i]);
    }
    return h;
  }

  Tensor<T> decode(const Tensor<T>& z) const {
    DecodeCache cache;
    Tensor<T> logits = decode_logits(z, cache);
    Tensor<T> out(logits.shape());
    kern::sigmoid(logits.data(), out.data(), logits.numel());
    return out;
  }

  Tensor<T> decode_backward(const Tensor<T>& dlogits, const DecodeCache& cache) {
    Tensor<T> dh = dlogits;
    for (size_t i = dec_.size(); i-- > 0;) {
      if (i + 1 < dec_.size()) dh = nn::relu_backward(dh, cache.relus[i]);
      dh = dec_[i].backward(dh, cache.convs[i]);
    }
    dh.reshape({static_cast<int64_t>(cache.batch), feat_dim_});
    dh = nn::relu_backward(dh, cache.fc_relu);
    return fc_dec_.backward(dh, cache.fc);
  }

  void collect(nn::ParamRefs<T>& out) {
    for (auto& l : enc_) l.collect(out);
    fc_mu_.collect(out);
    fc_logvar_.collect(out);
    fc_dec_.collect(out);
    for (auto& l : dec_) l.collect(out);
  }

  int64_t feature_dim() const { return feat_dim_; }

private:
  ConvVaeSpec spec_;
  std::vector<nn::Conv2d<T>> enc_;
  nn::Linear<T> fc_mu_, fc_logvar_, fc_dec_;
  std::vector<nn::ConvTranspose2d<T>> dec_;
  int feat_hw_ = 0;
  int64_t feat_dim_ = 0;
};

namespace detail {

template <class T>
inline T softplus(T x) {
  return x > T(0) ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

}  // namespace detail

/// ELBO pieces from the probability-space reconstruction:
/// reconstruction = Bernoulli cross-entropy summed over pixels, batch
/// mean; kl = 1/2 sum(mu^2 + e^logvar - 1 - logvar), batch mean.
template <class T>
std::pair<T, T> elbo_terms(const Tensor<T>& x, const Tensor<T>& reconstruction,
                           const LatentBatch<T>& dist, bool mse = false) {
  if (x.shape() != reconstruction.shape())
    throw std::invalid_argument("elbo_terms: shape mismatch");
  int64_t batch = x.dim(0);
  T recon = 0;
  const T eps = static_cast<T>(1e-7);
  for (int64_t i = 0; i < x.numel(); ++i) {
    T p = reconstruction[i];
    if (p < T(0) || p > T(1))
      throw std::domain_error("elbo_terms: reconstruction value outside [0,1]");
    if (mse) {
      T d = p - x[i];
      recon += d * d;
    } else {
      T pc = std::min(std::max(p, eps), T(1) - eps);
      recon += -(x[i] * std::log(pc) + (T(1) - x[i]) * std::log(T(1) - pc));
    }
  }
  recon /= static_cast<T>(batch);

  T kl = 0;
  for (int64_t i = 0; i < dist.mu.numel(); ++i) {
    T m = dist.mu[i], lv = dist.logvar[i];
    kl += m * m + std::exp(lv) - T(1) - lv;
  }
  kl = kl / T(2) / static_cast<T>(batch);
  return {recon, kl};
}

namespace detail {

/// One reparameterize-decode ELBO pass; keeps what backward needs.
template <class T>
struct ElboPath {
  Tensor<T> eps, z, logits, sig;
  typename VaeModel<T>::DecodeCache dec_cache;
  T recon = 0, kl = 0;
};

template <class T>
ElboPath<T> elbo_forward(const VaeModel<T>& model, const Tensor<T>& x, const LatentBatch<T>& lat,
                         Rng& rng) {
  const ConvVaeSpec& spec = model.spec();
  int64_t batch = x.dim(0), latent = spec.latent_dim;
  T inv_b = T(1) / static_cast<T>(batch);
  ElboPath<T> path;
  path.eps = Tensor<T>({batch, latent});
  for (int64_t i = 0; i < path.eps.numel(); ++i) path.eps[i] = static_cast<T>(rng.normal());
  path.z = Tensor<T>({batch, latent});
  for (int64_t i = 0; i < path.z.numel(); ++i)
    path.z[i] = lat.mu[i] + std::exp(lat.logvar[i] / T(2)) * path.eps[i];

  path.logits = model.decode_logits(path.z, path.dec_cache);
  path.sig = Tensor<T>(path.logits.shape());
  kern::sigmoid(path.logits.data(), path.sig.data(), path.logits.numel());

  T acc = 0;
  if (spec.mse_recon) {
    for (int64_t i = 0; i < path.logits.numel(); ++i) {
      T d = path.sig[i] - x[i];
      acc += d * d;
    }
  } else {
    for (int64_t i = 0; i < path.logits.numel(); ++i)
      acc += softplus(path.logits[i]) - x[i] * path.logits[i];
  }
  path.recon = acc * inv_b;

  T kl_acc = 0;
  for (int64_t i = 0; i < lat.mu.numel(); ++i) {
    T m = lat.mu[i], lv = lat.logvar[i];
    kl_acc += m * m + std::exp(lv) - T(1) - lv;
  }
  path.kl = kl_acc / T(2) * inv_b;
  return path;
}

/// Adds this path's d(elbo)/dmu and d(elbo)/dlogvar, running the decoder
/// backward. Both likelihoods reduce to a stable logit-space gradient.
template <class T>
void elbo_backward(VaeModel<T>& model, const Tensor<T>& x, const LatentBatch<T>& lat,
                   const ElboPath<T>& path, Tensor<T>& dmu, Tensor<T>& dlogvar) {
  const ConvVaeSpec& spec = model.spec();
  int64_t batch = x.dim(0);
  T inv_b = T(1) / static_cast<T>(batch);
  Tensor<T> dlogits(path.logits.shape());
  if (spec.mse_recon) {
    for (int64_t i = 0; i < dlogits.numel(); ++i) {
      T s = path.sig[i];
      dlogits[i] = T(2) * (s - x[i]) * s * (T(1) - s) * inv_b;
    }
  } else {
    for (int64_t i = 0; i < dlogits.numel(); ++i) dlogits[i] = (path.sig[i] - x[i]) * inv_b;
  }
  Tensor<T> dz = model.decode_backward(dlogits, path.dec_cache);
  for (int64_t i = 0; i < dz.numel(); ++i) {
    dmu[i] += dz[i];
    dlogvar[i] += dz[i] * path.eps[i] * std::exp(lat.logvar[i] / T(2)) / T(2);
    dmu[i] += lat.mu[i] * inv_b;
    dlogvar[i] += (std::exp(lat.logvar[i]) - T(1)) / T(2) * inv_b;
  }
}

}  // namespace detail

/// Composite pair objective: ELBO on the anchor plus the partitioned loss
/// between the two mean vectors (optionally ELBO on the positive as well,
/// per the symmetrize_elbo toggle). With `backward`, parameter grads
/// accumulate through every path: decoder, both encoder passes,
/// reparameterization, KL and partition terms.
template <class T>
VaeLossBreakdown<T> pr_vae_loss(VaeModel<T>& model, const Tensor<T>& xa, const Tensor<T>& xp,
                                Rng& rng, bool backward) {
  const ConvVaeSpec& spec = model.spec();
  PartitionSpec part = spec.partition();
  int64_t batch = xa.dim(0);
  int64_t latent = spec.latent_dim;
  T inv_b = T(1) / static_cast<T>(batch);

  typename VaeModel<T>::EncodeCache enc_a, enc_p;
  LatentBatch<T> la = model.encode(xa, enc_a);
  LatentBatch<T> lp = model.encode(xp, enc_p);

  VaeLossBreakdown<T> out;
  auto path_a = detail::elbo_forward(model, xa, la, rng);
  out.reconstruction = path_a.recon;
  out.kl = path_a.kl;
  detail::ElboPath<T> path_p;
  if (spec.symmetrize_elbo) {
    path_p = detail::elbo_forward(model, xp, lp, rng);
    out.reconstruction += path_p.recon;
    out.kl += path_p.kl;
  }

  Tensor<T> dmu_a({batch, latent}), dmu_p({batch, latent});
  T pr_content = 0, pr_style = 0;
  for (int64_t b = 0; b < batch; ++b) {
    auto parts = pr_loss_euclidean_grad<T>(
        la.mu.data() + b * latent, lp.mu.data() + b * latent, part, inv_b,
        backward ? dmu_a.data() + b * latent : nullptr,
        backward ? dmu_p.data() + b * latent : nullptr);
    pr_content += parts.content_distance;
    pr_style += parts.style_distance;
  }
  out.pr_parts.content_distance = pr_content * inv_b;
  out.pr_parts.style_distance = pr_style * inv_b;
  out.pr_parts.total = out.pr_parts.content_distance -
                       static_cast<T>(part.alpha) * out.pr_parts.style_distance;
  out.pr = out.pr_parts.total;
  out.total = out.reconstruction + out.kl + out.pr;

  if (!backward) return out;

  Tensor<T> dlogvar_a({batch, latent}), dlogvar_p({batch, latent});
  detail::elbo_backward(model, xa, la, path_a, dmu_a, dlogvar_a);
  if (spec.symmetrize_elbo) detail::elbo_backward(model, xp, lp, path_p, dmu_p, dlogvar_p);

  model.encode_backward(dmu_a, dlogvar_a, enc_a);
  model.encode_backward(dmu_p, dlogvar_p, enc_p);
  return out;
}

}  // namespace partrep::vae
