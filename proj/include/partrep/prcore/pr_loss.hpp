#pragma once

#include <cmath>
#include <stdexcept>

#include "partrep/kern/kernels.hpp"
#include "partrep/prcore/partition.hpp"

// The partitioned pair loss: pull the content parts together, push the
// style parts apart, with the style term weighted by alpha:
//
//   total = ||content_a - content_p||  -  alpha * ||style_a - style_p||
//
// The raw-Euclidean form acts on VAE mean vectors; the normalized form
// scales each part to unit norm first (so it is invariant to per-part
// rescaling) and is the one the dual-network trainer uses.

namespace partrep {

template <class T>
struct PrLossBreakdown {
  T content_distance = 0;
  T style_distance = 0;
  T total = 0;
};

namespace detail {

template <class T>
inline T euclid(const T* a, const T* b, int64_t n) {
  return std::sqrt(kern::sqdist(a, b, n));
}

}  // namespace detail

/// Euclidean form with optional gradient accumulation: when dza/dzp are
/// non-null, weight * d(total)/d(z) is added into them. The gradient of
/// ||a-p|| is (a-p)/||a-p||; at the non-differentiable coincident point
/// the zero subgradient is used.
template <class T>
PrLossBreakdown<T> pr_loss_euclidean_grad(const T* za, const T* zp, const PartitionSpec& spec,
                                          T weight = T(1), T* dza = nullptr, T* dzp = nullptr) {
  int64_t dc = spec.content_dim, ds = spec.style_dim;
  PrLossBreakdown<T> out;
  out.content_distance = detail::euclid(za, zp, dc);
  out.style_distance = detail::euclid(za + dc, zp + dc, ds);
  out.total = out.content_distance - static_cast<T>(spec.alpha) * out.style_distance;
  if (dza || dzp) {
    if (out.content_distance > T(0)) {
      T f = weight / out.content_distance;
      for (int64_t i = 0; i < dc; ++i) {
        T g = f * (za[i] - zp[i]);
        if (dza) dza[i] += g;
        if (dzp) dzp[i] -= g;
      }
    }
    if (out.style_distance > T(0)) {
      T f = -static_cast<T>(spec.alpha) * weight / out.style_distance;
      for (int64_t i = dc; i < dc + ds; ++i) {
        T g = f * (za[i] - zp[i]);
        if (dza) dza[i] += g;
        if (dzp) dzp[i] -= g;
      }
    }
  }
  return out;
}

template <class T>
PrLossBreakdown<T> pr_loss_euclidean(const PartitionedEmbedding<T>& za,
                                     const PartitionedEmbedding<T>& zp,
                                     const PartitionSpec& spec) {
  if (!(za.spec == spec) || !(zp.spec == spec))
    throw std::invalid_argument("pr_loss_euclidean: spec mismatch");
  return pr_loss_euclidean_grad<T>(za.values.data(), zp.values.data(), spec);
}

namespace detail {

// Distance between the unit-normalized vectors u/|u| and v/|v|, as
// sqrt(2 - 2 cos + eps). Gradient w.r.t. u is -(v_hat - cos*u_hat)/(d*|u|).
template <class T>
T normalized_part_distance_grad(const T* u, const T* v, int64_t n, T eps, T weight, T coef,
                                T* du) {
  T nu = std::sqrt(kern::sumsq(u, n));
  T nv = std::sqrt(kern::sumsq(v, n));
  if (nu == T(0) || nv == T(0))
    throw std::domain_error("pr_loss_normalized: zero-norm part (representation degeneracy)");
  T cos = kern::dot(u, v, n) / (nu * nv);
  if (cos > T(1)) cos = T(1);
  if (cos < T(-1)) cos = T(-1);
  T d = std::sqrt(std::max(T(2) - T(2) * cos + eps, T(0)));
  if (du && d > T(0)) {
    T f = -coef * weight / (d * nu);
    for (int64_t i = 0; i < n; ++i) du[i] += f * (v[i] / nv - cos * u[i] / nu);
  }
  return d;
}

}  // namespace detail

/// Normalized form; gradient (if requested) flows to the prediction side
/// only, matching the stop-gradient convention of the dual-network
/// trainer. eps stabilizes the sqrt near coincident unit vectors; the
/// strict public overload below uses eps = 0 and throws on degeneracy.
template <class T>
PrLossBreakdown<T> pr_loss_normalized_grad(const T* pred, const T* tgt, const PartitionSpec& spec,
                                           T eps = T(0), T weight = T(1), T* dpred = nullptr) {
  int64_t dc = spec.content_dim, ds = spec.style_dim;
  PrLossBreakdown<T> out;
  out.content_distance = detail::normalized_part_distance_grad<T>(
      pred, tgt, dc, eps, weight, T(1), dpred);
  out.style_distance = detail::normalized_part_distance_grad<T>(
      pred + dc, tgt + dc, ds, eps, weight, static_cast<T>(-spec.alpha),
      dpred ? dpred + dc : nullptr);
  out.total = out.content_distance - static_cast<T>(spec.alpha) * out.style_distance;
  return out;
}

template <class T>
PrLossBreakdown<T> pr_loss_normalized(const PartitionedEmbedding<T>& pred,
                                      const PartitionedEmbedding<T>& tgt,
                                      const PartitionSpec& spec) {
  if (!(pred.spec == spec) || !(tgt.spec == spec))
    throw std::invalid_argument("pr_loss_normalized: spec mismatch");
  return pr_loss_normalized_grad<T>(pred.values.data(), tgt.values.data(), spec);
}

}  // namespace partrep
