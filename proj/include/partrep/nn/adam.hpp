#pragma once

#include <cmath>
#include <vector>

#include "partrep/kern/kernels.hpp"
#include "partrep/nn/layers.hpp"

namespace partrep::nn {

/// Global L2 gradient clipping across every registered parameter.
/// Returns the pre-clip norm.
template <class T>
T clip_global_norm(ParamRefs<T>& params, T max_norm) {
  T total = 0;
  for (auto& p : params.items) total += kern::sumsq(p.grad->data(), p.grad->numel());
  T norm = std::sqrt(total);
  if (max_norm > T(0) && norm > max_norm) {
    T factor = max_norm / norm;
    for (auto& p : params.items) kern::scale(factor, p.grad->data(), p.grad->numel());
  }
  return norm;
}

template <class T>
class Adam {
public:
  Adam() = default;
  Adam(ParamRefs<T> params, T lr, T beta1 = T(0.9), T beta2 = T(0.999), T eps = T(1e-8))
      : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (auto& p : params_.items) {
      m_.emplace_back(p.value->shape());
      v_.emplace_back(p.value->shape());
    }
  }

  void zero_grad() {
    for (auto& p : params_.items) p.grad->zero();
  }

  void step() {
    ++t_;
    for (size_t i = 0; i < params_.items.size(); ++i) {
      auto& p = params_.items[i];
      kern::adam_step(p.value->data(), p.grad->data(), m_[i].data(), v_[i].data(),
                      p.value->numel(), lr_, beta1_, beta2_, eps_, t_);
    }
  }

  ParamRefs<T>& params() { return params_; }
  std::vector<Tensor<T>>& moment1() { return m_; }
  std::vector<Tensor<T>>& moment2() { return v_; }
  int64_t step_count() const { return t_; }
  void set_step_count(int64_t t) { t_ = t; }
  void set_lr(T lr) { lr_ = lr; }
  T lr() const { return lr_; }

private:
  ParamRefs<T> params_;
  std::vector<Tensor<T>> m_, v_;
  T lr_ = T(1e-3), beta1_ = T(0.9), beta2_ = T(0.999), eps_ = T(1e-8);
  int64_t t_ = 0;
};

}  // namespace partrep::nn
