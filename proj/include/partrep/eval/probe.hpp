#pragma once

#include <cstdint>
#include <vector>

#include "partrep/core/tensor.hpp"

namespace partrep::eval {

/// Full-batch multinomial logistic regression on frozen features.
/// Internally fits on standardized features and folds the scaling back
/// into (weight, bias), so the stored probe acts on raw features.
struct LinearProbe {
  Tensor<float> weight;  // [classes, dim]
  Tensor<float> bias;    // [classes]
  int epochs_run = 0;
  double final_grad_norm = 0;
  double lr = 0;
  uint64_t seed = 0;

  int num_classes() const { return static_cast<int>(weight.dim(0)); }
  int64_t feature_dim() const { return weight.dim(1); }

  std::vector<int> predict(const Tensor<float>& features) const;
  double accuracy(const Tensor<float>& features, const std::vector<int>& labels) const;
};

struct ProbeConfig {
  int max_epochs = 500;
  double lr = 0.1;
  double grad_tol = 1e-5;  // L2 norm over all probe parameters
  uint64_t seed = 0;
};

LinearProbe fit_probe(const Tensor<float>& features, const std::vector<int>& labels,
                      const ProbeConfig& cfg = {});

}  // namespace partrep::eval
