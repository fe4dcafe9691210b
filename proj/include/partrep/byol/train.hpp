#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "partrep/byol/byol.hpp"
#include "partrep/forge/augment.hpp"
#include "partrep/forge/dataset.hpp"
#include "partrep/runner/checkpoint.hpp"

namespace partrep::byol {

/// Online network (encoder+projector+predictor) and its EMA target
/// (encoder+projector). The target never receives gradient updates.
struct ByolNetworks {
  ByolEncoder<float> online;
  MlpHead<float> predictor;
  ByolEncoder<float> target;

  explicit ByolNetworks(const ByolSpec& spec);
  void init(Rng& rng);  // target starts as an exact copy of online
};

struct EmaSchedule {
  double tau_base = 0.996;
  bool cosine = true;  // ramp tau toward 1 over total_steps
  int64_t total_steps = 0;

  double tau_at(int64_t step) const;
};

struct ByolTrainConfig {
  ByolSpec spec;
  forge::TwoViewPolicy policy = forge::default_two_view_policy(32);
  int epochs = 25;
  int batch_size = 128;
  double lr = 3e-4;
  EmaSchedule ema;
  uint64_t seed = 0;
};

struct SymmetricLossResult {
  float value = 0;
  PrLossBreakdown<float> dir1, dir2;  // pred(v1)->proj(v2) and pred(v2)->proj(v1)
};

/// Batch-mean symmetric partitioned loss over two view batches. With
/// `backward`, gradients flow to the online network and predictor only.
SymmetricLossResult symmetric_pr_byol_loss(ByolNetworks& nets, const Tensor<float>& view1,
                                           const Tensor<float>& view2, bool training,
                                           bool backward);

struct ByolTrainResult {
  ByolNetworks nets;
  std::vector<float> history;
  int epoch = 0;
  ByolTrainConfig config;
};

ByolTrainResult train_byol(const ByolTrainConfig& cfg, const forge::ColoredDataset& data,
                           const runner::Checkpoint* resume = nullptr,
                           const std::string* save_path = nullptr);

/// Projection vectors (partitioned representation) for probing, computed
/// with running statistics (eval mode).
Tensor<float> project_all(ByolEncoder<float>& enc, const Tensor<float>& images,
                          int batch_size = 256);

/// Backbone features before the projector.
Tensor<float> features_all(ByolEncoder<float>& enc, const Tensor<float>& images,
                           int batch_size = 256);

ByolSpec byol_spec_from_meta(const nlohmann::json& meta);
ByolNetworks load_byol(const runner::Checkpoint& ckpt);

}  // namespace partrep::byol
