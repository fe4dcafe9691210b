#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "partrep/forge/dataset.hpp"
#include "partrep/runner/checkpoint.hpp"
#include "partrep/vae/vae.hpp"

namespace partrep::vae {

struct VaeTrainConfig {
  ConvVaeSpec spec;
  int epochs = 20;
  int batch_size = 128;
  double lr = 1e-3;
  double clip_norm = 5.0;  // global gradient-norm safety valve
  uint64_t seed = 0;
};

struct StepLoss {
  float reconstruction = 0, kl = 0, pr = 0, total = 0;
};

struct VaeTrainResult {
  VaeModel<float> model;
  std::vector<StepLoss> history;
  int epoch = 0;
  VaeTrainConfig config;
};

/// Dataset images as one [N,3,H,W] float tensor in [0,1].
Tensor<float> dataset_to_tensor(const forge::ColoredDataset& data);

/// Same-class-pair training per the composite objective. Resumes from
/// `resume` when given (parameters, optimizer moments, epoch, history);
/// when `save_path` is set, writes the full checkpoint (parameters +
/// optimizer state + loss history + spec/seed meta) on completion.
VaeTrainResult train_vae(const VaeTrainConfig& cfg, const forge::ColoredDataset& data,
                         const runner::Checkpoint* resume = nullptr,
                         const std::string* save_path = nullptr);

/// Mean vectors of every image, batched forward without gradients.
Tensor<float> encode_mu(const VaeModel<float>& model, const Tensor<float>& images,
                        int batch_size = 256);

ConvVaeSpec vae_spec_from_meta(const nlohmann::json& meta);
VaeModel<float> load_vae_model(const runner::Checkpoint& ckpt);
std::vector<StepLoss> history_from_checkpoint(const runner::Checkpoint& ckpt);

}  // namespace partrep::vae
