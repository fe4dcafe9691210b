#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "partrep/byol/train.hpp"
#include "partrep/forge/dataset.hpp"
#include "partrep/vae/train.hpp"

namespace partrep::runner {

inline constexpr const char* kCodeVersion = "partrep-0.1.0";

enum class Task {
  synth_data,
  train_vae,
  train_byol,
  probe,
  noise_eval,
  traverse,
  swap_task,
  report
};

Task task_from_name(const std::string& name);
const char* task_name(Task task);

struct DatasetConfig {
  std::string source = "synthetic";  // synthetic | idx | dir
  int count = 1000;
  int test_count = 0;
  int image_size = 28;
  forge::ColorMode mode = forge::ColorMode::biased;
  uint64_t seed = 0;  // 0 = inherit the experiment seed
  std::string dir, test_dir;
  std::string idx_images, idx_labels, idx_test_images, idx_test_labels;
};

struct ModelConfig {
  std::string type = "vae";  // vae | byol
  // vae
  std::vector<int> channels = {32, 64, 128};
  int latent_dim = 10;
  int content_dim = 7;
  int style_dim = 3;
  bool mse_recon = false;
  bool symmetrize_elbo = false;
  // byol
  std::string backbone = "desk";  // desk | resnet18
  int repr_width = 64;
  int byol_content_dim = 48;
  int byol_style_dim = 16;
  int hidden_mult = 4;
};

struct OptimConfig {
  double alpha = 1.0;
  double lr = 1e-3;
  int batch_size = 128;
  int epochs = 20;
  double clip_norm = 5.0;
  double tau_base = 0.996;
  bool tau_cosine = true;
};

struct AugmentConfig {
  int out_size = 32;
  double crop_scale_min = 0.3;  // desk default; the 224px recipe uses 0.08
  double crop_scale_max = 1.0;
};

struct EvalConfig {
  std::string checkpoint;
  std::vector<int> t_values = {1, 2, 3, 4};
  int noise_draws = 1;
  double traversal_t_min = -4.0;
  double traversal_t_max = 4.0;
  int traversal_steps = 9;
  std::vector<int> traversal_dims;  // empty = all
  int images = 8;                   // inputs for traverse
  int pairs = 200;                  // pairs for swap
  std::vector<std::string> runs;    // inputs for report
};

struct ExperimentConfig {
  Task task = Task::synth_data;
  uint64_t seed = 0;
  bool seed_set = false;
  std::string out_root;  // empty = env PARTREP_OUTPUT_ROOT or ./runs
  DatasetConfig dataset;
  ModelConfig model;
  OptimConfig optim;
  AugmentConfig augment;
  EvalConfig eval;

  nlohmann::json to_json() const;
  uint64_t dataset_seed() const { return dataset.seed ? dataset.seed : seed; }
};

/// Strict parse: unknown keys anywhere are rejected; seed is mandatory.
ExperimentConfig parse_config(const nlohmann::json& j);

/// Translation helpers into the module-level configs.
vae::VaeTrainConfig to_vae_config(const ExperimentConfig& cfg);
byol::ByolTrainConfig to_byol_config(const ExperimentConfig& cfg);

/// Materializes the train/test datasets the config describes.
struct DatasetBundle {
  forge::ColoredDataset train;
  forge::ColoredDataset test;
};
DatasetBundle make_datasets(const ExperimentConfig& cfg);

}  // namespace partrep::runner
