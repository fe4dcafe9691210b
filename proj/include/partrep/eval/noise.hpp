#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "partrep/core/rng.hpp"
#include "partrep/core/tensor.hpp"
#include "partrep/eval/probe.hpp"
#include "partrep/prcore/partition.hpp"

namespace partrep::eval {

enum class NoisePart { content, style };

const char* noise_part_name(NoisePart part);

struct NoiseEvalConfig {
  NoisePart part = NoisePart::style;
  int intensity = 1;          // t
  int draws_per_sample = 1;   // >1 averages accuracy over repeated draws
  uint64_t seed = 0;
};

/// mu with t*n (n ~ N(0,I)) added to the targeted part; the other part is
/// bit-identical to the input.
PartitionedEmbedding<float> perturb(const PartitionedEmbedding<float>& mu,
                                    const NoiseEvalConfig& config, Rng& rng);

/// Batch form over rows of [N, total_dim].
Tensor<float> perturb_batch(const Tensor<float>& mu, const PartitionSpec& spec, NoisePart part,
                            int intensity, Rng& rng);

struct NoiseSweepRow {
  std::string part;  // "none" (clean), "style", "content"
  int t = 0;
  double accuracy = 0;
};

struct NoiseSweepResult {
  double clean_accuracy = 0;
  std::vector<NoiseSweepRow> rows;  // clean row first, then per (part, t)
};

/// One accuracy per (part, t) cell with a fixed per-cell seed; t = 0 cells
/// reuse the clean features exactly.
NoiseSweepResult noise_sweep(const Tensor<float>& mu_test, const std::vector<int>& labels,
                             const LinearProbe& probe, const PartitionSpec& spec,
                             const std::vector<int>& t_values, uint64_t seed,
                             int draws_per_sample = 1);

}  // namespace partrep::eval
