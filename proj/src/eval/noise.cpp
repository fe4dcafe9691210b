#include "partrep/eval/noise.hpp"

#include <stdexcept>

namespace partrep::eval {

const char* noise_part_name(NoisePart part) {
  return part == NoisePart::content ? "content" : "style";
}

PartitionedEmbedding<float> perturb(const PartitionedEmbedding<float>& mu,
                                    const NoiseEvalConfig& config, Rng& rng) {
  PartitionedEmbedding<float> out = mu;
  auto view = config.part == NoisePart::content ? out.content() : out.style();
  float t = static_cast<float>(config.intensity);
  for (auto& v : view) v += t * static_cast<float>(rng.normal());
  return out;
}

Tensor<float> perturb_batch(const Tensor<float>& mu, const PartitionSpec& spec, NoisePart part,
                            int intensity, Rng& rng) {
  if (mu.dim(1) != spec.total_dim())
    throw std::invalid_argument("perturb_batch: dimension mismatch");
  Tensor<float> out = mu;
  int64_t n = mu.dim(0), total = spec.total_dim();
  int64_t begin = part == NoisePart::content ? 0 : spec.content_dim;
  int64_t end = part == NoisePart::content ? spec.content_dim : total;
  float t = static_cast<float>(intensity);
  for (int64_t i = 0; i < n; ++i) {
    float* row = out.data() + i * total;
    for (int64_t d = begin; d < end; ++d) row[d] += t * static_cast<float>(rng.normal());
  }
  return out;
}

NoiseSweepResult noise_sweep(const Tensor<float>& mu_test, const std::vector<int>& labels,
                             const LinearProbe& probe, const PartitionSpec& spec,
                             const std::vector<int>& t_values, uint64_t seed,
                             int draws_per_sample) {
  NoiseSweepResult result;
  result.clean_accuracy = probe.accuracy(mu_test, labels);
  result.rows.push_back({"none", 0, result.clean_accuracy});
  for (NoisePart part : {NoisePart::style, NoisePart::content}) {
    for (int t : t_values) {
      double acc;
      if (t == 0) {
        acc = result.clean_accuracy;
      } else {
        double total = 0;
        for (int draw = 0; draw < draws_per_sample; ++draw) {
          Rng rng(derive_seed(seed, (part == NoisePart::content ? 0xc0u : 0x57u),
                              static_cast<uint64_t>(t) * 1000 + static_cast<uint64_t>(draw)));
          Tensor<float> noisy = perturb_batch(mu_test, spec, part, t, rng);
          total += probe.accuracy(noisy, labels);
        }
        acc = total / draws_per_sample;
      }
      result.rows.push_back({noise_part_name(part), t, acc});
    }
  }
  return result;
}

}  // namespace partrep::eval
