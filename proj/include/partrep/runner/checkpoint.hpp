#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "partrep/core/tensor.hpp"

namespace partrep::runner {

// Single-file checkpoint container: magic 'PRCK', u32 container version,
// u64 JSON header length, header bytes, then the raw little-endian f32
// blob. The header carries kind/meta plus a tensor manifest (name, shape,
// offset, bytes) and is readable without touching the blob.

inline constexpr uint32_t kCheckpointVersion = 1;

struct TensorEntry {
  std::string name;
  std::vector<int64_t> shape;
  uint64_t offset = 0;  // into the blob
  uint64_t bytes = 0;
};

struct CheckpointHeader {
  uint32_t version = kCheckpointVersion;
  std::string kind;  // "vae" | "byol"
  nlohmann::json meta;
  std::vector<TensorEntry> tensors;
};

struct Checkpoint {
  CheckpointHeader header;
  std::map<std::string, Tensor<float>> tensors;

  const Tensor<float>& at(const std::string& name) const;
  bool has(const std::string& name) const { return tensors.count(name) > 0; }
};

void save_checkpoint(const std::string& path, const std::string& kind, const nlohmann::json& meta,
                     const std::vector<std::pair<std::string, const Tensor<float>*>>& tensors);

/// Header only; never maps the parameter blob.
CheckpointHeader inspect_checkpoint(const std::string& path);

Checkpoint load_checkpoint(const std::string& path);

}  // namespace partrep::runner
