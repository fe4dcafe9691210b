#pragma once

#include <cstdint>
#include <vector>

#include "partrep/core/rng.hpp"

namespace partrep::forge {

/// Uniform same-class index distinct from the anchor. Throws when the
/// anchor's class has no other member.
size_t sample_positive(const std::vector<int>& labels, size_t anchor_index, Rng& rng);

/// Index pairs (anchor, positive) for a batch of anchors.
struct PairBatch {
  std::vector<size_t> anchors;
  std::vector<size_t> positives;
  std::vector<int> labels;
};

PairBatch make_pair_batch(const std::vector<int>& labels, const std::vector<size_t>& anchors,
                          Rng& rng);

/// Per-class index for O(1) positive draws inside training loops; same
/// uniform-excluding-self distribution as sample_positive.
class ClassIndex {
public:
  explicit ClassIndex(const std::vector<int>& labels);
  size_t sample_positive(size_t anchor_index, Rng& rng) const;
  const std::vector<std::vector<size_t>>& by_class() const { return by_class_; }

private:
  std::vector<std::vector<size_t>> by_class_;
  std::vector<int> labels_;
};

}  // namespace partrep::forge
