#include "partrep/forge/pairs.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace partrep::forge {

size_t sample_positive(const std::vector<int>& labels, size_t anchor_index, Rng& rng) {
  if (anchor_index >= labels.size())
    throw std::invalid_argument("sample_positive: anchor index out of range");
  int label = labels[anchor_index];
  std::vector<size_t> candidates;
  for (size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label && i != anchor_index) candidates.push_back(i);
  if (candidates.empty())
    throw std::runtime_error("sample_positive: class " + std::to_string(label) +
                             " has a single sample");
  return candidates[static_cast<size_t>(
      rng.uniform_int(0, static_cast<int64_t>(candidates.size()) - 1))];
}

PairBatch make_pair_batch(const std::vector<int>& labels, const std::vector<size_t>& anchors,
                          Rng& rng) {
  PairBatch batch;
  batch.anchors = anchors;
  batch.positives.reserve(anchors.size());
  batch.labels.reserve(anchors.size());
  for (size_t a : anchors) {
    batch.positives.push_back(sample_positive(labels, a, rng));
    batch.labels.push_back(labels[a]);
  }
  return batch;
}

ClassIndex::ClassIndex(const std::vector<int>& labels) : labels_(labels) {
  int max_label = -1;
  for (int l : labels) max_label = std::max(max_label, l);
  by_class_.resize(static_cast<size_t>(max_label + 1));
  for (size_t i = 0; i < labels.size(); ++i)
    by_class_[static_cast<size_t>(labels[i])].push_back(i);
}

size_t ClassIndex::sample_positive(size_t anchor_index, Rng& rng) const {
  const auto& members = by_class_[static_cast<size_t>(labels_[anchor_index])];
  size_t m = members.size();
  if (m < 2)
    throw std::runtime_error("sample_positive: class " +
                             std::to_string(labels_[anchor_index]) + " has a single sample");
  size_t j = static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(m) - 2));
  return members[j] == anchor_index ? members[m - 1] : members[j];
}

}  // namespace partrep::forge
