#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace partrep {

/// Contract every partitioned embedding obeys: the first content_dim
/// coordinates are the content part, the next style_dim the style part,
/// and alpha weights the style term against the content term.
struct PartitionSpec {
  int64_t content_dim = 0;
  int64_t style_dim = 0;
  double alpha = 1.0;

  PartitionSpec() = default;
  PartitionSpec(int64_t content, int64_t style, double a)
      : content_dim(content), style_dim(style), alpha(a) {
    validate();
  }

  int64_t total_dim() const { return content_dim + style_dim; }

  void validate() const {
    if (content_dim < 1) throw std::invalid_argument("PartitionSpec: content_dim must be >= 1");
    if (style_dim < 1) throw std::invalid_argument("PartitionSpec: style_dim must be >= 1");
    if (alpha < 0.0) throw std::invalid_argument("PartitionSpec: alpha must be >= 0");
  }

  bool operator==(const PartitionSpec& o) const {
    return content_dim == o.content_dim && style_dim == o.style_dim && alpha == o.alpha;
  }
};

/// A real vector of length content_dim + style_dim with designated views.
template <class T>
struct PartitionedEmbedding {
  std::vector<T> values;
  PartitionSpec spec;

  PartitionedEmbedding() = default;
  PartitionedEmbedding(std::vector<T> v, PartitionSpec s) : values(std::move(v)), spec(s) {
    if (static_cast<int64_t>(values.size()) != spec.total_dim())
      throw std::invalid_argument("PartitionedEmbedding: length != content_dim + style_dim");
  }

  std::span<const T> content() const { return {values.data(), static_cast<size_t>(spec.content_dim)}; }
  std::span<const T> style() const {
    return {values.data() + spec.content_dim, static_cast<size_t>(spec.style_dim)};
  }
  std::span<T> content() { return {values.data(), static_cast<size_t>(spec.content_dim)}; }
  std::span<T> style() {
    return {values.data() + spec.content_dim, static_cast<size_t>(spec.style_dim)};
  }
};

/// Splits a raw vector into (content, style) copies per the spec.
template <class T>
std::pair<std::vector<T>, std::vector<T>> split(const std::vector<T>& v, const PartitionSpec& spec) {
  if (static_cast<int64_t>(v.size()) != spec.total_dim())
    throw std::invalid_argument("split: vector length != content_dim + style_dim");
  std::vector<T> content(v.begin(), v.begin() + spec.content_dim);
  std::vector<T> style(v.begin() + spec.content_dim, v.end());
  return {std::move(content), std::move(style)};
}

/// Exchanges the style parts of two embeddings, keeping each content part.
template <class T>
std::pair<PartitionedEmbedding<T>, PartitionedEmbedding<T>> swap_styles(
    const PartitionedEmbedding<T>& z1, const PartitionedEmbedding<T>& z2) {
  if (!(z1.spec == z2.spec)) throw std::invalid_argument("swap_styles: spec mismatch");
  PartitionedEmbedding<T> a = z1, b = z2;
  std::copy(z2.values.begin() + z2.spec.content_dim, z2.values.end(),
            a.values.begin() + a.spec.content_dim);
  std::copy(z1.values.begin() + z1.spec.content_dim, z1.values.end(),
            b.values.begin() + b.spec.content_dim);
  return {std::move(a), std::move(b)};
}

}  // namespace partrep
