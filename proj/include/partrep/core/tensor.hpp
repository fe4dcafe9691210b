#pragma once

#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace partrep {

/// Dense row-major tensor. Value semantics; float for training, double
/// for finite-difference checks.
template <class T>
class Tensor {
public:
  Tensor() = default;
  explicit Tensor(std::vector<int64_t> shape) : shape_(std::move(shape)) {
    data_.assign(static_cast<size_t>(count(shape_)), T(0));
  }
  Tensor(std::initializer_list<int64_t> shape)
      : Tensor(std::vector<int64_t>(shape)) {}

  static Tensor zeros(std::vector<int64_t> shape) { return Tensor(std::move(shape)); }
  static Tensor full(std::vector<int64_t> shape, T v) {
    Tensor t(std::move(shape));
    std::fill(t.data_.begin(), t.data_.end(), v);
    return t;
  }
  static Tensor from(std::vector<int64_t> shape, std::vector<T> values) {
    Tensor t;
    if (count(shape) != static_cast<int64_t>(values.size()))
      throw std::invalid_argument("Tensor::from: shape/value count mismatch");
    t.shape_ = std::move(shape);
    t.data_ = std::move(values);
    return t;
  }

  const std::vector<int64_t>& shape() const { return shape_; }
  int64_t dim(size_t i) const { return shape_.at(i); }
  int64_t numel() const { return static_cast<int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::vector<T>& vec() { return data_; }
  const std::vector<T>& vec() const { return data_; }

  T& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
  const T& operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

  /// Reinterpret the buffer with a new shape of equal element count.
  Tensor& reshape(std::vector<int64_t> shape) {
    if (count(shape) != numel())
      throw std::invalid_argument("Tensor::reshape: element count mismatch");
    shape_ = std::move(shape);
    return *this;
  }

  void zero() { std::fill(data_.begin(), data_.end(), T(0)); }

  static int64_t count(const std::vector<int64_t>& shape) {
    int64_t n = 1;
    for (int64_t d : shape) {
      if (d < 0) throw std::invalid_argument("Tensor: negative dimension");
      n *= d;
    }
    return n;
  }

private:
  std::vector<int64_t> shape_;
  std::vector<T> data_;
};

inline std::string shape_str(const std::vector<int64_t>& s) {
  std::string out = "(";
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + ")";
}

}  // namespace partrep
