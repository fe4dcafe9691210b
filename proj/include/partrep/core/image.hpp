#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "partrep/core/tensor.hpp"

namespace partrep {

/// 8-bit grayscale image, row-major, with a class label.
struct GrayImage {
  int h = 0;
  int w = 0;
  std::vector<uint8_t> pixels;  // h*w
  int label = -1;

  uint8_t at(int y, int x) const { return pixels[static_cast<size_t>(y) * w + x]; }
  uint8_t& at(int y, int x) { return pixels[static_cast<size_t>(y) * w + x]; }
};

/// 8-bit RGB image, interleaved row-major (h*w*3), with a class label.
struct RgbImage {
  int h = 0;
  int w = 0;
  std::vector<uint8_t> pixels;  // h*w*3
  int label = -1;

  static RgbImage black(int h, int w, int label = -1) {
    RgbImage img;
    img.h = h;
    img.w = w;
    img.label = label;
    img.pixels.assign(static_cast<size_t>(h) * w * 3, 0);
    return img;
  }
  uint8_t at(int y, int x, int c) const {
    return pixels[(static_cast<size_t>(y) * w + x) * 3 + c];
  }
  uint8_t& at(int y, int x, int c) {
    return pixels[(static_cast<size_t>(y) * w + x) * 3 + c];
  }
};

/// RGB [0,1] planar CHW float view used by the models and augmentations.
template <class T>
Tensor<T> to_chw(const RgbImage& img) {
  Tensor<T> t({3, img.h, img.w});
  int64_t plane = static_cast<int64_t>(img.h) * img.w;
  for (int64_t i = 0; i < plane; ++i)
    for (int c = 0; c < 3; ++c)
      t[c * plane + i] = static_cast<T>(img.pixels[i * 3 + c]) / T(255);
  return t;
}

template <class T>
RgbImage from_chw(const Tensor<T>& t, int label = -1) {
  if (t.shape().size() != 3 || t.dim(0) != 3)
    throw std::invalid_argument("from_chw: expected (3,H,W) tensor");
  int h = static_cast<int>(t.dim(1)), w = static_cast<int>(t.dim(2));
  RgbImage img = RgbImage::black(h, w, label);
  int64_t plane = static_cast<int64_t>(h) * w;
  for (int64_t i = 0; i < plane; ++i) {
    for (int c = 0; c < 3; ++c) {
      T v = t[c * plane + i];
      if (v < T(0)) v = T(0);
      if (v > T(1)) v = T(1);
      img.pixels[i * 3 + c] = static_cast<uint8_t>(v * T(255) + T(0.5));
    }
  }
  return img;
}

}  // namespace partrep
