#include "partrep/forge/augment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace partrep::forge {

namespace {

float clamp01(float v) { return v < 0.f ? 0.f : (v > 1.f ? 1.f : v); }

// Crop rectangle (top, left, h, w) then bilinear-resize to the output size.
Tensor<float> crop_resize(const Tensor<float>& img, int top, int left, int ch, int cw,
                          int out_size) {
  int h = static_cast<int>(img.dim(1)), w = static_cast<int>(img.dim(2));
  Tensor<float> out({3, out_size, out_size});
  float sy = static_cast<float>(ch) / out_size;
  float sx = static_cast<float>(cw) / out_size;
  int64_t plane_in = static_cast<int64_t>(h) * w;
  int64_t plane_out = static_cast<int64_t>(out_size) * out_size;
  for (int y = 0; y < out_size; ++y) {
    float fy = (y + 0.5f) * sy - 0.5f + top;
    int y0 = static_cast<int>(std::floor(fy));
    float wy = fy - y0;
    int y0c = std::clamp(y0, 0, h - 1), y1c = std::clamp(y0 + 1, 0, h - 1);
    for (int x = 0; x < out_size; ++x) {
      float fx = (x + 0.5f) * sx - 0.5f + left;
      int x0 = static_cast<int>(std::floor(fx));
      float wx = fx - x0;
      int x0c = std::clamp(x0, 0, w - 1), x1c = std::clamp(x0 + 1, 0, w - 1);
      for (int c = 0; c < 3; ++c) {
        const float* p = img.data() + c * plane_in;
        float v00 = p[y0c * w + x0c], v01 = p[y0c * w + x1c];
        float v10 = p[y1c * w + x0c], v11 = p[y1c * w + x1c];
        float v = (1 - wy) * ((1 - wx) * v00 + wx * v01) + wy * ((1 - wx) * v10 + wx * v11);
        out[c * plane_out + y * out_size + x] = v;
      }
    }
  }
  return out;
}

void hflip_inplace(Tensor<float>& img) {
  int h = static_cast<int>(img.dim(1)), w = static_cast<int>(img.dim(2));
  for (int c = 0; c < 3; ++c) {
    float* plane = img.data() + static_cast<int64_t>(c) * h * w;
    for (int y = 0; y < h; ++y) {
      float* row = plane + static_cast<int64_t>(y) * w;
      for (int x = 0; x < w / 2; ++x) std::swap(row[x], row[w - 1 - x]);
    }
  }
}

float luma(float r, float g, float b) { return 0.299f * r + 0.587f * g + 0.114f * b; }

void rgb_to_hsv(float r, float g, float b, float& h, float& s, float& v) {
  float mx = std::max({r, g, b}), mn = std::min({r, g, b});
  v = mx;
  float d = mx - mn;
  s = mx > 0 ? d / mx : 0.f;
  if (d == 0) {
    h = 0;
    return;
  }
  if (mx == r) h = std::fmod((g - b) / d, 6.0f);
  else if (mx == g) h = (b - r) / d + 2.0f;
  else h = (r - g) / d + 4.0f;
  h /= 6.0f;
  if (h < 0) h += 1.0f;
}

void hsv_to_rgb_f(float h, float s, float v, float& r, float& g, float& b) {
  h = h - std::floor(h);
  float c = v * s;
  float hp = h * 6.0f;
  float x = c * (1.0f - std::fabs(std::fmod(hp, 2.0f) - 1.0f));
  float r1 = 0, g1 = 0, b1 = 0;
  switch (static_cast<int>(hp) % 6) {
    case 0: r1 = c; g1 = x; break;
    case 1: r1 = x; g1 = c; break;
    case 2: g1 = c; b1 = x; break;
    case 3: g1 = x; b1 = c; break;
    case 4: r1 = x; b1 = c; break;
    default: r1 = c; b1 = x; break;
  }
  float m = v - c;
  r = r1 + m;
  g = g1 + m;
  b = b1 + m;
}

void color_jitter(Tensor<float>& img, const AugmentationPolicy& p, Rng& rng) {
  int64_t plane = img.dim(1) * img.dim(2);
  float* r = img.data();
  float* g = img.data() + plane;
  float* b = img.data() + 2 * plane;

  if (p.brightness > 0) {
    float f = static_cast<float>(rng.uniform(std::max(0.0, 1.0 - p.brightness), 1.0 + p.brightness));
    for (int64_t i = 0; i < plane; ++i) {
      r[i] = clamp01(r[i] * f);
      g[i] = clamp01(g[i] * f);
      b[i] = clamp01(b[i] * f);
    }
  }
  if (p.contrast > 0) {
    float f = static_cast<float>(rng.uniform(std::max(0.0, 1.0 - p.contrast), 1.0 + p.contrast));
    double mean = 0;
    for (int64_t i = 0; i < plane; ++i) mean += luma(r[i], g[i], b[i]);
    float m = static_cast<float>(mean / plane);
    for (int64_t i = 0; i < plane; ++i) {
      r[i] = clamp01((r[i] - m) * f + m);
      g[i] = clamp01((g[i] - m) * f + m);
      b[i] = clamp01((b[i] - m) * f + m);
    }
  }
  if (p.saturation > 0) {
    float f = static_cast<float>(rng.uniform(std::max(0.0, 1.0 - p.saturation), 1.0 + p.saturation));
    for (int64_t i = 0; i < plane; ++i) {
      float l = luma(r[i], g[i], b[i]);
      r[i] = clamp01((r[i] - l) * f + l);
      g[i] = clamp01((g[i] - l) * f + l);
      b[i] = clamp01((b[i] - l) * f + l);
    }
  }
  if (p.hue > 0) {
    float shift = static_cast<float>(rng.uniform(-p.hue, p.hue));
    for (int64_t i = 0; i < plane; ++i) {
      float h, s, v;
      rgb_to_hsv(r[i], g[i], b[i], h, s, v);
      hsv_to_rgb_f(h + shift, s, v, r[i], g[i], b[i]);
    }
  }
}

void grayscale_inplace(Tensor<float>& img) {
  int64_t plane = img.dim(1) * img.dim(2);
  float* r = img.data();
  float* g = img.data() + plane;
  float* b = img.data() + 2 * plane;
  for (int64_t i = 0; i < plane; ++i) {
    float l = luma(r[i], g[i], b[i]);
    r[i] = g[i] = b[i] = l;
  }
}

// Separable Gaussian with replicate padding; kernel size tracks the
// resolution (radius ~ out_size/20, matching the conventional recipe's
// kernel-to-image ratio).
void gaussian_blur(Tensor<float>& img, float sigma) {
  int h = static_cast<int>(img.dim(1)), w = static_cast<int>(img.dim(2));
  int radius = std::max(1, (std::max(h, w) + 10) / 20);
  std::vector<float> kernel(static_cast<size_t>(2 * radius + 1));
  float sum = 0;
  for (int i = -radius; i <= radius; ++i) {
    float v = std::exp(-0.5f * i * i / (sigma * sigma));
    kernel[static_cast<size_t>(i + radius)] = v;
    sum += v;
  }
  for (auto& v : kernel) v /= sum;

  std::vector<float> tmp(static_cast<size_t>(h) * w);
  for (int c = 0; c < 3; ++c) {
    float* plane = img.data() + static_cast<int64_t>(c) * h * w;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        float acc = 0;
        for (int i = -radius; i <= radius; ++i)
          acc += kernel[static_cast<size_t>(i + radius)] * plane[y * w + std::clamp(x + i, 0, w - 1)];
        tmp[static_cast<size_t>(y) * w + x] = acc;
      }
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        float acc = 0;
        for (int i = -radius; i <= radius; ++i)
          acc += kernel[static_cast<size_t>(i + radius)] * tmp[static_cast<size_t>(std::clamp(y + i, 0, h - 1)) * w + x];
        plane[y * w + x] = acc;
      }
  }
}

void solarize_inplace(Tensor<float>& img, float threshold) {
  for (int64_t i = 0; i < img.numel(); ++i)
    if (img[i] > threshold) img[i] = 1.0f - img[i];
}

}  // namespace

void AugmentationPolicy::validate() const {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(hflip_p) || !prob(jitter_p) || !prob(grayscale_p) || !prob(blur_p) ||
      !prob(solarize_p))
    throw std::invalid_argument("augmentation policy: probability outside [0,1]");
  if (crop_scale_min <= 0.0 || crop_scale_max > 1.0 || crop_scale_min > crop_scale_max)
    throw std::invalid_argument("augmentation policy: crop scale range outside (0,1]");
  if (out_size < 1) throw std::invalid_argument("augmentation policy: bad output size");
}

TwoViewPolicy default_two_view_policy(int out_size) {
  AugmentationPolicy base;
  base.out_size = out_size;
  TwoViewPolicy p{base, base};
  p.view1.blur_p = 1.0;
  p.view1.solarize_p = 0.0;
  p.view2.blur_p = 0.1;
  p.view2.solarize_p = 0.2;
  return p;
}

AugmentationPolicy identity_policy(int out_size) {
  AugmentationPolicy p;
  p.crop_scale_min = p.crop_scale_max = 1.0;
  p.crop_aspect_min = p.crop_aspect_max = 1.0;
  p.hflip_p = p.jitter_p = p.grayscale_p = p.blur_p = p.solarize_p = 0.0;
  p.out_size = out_size;
  return p;
}

Tensor<float> resize_bilinear(const Tensor<float>& img, int out_h, int out_w) {
  if (out_h != out_w)
    throw std::invalid_argument("resize_bilinear: only square outputs used here");
  return crop_resize(img, 0, 0, static_cast<int>(img.dim(1)), static_cast<int>(img.dim(2)),
                     out_h);
}

Tensor<float> augment_view(const Tensor<float>& img, const AugmentationPolicy& policy, Rng& rng) {
  policy.validate();
  if (img.shape().size() != 3 || img.dim(0) != 3)
    throw std::invalid_argument("augment_view: expected (3,H,W) input");
  int h = static_cast<int>(img.dim(1)), w = static_cast<int>(img.dim(2));

  // Random resized crop (with the conventional fallback to a full
  // center crop when no aspect/scale draw fits).
  int top = 0, left = 0, ch = h, cw = w;
  bool found = false;
  for (int attempt = 0; attempt < 10 && !found; ++attempt) {
    double area = static_cast<double>(h) * w * rng.uniform(policy.crop_scale_min, policy.crop_scale_max);
    double log_min = std::log(policy.crop_aspect_min), log_max = std::log(policy.crop_aspect_max);
    double aspect = std::exp(rng.uniform(log_min, log_max));
    int tw = static_cast<int>(std::lround(std::sqrt(area * aspect)));
    int th = static_cast<int>(std::lround(std::sqrt(area / aspect)));
    if (tw >= 1 && th >= 1 && tw <= w && th <= h) {
      left = static_cast<int>(rng.uniform_int(0, w - tw));
      top = static_cast<int>(rng.uniform_int(0, h - th));
      cw = tw;
      ch = th;
      found = true;
    }
  }
  if (ch > h || cw > w) throw std::invalid_argument("augment_view: crop larger than image");
  Tensor<float> view = crop_resize(img, top, left, ch, cw, policy.out_size);

  if (policy.hflip_p > 0 && rng.bernoulli(policy.hflip_p)) hflip_inplace(view);
  if (policy.jitter_p > 0 && rng.bernoulli(policy.jitter_p)) color_jitter(view, policy, rng);
  if (policy.grayscale_p > 0 && rng.bernoulli(policy.grayscale_p)) grayscale_inplace(view);
  if (policy.blur_p > 0 && rng.bernoulli(policy.blur_p))
    gaussian_blur(view, static_cast<float>(rng.uniform(policy.blur_sigma_min, policy.blur_sigma_max)));
  if (policy.solarize_p > 0 && rng.bernoulli(policy.solarize_p))
    solarize_inplace(view, static_cast<float>(policy.solarize_threshold));
  return view;
}

std::pair<Tensor<float>, Tensor<float>> augment_two_views(const Tensor<float>& img,
                                                          const TwoViewPolicy& policy,
                                                          uint64_t seed) {
  Rng rng1(derive_seed(seed, 0xa001u));
  Rng rng2(derive_seed(seed, 0xa002u));
  return {augment_view(img, policy.view1, rng1), augment_view(img, policy.view2, rng2)};
}

std::pair<RgbImage, RgbImage> augment_two_views(const RgbImage& img, const TwoViewPolicy& policy,
                                                uint64_t seed) {
  auto chw = to_chw<float>(img);
  auto [v1, v2] = augment_two_views(chw, policy, seed);
  return {from_chw(v1, img.label), from_chw(v2, img.label)};
}

}  // namespace partrep::forge
