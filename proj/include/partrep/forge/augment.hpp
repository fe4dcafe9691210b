#pragma once

#include <cstdint>
#include <utility>

#include "partrep/core/image.hpp"
#include "partrep/core/rng.hpp"
#include "partrep/core/tensor.hpp"

namespace partrep::forge {

/// One view's augmentation recipe. All probabilities in [0,1]; crop scale
/// within (0,1]. Operations run in the fixed order: resized crop,
/// horizontal flip, color jitter, grayscale, blur, solarize.
struct AugmentationPolicy {
  double crop_scale_min = 0.08;
  double crop_scale_max = 1.0;
  double crop_aspect_min = 3.0 / 4.0;
  double crop_aspect_max = 4.0 / 3.0;
  double hflip_p = 0.5;
  double jitter_p = 0.8;
  double brightness = 0.4;
  double contrast = 0.4;
  double saturation = 0.2;
  double hue = 0.1;
  double grayscale_p = 0.2;
  double blur_p = 1.0;
  double blur_sigma_min = 0.1;
  double blur_sigma_max = 2.0;
  double solarize_p = 0.0;
  double solarize_threshold = 0.5;
  int out_size = 32;

  void validate() const;
};

/// The two-view recipe: asymmetric blur/solarize probabilities
/// (view one blurs always and never solarizes; view two blurs rarely and
/// solarizes sometimes).
struct TwoViewPolicy {
  AugmentationPolicy view1;
  AugmentationPolicy view2;
};

/// Conventional dual-network defaults at the given resolution.
TwoViewPolicy default_two_view_policy(int out_size);

/// Identity recipe: fixed full-frame crop, everything else off.
AugmentationPolicy identity_policy(int out_size);

/// Applies the policy to a CHW float image in [0,1].
Tensor<float> augment_view(const Tensor<float>& img, const AugmentationPolicy& policy, Rng& rng);

/// Two independently augmented views; deterministic for a fixed seed.
std::pair<Tensor<float>, Tensor<float>> augment_two_views(const Tensor<float>& img,
                                                          const TwoViewPolicy& policy,
                                                          uint64_t seed);

std::pair<RgbImage, RgbImage> augment_two_views(const RgbImage& img, const TwoViewPolicy& policy,
                                                uint64_t seed);

/// Bilinear resize of a CHW float image.
Tensor<float> resize_bilinear(const Tensor<float>& img, int out_h, int out_w);

}  // namespace partrep::forge
