#pragma once

#include <cstdint>
#include <vector>

#include "partrep/core/image.hpp"

namespace partrep::forge {

// Deterministic synthetic stand-in for the MNIST-family inputs so every
// experiment can run offline: ten segment-glyph classes rendered as
// anti-aliased strokes on black, with per-sample jitter in position,
// rotation, scale, stroke width and brightness providing the within-class
// style variation.

struct SynthSpec {
  int count = 1000;
  int image_size = 28;
  uint64_t seed = 0;
};

/// Renders one glyph; `sample_seed` drives all of its jitter.
GrayImage render_glyph(int label, int image_size, uint64_t sample_seed);

/// Balanced dataset (label = index mod 10), one derived seed per sample.
std::vector<GrayImage> synth_glyphs(const SynthSpec& spec);

}  // namespace partrep::forge
