#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "partrep/forge/colorize.hpp"
#include "partrep/forge/synth.hpp"

namespace partrep::forge {

/// A synthesized colored dataset plus the provenance needed to rebuild it.
struct ColoredDataset {
  std::vector<ColoredMnistSample> samples;
  ColorMode mode = ColorMode::biased;
  uint64_t seed = 0;
  ColorPalette palette;

  std::vector<int> labels() const;
  size_t size() const { return samples.size(); }
};

/// Builds the offline dataset: rendered glyphs colorized per mode.
ColoredDataset make_synthetic_colored(int count, int image_size, ColorMode mode, uint64_t seed);

/// Colorizes externally loaded grayscale images (IDX path).
ColoredDataset make_colored_from_gray(const std::vector<GrayImage>& gray, ColorMode mode,
                                      uint64_t seed);

/// Directory of numbered PNGs plus manifest.json carrying mode, seed,
/// palette and per-sample labels.
void save_dataset(const ColoredDataset& ds, const std::string& dir);
ColoredDataset load_dataset(const std::string& dir);

}  // namespace partrep::forge
