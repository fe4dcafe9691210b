#pragma once

#include <array>
#include <cstdint>

#include "partrep/core/image.hpp"
#include "partrep/core/rng.hpp"

namespace partrep::forge {

enum class ColorMode { biased, unbiased };

const char* color_mode_name(ColorMode mode);
ColorMode color_mode_from_name(const std::string& name);

/// Class id -> RGB channel triple; exactly 10 entries.
struct ColorPalette {
  std::array<std::array<int, 3>, 10> colors{};

  const std::array<int, 3>& color_for(int label) const;
  void validate() const;
};

/// The fixed per-class palette used for the biased colorization:
/// 0:(255,100,0) 1:(0,100,0) 2:(188,143,143) 3:(255,0,0) 4:(255,215,0)
/// 5:(0,255,0) 6:(65,105,225) 7:(0,225,255) 8:(0,0,255) 9:(255,20,147)
ColorPalette biased_palette();

/// hue in [0,1), s and v in [0,1] -> rgb in [0,1].
std::array<double, 3> hsv_to_rgb(double h, double s, double v);

/// One fully saturated random color; the unbiased-mode per-image draw.
std::array<int, 3> draw_random_color(Rng& rng);

/// Scales the grayscale intensity into the target color per channel:
/// out_c = round(intensity/255 * color_c), half-up. Biased mode reads the
/// palette entry for the image's label; unbiased mode draws one random
/// color for the whole image.
RgbImage inject_color(const GrayImage& img, ColorMode mode, const ColorPalette& palette,
                      Rng& rng);

/// Deterministic helper used by both modes once the color is chosen.
RgbImage apply_color(const GrayImage& img, const std::array<int, 3>& color);

struct ColoredMnistSample {
  RgbImage image;          // label carried on the image
  ColorMode mode = ColorMode::biased;
};

/// Colorizes a whole dataset; per-sample RNG streams derive from
/// (seed, index) so order never affects any sample's color.
std::vector<ColoredMnistSample> build_colored_mnist(const std::vector<GrayImage>& source,
                                                    ColorMode mode, uint64_t seed);

}  // namespace partrep::forge
