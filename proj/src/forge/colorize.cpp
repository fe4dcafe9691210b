#include "partrep/forge/colorize.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace partrep::forge {

const char* color_mode_name(ColorMode mode) {
  return mode == ColorMode::biased ? "biased" : "unbiased";
}

ColorMode color_mode_from_name(const std::string& name) {
  if (name == "biased") return ColorMode::biased;
  if (name == "unbiased") return ColorMode::unbiased;
  throw std::invalid_argument("unknown color mode: " + name);
}

const std::array<int, 3>& ColorPalette::color_for(int label) const {
  if (label < 0 || label >= static_cast<int>(colors.size()))
    throw std::invalid_argument("palette: no entry for label " + std::to_string(label));
  return colors[static_cast<size_t>(label)];
}

void ColorPalette::validate() const {
  for (const auto& c : colors)
    for (int ch : c)
      if (ch < 0 || ch > 255) throw std::invalid_argument("palette: channel outside [0,255]");
}

ColorPalette biased_palette() {
  ColorPalette p;
  p.colors = {{{255, 100, 0},
               {0, 100, 0},
               {188, 143, 143},
               {255, 0, 0},
               {255, 215, 0},
               {0, 255, 0},
               {65, 105, 225},
               {0, 225, 255},
               {0, 0, 255},
               {255, 20, 147}}};
  return p;
}

std::array<double, 3> hsv_to_rgb(double h, double s, double v) {
  h = h - std::floor(h);
  double c = v * s;
  double hp = h * 6.0;
  double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(hp) % 6) {
    case 0: r = c; g = x; break;
    case 1: r = x; g = c; break;
    case 2: g = c; b = x; break;
    case 3: g = x; b = c; break;
    case 4: r = x; b = c; break;
    default: r = c; b = x; break;
  }
  double m = v - c;
  return {r + m, g + m, b + m};
}

std::array<int, 3> draw_random_color(Rng& rng) {
  auto rgb = hsv_to_rgb(rng.uniform(), 1.0, 1.0);
  return {static_cast<int>(std::floor(rgb[0] * 255.0 + 0.5)),
          static_cast<int>(std::floor(rgb[1] * 255.0 + 0.5)),
          static_cast<int>(std::floor(rgb[2] * 255.0 + 0.5))};
}

RgbImage apply_color(const GrayImage& img, const std::array<int, 3>& color) {
  RgbImage out = RgbImage::black(img.h, img.w, img.label);
  size_t n = img.pixels.size();
  for (size_t i = 0; i < n; ++i) {
    double intensity = static_cast<double>(img.pixels[i]) / 255.0;
    for (int c = 0; c < 3; ++c)
      out.pixels[i * 3 + c] =
          static_cast<uint8_t>(std::floor(intensity * color[static_cast<size_t>(c)] + 0.5));
  }
  return out;
}

RgbImage inject_color(const GrayImage& img, ColorMode mode, const ColorPalette& palette,
                      Rng& rng) {
  if (img.h <= 0 || img.w <= 0 || img.pixels.size() != static_cast<size_t>(img.h) * img.w)
    throw std::invalid_argument("inject_color: malformed gray image");
  if (mode == ColorMode::biased) return apply_color(img, palette.color_for(img.label));
  return apply_color(img, draw_random_color(rng));
}

std::vector<ColoredMnistSample> build_colored_mnist(const std::vector<GrayImage>& source,
                                                    ColorMode mode, uint64_t seed) {
  ColorPalette palette = biased_palette();
  std::vector<ColoredMnistSample> out;
  out.reserve(source.size());
  for (size_t i = 0; i < source.size(); ++i) {
    Rng rng(derive_seed(seed, /*stream=*/0xc010u, i));
    out.push_back({inject_color(source[i], mode, palette, rng), mode});
  }
  return out;
}

}  // namespace partrep::forge
