#include "partrep/forge/synth.hpp"

#include <array>
#include <cmath>

#include "partrep/core/rng.hpp"

namespace partrep::forge {

namespace {

struct Vec2 {
  double x, y;
};

// Seven-segment layout in glyph coordinates: x in [0,1], y in [0,2] with y
// up. Segment order: A top, B top-right, C bottom-right, D bottom, E
// bottom-left, F top-left, G middle.
constexpr std::array<std::array<Vec2, 2>, 7> kSegments = {{
    {{{0, 2}, {1, 2}}},  // A
    {{{1, 1}, {1, 2}}},  // B
    {{{1, 0}, {1, 1}}},  // C
    {{{0, 0}, {1, 0}}},  // D
    {{{0, 0}, {0, 1}}},  // E
    {{{0, 1}, {0, 2}}},  // F
    {{{0, 1}, {1, 1}}},  // G
}};

constexpr std::array<uint8_t, 10> kDigitSegments = {
    0b0111111,  // 0: ABCDEF
    0b0000110,  // 1: BC
    0b1011011,  // 2: ABDEG
    0b1001111,  // 3: ABCDG
    0b1100110,  // 4: BCFG
    0b1101101,  // 5: ACDFG
    0b1111101,  // 6: ACDEFG
    0b0000111,  // 7: ABC
    0b1111111,  // 8: all
    0b1101111,  // 9: ABCDFG
};

double point_segment_dist(double px, double py, Vec2 a, Vec2 b) {
  double vx = b.x - a.x, vy = b.y - a.y;
  double wx = px - a.x, wy = py - a.y;
  double len2 = vx * vx + vy * vy;
  double t = len2 > 0 ? (wx * vx + wy * vy) / len2 : 0.0;
  if (t < 0) t = 0;
  if (t > 1) t = 1;
  double dx = px - (a.x + t * vx), dy = py - (a.y + t * vy);
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

GrayImage render_glyph(int label, int image_size, uint64_t sample_seed) {
  Rng rng(sample_seed);
  double scale = rng.uniform(0.85, 1.10);
  double theta = rng.uniform(-0.18, 0.18);
  double dx = rng.uniform(-2.0, 2.0) * image_size / 28.0;
  double dy = rng.uniform(-2.0, 2.0) * image_size / 28.0;
  double half_width = rng.uniform(1.0, 1.7) * image_size / 28.0;
  double gain = rng.uniform(0.70, 1.0);

  // Glyph box ~11x16 px at size 28, scaled proportionally.
  double unit_x = 11.0 * image_size / 28.0 * scale;   // full glyph width in px
  double unit_y = 8.0 * image_size / 28.0 * scale;    // half glyph height in px
  double cx = image_size / 2.0 + dx;
  double cy = image_size / 2.0 + dy;
  double ct = std::cos(theta), st = std::sin(theta);

  auto to_px = [&](Vec2 u) {
    double gx = (u.x - 0.5) * unit_x;
    double gy = (u.y - 1.0) * unit_y;
    double rx = ct * gx - st * gy;
    double ry = st * gx + ct * gy;
    return Vec2{cx + rx, cy - ry};  // image rows grow downward
  };

  std::array<std::array<Vec2, 2>, 7> seg_px;
  uint8_t mask = kDigitSegments[static_cast<size_t>(label % 10)];
  for (size_t s = 0; s < 7; ++s) {
    seg_px[s][0] = to_px(kSegments[s][0]);
    seg_px[s][1] = to_px(kSegments[s][1]);
  }

  GrayImage img;
  img.h = img.w = image_size;
  img.label = label;
  img.pixels.assign(static_cast<size_t>(image_size) * image_size, 0);
  const double edge = 0.75;
  for (int y = 0; y < image_size; ++y) {
    for (int x = 0; x < image_size; ++x) {
      double d = 1e9;
      for (size_t s = 0; s < 7; ++s) {
        if (!(mask & (1u << s))) continue;
        d = std::min(d, point_segment_dist(x + 0.5, y + 0.5, seg_px[s][0], seg_px[s][1]));
      }
      double a = (half_width + edge - d) / (2.0 * edge);
      if (a <= 0) continue;
      if (a > 1) a = 1;
      img.at(y, x) = static_cast<uint8_t>(std::floor(gain * 255.0 * a + 0.5));
    }
  }
  return img;
}

std::vector<GrayImage> synth_glyphs(const SynthSpec& spec) {
  std::vector<GrayImage> out;
  out.reserve(static_cast<size_t>(spec.count));
  for (int i = 0; i < spec.count; ++i)
    out.push_back(render_glyph(i % 10, spec.image_size,
                               derive_seed(spec.seed, /*stream=*/0x91f5u, static_cast<uint64_t>(i))));
  return out;
}

}  // namespace partrep::forge
