#include "partrep/eval/traversal.hpp"

#include <cmath>
#include <stdexcept>

namespace partrep::eval {

LatentStats compute_latent_stats(const Tensor<float>& mu) {
  int64_t n = mu.dim(0), dim = mu.dim(1);
  LatentStats stats;
  stats.mean.resize(static_cast<size_t>(dim));
  stats.stddev.resize(static_cast<size_t>(dim));
  for (int64_t d = 0; d < dim; ++d) {
    double s = 0, s2 = 0;
    for (int64_t i = 0; i < n; ++i) {
      double v = mu[i * dim + d];
      s += v;
      s2 += v * v;
    }
    double m = n > 0 ? s / static_cast<double>(n) : 0.0;
    double var = n > 0 ? std::max(0.0, s2 / static_cast<double>(n) - m * m) : 0.0;
    stats.mean[static_cast<size_t>(d)] = static_cast<float>(m);
    stats.stddev[static_cast<size_t>(d)] = static_cast<float>(std::sqrt(var));
  }
  return stats;
}

void TraversalConfig::validate(int latent_dim) const {
  if (steps < 2) throw std::invalid_argument("traversal: steps must be >= 2");
  for (int d : dims)
    if (d < 0 || d >= latent_dim)
      throw std::out_of_range("traversal: dimension index " + std::to_string(d) +
                              " outside latent space");
}

std::vector<double> TraversalConfig::coefficients() const {
  std::vector<double> out(static_cast<size_t>(steps));
  for (int j = 0; j < steps; ++j)
    out[static_cast<size_t>(j)] = t_min + (t_max - t_min) * j / (steps - 1);
  return out;
}

TraversalGrid traversal_grid(const vae::VaeModel<float>& model, const Tensor<float>& image_chw,
                             const LatentStats& stats, const TraversalConfig& config) {
  int latent = model.spec().latent_dim;
  config.validate(latent);
  if (static_cast<int>(stats.stddev.size()) != latent)
    throw std::invalid_argument("traversal: stats dimension mismatch");

  TraversalGrid grid;
  grid.dims = config.dims;
  if (grid.dims.empty())
    for (int d = 0; d < latent; ++d) grid.dims.push_back(d);
  grid.coefficients = config.coefficients();

  Tensor<float> batch({1, image_chw.dim(0), image_chw.dim(1), image_chw.dim(2)});
  std::copy(image_chw.data(), image_chw.data() + image_chw.numel(), batch.data());
  typename vae::VaeModel<float>::EncodeCache cache;
  auto lat = model.encode(batch, cache);
  grid.base_mu = lat.mu;
  grid.base_mu.reshape({latent});
  grid.image_h = static_cast<int>(image_chw.dim(1));
  grid.image_w = static_cast<int>(image_chw.dim(2));

  for (int d : grid.dims) {
    for (double t : grid.coefficients) {
      Tensor<float> z({1, latent});
      std::copy(grid.base_mu.data(), grid.base_mu.data() + latent, z.data());
      z[d] += static_cast<float>(t) * stats.stddev[static_cast<size_t>(d)];
      Tensor<float> decoded = model.decode(z);
      decoded.reshape({image_chw.dim(0), image_chw.dim(1), image_chw.dim(2)});
      grid.cells.push_back(std::move(decoded));
    }
  }
  return grid;
}

RgbImage tile_images(const std::vector<RgbImage>& images, int rows, int cols, int pad) {
  if (images.empty() || rows * cols < static_cast<int>(images.size()))
    throw std::invalid_argument("tile_images: grid smaller than image count");
  int h = images[0].h, w = images[0].w;
  RgbImage out = RgbImage::black(rows * h + (rows + 1) * pad, cols * w + (cols + 1) * pad);
  for (size_t i = 0; i < images.size(); ++i) {
    int r = static_cast<int>(i) / cols, c = static_cast<int>(i) % cols;
    int y0 = pad + r * (h + pad), x0 = pad + c * (w + pad);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        for (int ch = 0; ch < 3; ++ch)
          out.at(y0 + y, x0 + x, ch) = images[i].at(y, x, ch);
  }
  return out;
}

RgbImage grid_to_image(const TraversalGrid& grid, int pad) {
  std::vector<RgbImage> tiles;
  tiles.reserve(grid.cells.size());
  for (const auto& cell : grid.cells) tiles.push_back(from_chw(cell));
  return tile_images(tiles, static_cast<int>(grid.dims.size()),
                     static_cast<int>(grid.coefficients.size()), pad);
}

}  // namespace partrep::eval
