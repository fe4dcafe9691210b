#pragma once

#include <vector>

#include "partrep/core/image.hpp"
#include "partrep/core/tensor.hpp"
#include "partrep/vae/vae.hpp"

namespace partrep::eval {

/// Per-dimension mean and standard deviation of mu over a reference set.
struct LatentStats {
  std::vector<float> mean;
  std::vector<float> stddev;
};

LatentStats compute_latent_stats(const Tensor<float>& mu);

struct TraversalConfig {
  double t_min = -4.0;
  double t_max = 4.0;
  int steps = 9;           // odd puts the exact reconstruction at center
  std::vector<int> dims;   // empty = all latent dimensions

  void validate(int latent_dim) const;
  std::vector<double> coefficients() const;
};

/// Decoded images for every (dimension, step): row i column j decodes mu
/// with dimension dims[i] shifted by t_j * sigma_i.
struct TraversalGrid {
  std::vector<int> dims;
  std::vector<double> coefficients;
  int image_h = 0, image_w = 0;
  std::vector<Tensor<float>> cells;  // dims.size() * steps, row-major CHW decodes
  Tensor<float> base_mu;             // [latent]

  const Tensor<float>& cell(size_t dim_index, size_t step) const {
    return cells[dim_index * coefficients.size() + step];
  }
};

TraversalGrid traversal_grid(const vae::VaeModel<float>& model, const Tensor<float>& image_chw,
                             const LatentStats& stats, const TraversalConfig& config);

/// Tiles the grid (rows = dimensions, columns = steps) into one image.
RgbImage grid_to_image(const TraversalGrid& grid, int pad = 2);

/// Generic tiler used by the figure writers.
RgbImage tile_images(const std::vector<RgbImage>& images, int rows, int cols, int pad = 2);

}  // namespace partrep::eval
