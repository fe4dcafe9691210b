#pragma once

#include "partrep/core/image.hpp"
#include "partrep/core/tensor.hpp"
#include "partrep/vae/vae.hpp"

namespace partrep::eval {

/// Fig-7-style blend: two inputs and the two reconstructions built from
/// (content of one, style of the other) mean vectors.
struct StyleSwapFigure {
  Tensor<float> mu1, mu2;          // [latent]
  Tensor<float> recon_c1_s2;       // decode(content(mu1) | style(mu2)), CHW
  Tensor<float> recon_c2_s1;       // decode(content(mu2) | style(mu1)), CHW
};

StyleSwapFigure style_swap_figure(const vae::VaeModel<float>& model, const Tensor<float>& x1_chw,
                                  const Tensor<float>& x2_chw);

/// The 4-tile row: input1, input2, swapped reconstructions.
RgbImage swap_figure_image(const Tensor<float>& x1_chw, const Tensor<float>& x2_chw,
                           const StyleSwapFigure& fig);

}  // namespace partrep::eval
