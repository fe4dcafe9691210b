#include "partrep/eval/figures.hpp"

#include "partrep/eval/traversal.hpp"
#include "partrep/prcore/partition.hpp"

namespace partrep::eval {

StyleSwapFigure style_swap_figure(const vae::VaeModel<float>& model, const Tensor<float>& x1_chw,
                                  const Tensor<float>& x2_chw) {
  int latent = model.spec().latent_dim;
  int64_t c = x1_chw.dim(0), h = x1_chw.dim(1), w = x1_chw.dim(2);

  Tensor<float> batch({2, c, h, w});
  std::copy(x1_chw.data(), x1_chw.data() + x1_chw.numel(), batch.data());
  std::copy(x2_chw.data(), x2_chw.data() + x2_chw.numel(), batch.data() + x1_chw.numel());
  typename vae::VaeModel<float>::EncodeCache cache;
  auto lat = model.encode(batch, cache);

  PartitionSpec part = model.spec().partition();
  StyleSwapFigure fig;
  fig.mu1 = Tensor<float>({latent});
  fig.mu2 = Tensor<float>({latent});
  std::copy(lat.mu.data(), lat.mu.data() + latent, fig.mu1.data());
  std::copy(lat.mu.data() + latent, lat.mu.data() + 2 * latent, fig.mu2.data());

  PartitionedEmbedding<float> z1(std::vector<float>(fig.mu1.data(), fig.mu1.data() + latent), part);
  PartitionedEmbedding<float> z2(std::vector<float>(fig.mu2.data(), fig.mu2.data() + latent), part);
  auto [z12, z21] = swap_styles(z1, z2);

  Tensor<float> zb({2, latent});
  std::copy(z12.values.begin(), z12.values.end(), zb.data());
  std::copy(z21.values.begin(), z21.values.end(), zb.data() + latent);
  Tensor<float> decoded = model.decode(zb);

  int64_t per = c * h * w;
  fig.recon_c1_s2 = Tensor<float>({c, h, w});
  fig.recon_c2_s1 = Tensor<float>({c, h, w});
  std::copy(decoded.data(), decoded.data() + per, fig.recon_c1_s2.data());
  std::copy(decoded.data() + per, decoded.data() + 2 * per, fig.recon_c2_s1.data());
  return fig;
}

RgbImage swap_figure_image(const Tensor<float>& x1_chw, const Tensor<float>& x2_chw,
                           const StyleSwapFigure& fig) {
  std::vector<RgbImage> tiles{from_chw(x1_chw), from_chw(x2_chw), from_chw(fig.recon_c1_s2),
                              from_chw(fig.recon_c2_s1)};
  return tile_images(tiles, 1, 4);
}

}  // namespace partrep::eval
