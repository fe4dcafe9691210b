#include "partrep/vae/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "partrep/forge/pairs.hpp"
#include "partrep/nn/adam.hpp"

using nlohmann::json;

namespace partrep::vae {

namespace {

json spec_to_meta(const ConvVaeSpec& spec) {
  return json{{"in_channels", spec.in_channels},
              {"image_size", spec.image_size},
              {"channels", spec.channels},
              {"latent_dim", spec.latent_dim},
              {"content_dim", spec.content_dim},
              {"style_dim", spec.style_dim},
              {"alpha", spec.alpha},
              {"mse_recon", spec.mse_recon},
              {"symmetrize_elbo", spec.symmetrize_elbo}};
}

Tensor<float> gather_batch(const Tensor<float>& all, const std::vector<size_t>& idx) {
  int64_t per = all.numel() / all.dim(0);
  Tensor<float> out({static_cast<int64_t>(idx.size()), all.dim(1), all.dim(2), all.dim(3)});
  for (size_t b = 0; b < idx.size(); ++b)
    std::copy(all.data() + static_cast<int64_t>(idx[b]) * per,
              all.data() + static_cast<int64_t>(idx[b] + 1) * per,
              out.data() + static_cast<int64_t>(b) * per);
  return out;
}

std::string batch_diagnostics(const Tensor<float>& xa, const VaeLossBreakdown<float>& loss,
                              int epoch, int64_t step) {
  float mn = xa[0], mx = xa[0];
  double mean = 0;
  for (int64_t i = 0; i < xa.numel(); ++i) {
    mn = std::min(mn, xa[i]);
    mx = std::max(mx, xa[i]);
    mean += xa[i];
  }
  std::ostringstream os;
  os << "non-finite loss at epoch " << epoch << " step " << step
     << " (recon=" << loss.reconstruction << " kl=" << loss.kl << " pr=" << loss.pr
     << "); batch stats min=" << mn << " max=" << mx << " mean=" << mean / xa.numel();
  return os.str();
}

Tensor<float> history_tensor(const std::vector<StepLoss>& history) {
  Tensor<float> t({static_cast<int64_t>(history.size()), 4});
  for (size_t i = 0; i < history.size(); ++i) {
    t[static_cast<int64_t>(i) * 4 + 0] = history[i].reconstruction;
    t[static_cast<int64_t>(i) * 4 + 1] = history[i].kl;
    t[static_cast<int64_t>(i) * 4 + 2] = history[i].pr;
    t[static_cast<int64_t>(i) * 4 + 3] = history[i].total;
  }
  return t;
}

}  // namespace

Tensor<float> dataset_to_tensor(const forge::ColoredDataset& data) {
  if (data.samples.empty()) return Tensor<float>({0, 3, 0, 0});
  int h = data.samples[0].image.h, w = data.samples[0].image.w;
  Tensor<float> out({static_cast<int64_t>(data.samples.size()), 3, h, w});
  int64_t per = 3LL * h * w;
  for (size_t i = 0; i < data.samples.size(); ++i) {
    auto chw = to_chw<float>(data.samples[i].image);
    std::copy(chw.data(), chw.data() + per, out.data() + static_cast<int64_t>(i) * per);
  }
  return out;
}

ConvVaeSpec vae_spec_from_meta(const json& meta) {
  ConvVaeSpec spec;
  spec.in_channels = meta.at("in_channels").get<int>();
  spec.image_size = meta.at("image_size").get<int>();
  spec.channels = meta.at("channels").get<std::vector<int>>();
  spec.latent_dim = meta.at("latent_dim").get<int>();
  spec.content_dim = meta.at("content_dim").get<int>();
  spec.style_dim = meta.at("style_dim").get<int>();
  spec.alpha = meta.at("alpha").get<double>();
  spec.mse_recon = meta.at("mse_recon").get<bool>();
  spec.symmetrize_elbo = meta.at("symmetrize_elbo").get<bool>();
  return spec;
}

VaeModel<float> load_vae_model(const runner::Checkpoint& ckpt) {
  if (ckpt.header.kind != "vae")
    throw std::runtime_error("load_vae_model: checkpoint kind '" + ckpt.header.kind +
                             "' is not 'vae'");
  VaeModel<float> model(vae_spec_from_meta(ckpt.header.meta.at("spec")));
  nn::ParamRefs<float> params;
  model.collect(params);
  for (auto& p : params.items) *p.value = ckpt.at(p.name);
  return model;
}

std::vector<StepLoss> history_from_checkpoint(const runner::Checkpoint& ckpt) {
  std::vector<StepLoss> history;
  if (!ckpt.has("loss_history")) return history;
  const Tensor<float>& t = ckpt.at("loss_history");
  history.resize(static_cast<size_t>(t.dim(0)));
  for (size_t i = 0; i < history.size(); ++i) {
    history[i] = {t[static_cast<int64_t>(i) * 4 + 0], t[static_cast<int64_t>(i) * 4 + 1],
                  t[static_cast<int64_t>(i) * 4 + 2], t[static_cast<int64_t>(i) * 4 + 3]};
  }
  return history;
}

VaeTrainResult train_vae(const VaeTrainConfig& cfg, const forge::ColoredDataset& data,
                         const runner::Checkpoint* resume, const std::string* save_path) {
  cfg.spec.validate();
  if (data.samples.empty()) throw std::invalid_argument("train_vae: empty dataset");

  VaeTrainResult result;
  result.config = cfg;
  result.model = VaeModel<float>(cfg.spec);

  nn::ParamRefs<float> params;
  result.model.collect(params);
  nn::Adam<float> opt(params, static_cast<float>(cfg.lr));

  int start_epoch = 0;
  if (resume) {
    if (resume->header.kind != "vae")
      throw std::runtime_error("train_vae: checkpoint kind is not 'vae'");
    for (auto& p : params.items) *p.value = resume->at(p.name);
    for (size_t i = 0; i < params.items.size(); ++i) {
      opt.moment1()[i] = resume->at("adam.m." + params.items[i].name);
      opt.moment2()[i] = resume->at("adam.v." + params.items[i].name);
    }
    opt.set_step_count(resume->header.meta.at("adam_step").get<int64_t>());
    start_epoch = resume->header.meta.at("epoch").get<int>();
    result.history = history_from_checkpoint(*resume);
  } else {
    Rng init_rng(derive_seed(cfg.seed, 0x1217u));
    result.model.init(init_rng);
  }
  result.epoch = start_epoch;

  Tensor<float> images = dataset_to_tensor(data);
  std::vector<int> labels = data.labels();
  forge::ClassIndex index(labels);
  int64_t n = images.dim(0);
  int64_t steps_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;

  for (int epoch = start_epoch; epoch < cfg.epochs; ++epoch) {
    Rng order_rng(derive_seed(cfg.seed, 0x0e0cu, static_cast<uint64_t>(epoch)));
    Rng pos_rng(derive_seed(cfg.seed, 0x9005u, static_cast<uint64_t>(epoch)));
    Rng reparam_rng(derive_seed(cfg.seed, 0x4e94u, static_cast<uint64_t>(epoch)));

    std::vector<size_t> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    for (size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1],
                order[static_cast<size_t>(order_rng.uniform_int(0, static_cast<int64_t>(i) - 1))]);

    for (int64_t step = 0; step < steps_per_epoch; ++step) {
      size_t begin = static_cast<size_t>(step) * cfg.batch_size;
      size_t end = std::min(begin + cfg.batch_size, static_cast<size_t>(n));
      std::vector<size_t> anchors(order.begin() + begin, order.begin() + end);
      std::vector<size_t> positives;
      positives.reserve(anchors.size());
      for (size_t a : anchors) positives.push_back(index.sample_positive(a, pos_rng));

      Tensor<float> xa = gather_batch(images, anchors);
      Tensor<float> xp = gather_batch(images, positives);

      opt.zero_grad();
      VaeLossBreakdown<float> loss = pr_vae_loss(result.model, xa, xp, reparam_rng, true);
      if (!std::isfinite(loss.total))
        throw std::runtime_error(batch_diagnostics(xa, loss, epoch, step));
      nn::clip_global_norm(opt.params(), static_cast<float>(cfg.clip_norm));
      opt.step();
      result.history.push_back({loss.reconstruction, loss.kl, loss.pr, loss.total});
    }
    result.epoch = epoch + 1;
  }

  if (save_path) {
    json meta;
    meta["spec"] = spec_to_meta(cfg.spec);
    meta["epoch"] = result.epoch;
    meta["seed"] = cfg.seed;
    meta["adam_step"] = opt.step_count();
    meta["lr"] = cfg.lr;
    meta["batch_size"] = cfg.batch_size;

    std::vector<std::pair<std::string, const Tensor<float>*>> tensors;
    for (auto& p : params.items) tensors.emplace_back(p.name, p.value);
    for (size_t i = 0; i < params.items.size(); ++i) {
      tensors.emplace_back("adam.m." + params.items[i].name, &opt.moment1()[i]);
      tensors.emplace_back("adam.v." + params.items[i].name, &opt.moment2()[i]);
    }
    Tensor<float> hist = history_tensor(result.history);
    tensors.emplace_back("loss_history", &hist);
    runner::save_checkpoint(*save_path, "vae", meta, tensors);
  }
  return result;
}

Tensor<float> encode_mu(const VaeModel<float>& model, const Tensor<float>& images,
                        int batch_size) {
  int64_t n = images.dim(0);
  int64_t latent = model.spec().latent_dim;
  Tensor<float> mu({n, latent});
  if (n == 0) return mu;
  int64_t per = images.numel() / n;
  for (int64_t begin = 0; begin < n; begin += batch_size) {
    int64_t end = std::min<int64_t>(begin + batch_size, n);
    Tensor<float> batch({end - begin, images.dim(1), images.dim(2), images.dim(3)});
    std::copy(images.data() + begin * per, images.data() + end * per, batch.data());
    typename VaeModel<float>::EncodeCache cache;
    LatentBatch<float> lat = model.encode(batch, cache);
    std::copy(lat.mu.data(), lat.mu.data() + (end - begin) * latent, mu.data() + begin * latent);
  }
  return mu;
}

}  // namespace partrep::vae
