#include "partrep/byol/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "partrep/nn/adam.hpp"
#include "partrep/vae/train.hpp"  // dataset_to_tensor

using nlohmann::json;

namespace partrep::byol {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<nn::ParamRef<float>> predictor_state(MlpHead<float>& pred) {
  nn::ParamRefs<float> p;
  pred.collect(p);
  std::vector<nn::ParamRef<float>> out = p.items;
  pred.collect_buffers(out);
  return out;
}

void copy_state(std::vector<nn::ParamRef<float>>& dst, std::vector<nn::ParamRef<float>>& src) {
  if (dst.size() != src.size()) throw std::logic_error("copy_state: size mismatch");
  for (size_t i = 0; i < dst.size(); ++i) *dst[i].value = *src[i].value;
}

json spec_to_meta(const ByolSpec& s) {
  return json{{"image_size", s.image_size},
              {"in_channels", s.in_channels},
              {"stem_channels", s.stem_channels},
              {"stage_channels", s.stage_channels},
              {"blocks_per_stage", s.blocks_per_stage},
              {"repr_width", s.repr_width},
              {"content_dim", s.content_dim},
              {"style_dim", s.style_dim},
              {"alpha", s.alpha},
              {"hidden_mult", s.hidden_mult}};
}

}  // namespace

ByolSpec byol_spec_from_meta(const json& meta) {
  ByolSpec s;
  s.image_size = meta.at("image_size").get<int>();
  s.in_channels = meta.at("in_channels").get<int>();
  s.stem_channels = meta.at("stem_channels").get<int>();
  s.stage_channels = meta.at("stage_channels").get<std::vector<int>>();
  s.blocks_per_stage = meta.at("blocks_per_stage").get<int>();
  s.repr_width = meta.at("repr_width").get<int>();
  s.content_dim = meta.at("content_dim").get<int>();
  s.style_dim = meta.at("style_dim").get<int>();
  s.alpha = meta.at("alpha").get<double>();
  s.hidden_mult = meta.at("hidden_mult").get<int>();
  return s;
}

ByolNetworks::ByolNetworks(const ByolSpec& spec)
    : online(spec, "online"),
      predictor("predictor", spec.repr_width, spec.hidden_mult * spec.repr_width,
                spec.repr_width),
      target(spec, "target") {}

void ByolNetworks::init(Rng& rng) {
  online.init(rng);
  predictor.init(rng);
  auto online_state = full_state(online);
  auto target_state = full_state(target);
  copy_state(target_state, online_state);
}

double EmaSchedule::tau_at(int64_t step) const {
  if (!cosine || total_steps <= 0) return tau_base;
  double progress = std::min(1.0, static_cast<double>(step) / static_cast<double>(total_steps));
  return 1.0 - (1.0 - tau_base) * (std::cos(kPi * progress) + 1.0) / 2.0;
}

SymmetricLossResult symmetric_pr_byol_loss(ByolNetworks& nets, const Tensor<float>& view1,
                                           const Tensor<float>& view2, bool training,
                                           bool backward) {
  const ByolSpec& spec = nets.online.spec();
  PartitionSpec part = spec.partition();
  int64_t batch = view1.dim(0);
  int64_t width = spec.repr_width;
  float inv_b = 1.0f / static_cast<float>(batch);
  const float eps = 1e-12f;

  ByolEncoder<float>::Cache oc1, oc2;
  MlpHead<float>::Cache pc1, pc2;
  Tensor<float> proj1 = nets.online.project(view1, oc1, training);
  Tensor<float> proj2 = nets.online.project(view2, oc2, training);
  Tensor<float> pred1 = nets.predictor.forward(proj1, pc1, training);
  Tensor<float> pred2 = nets.predictor.forward(proj2, pc2, training);

  // Target projections: forward only, gradient-free by construction.
  ByolEncoder<float>::Cache tc1, tc2;
  Tensor<float> tproj1 = nets.target.project(view1, tc1, training);
  Tensor<float> tproj2 = nets.target.project(view2, tc2, training);

  SymmetricLossResult out;
  Tensor<float> dpred1({batch, width}), dpred2({batch, width});
  float c1 = 0, s1 = 0, c2 = 0, s2 = 0;
  for (int64_t b = 0; b < batch; ++b) {
    auto p1 = pr_loss_normalized_grad<float>(pred1.data() + b * width, tproj2.data() + b * width,
                                             part, eps, inv_b,
                                             backward ? dpred1.data() + b * width : nullptr);
    auto p2 = pr_loss_normalized_grad<float>(pred2.data() + b * width, tproj1.data() + b * width,
                                             part, eps, inv_b,
                                             backward ? dpred2.data() + b * width : nullptr);
    c1 += p1.content_distance;
    s1 += p1.style_distance;
    c2 += p2.content_distance;
    s2 += p2.style_distance;
  }
  float alpha = static_cast<float>(part.alpha);
  out.dir1 = {c1 * inv_b, s1 * inv_b, c1 * inv_b - alpha * s1 * inv_b};
  out.dir2 = {c2 * inv_b, s2 * inv_b, c2 * inv_b - alpha * s2 * inv_b};
  out.value = out.dir1.total + out.dir2.total;

  if (backward) {
    Tensor<float> dproj1 = nets.predictor.backward(dpred1, pc1);
    Tensor<float> dproj2 = nets.predictor.backward(dpred2, pc2);
    nets.online.backward(dproj1, oc1);
    nets.online.backward(dproj2, oc2);
  }
  return out;
}

ByolTrainResult train_byol(const ByolTrainConfig& cfg, const forge::ColoredDataset& data,
                           const runner::Checkpoint* resume, const std::string* save_path) {
  cfg.spec.validate();
  if (data.samples.empty()) throw std::invalid_argument("train_byol: empty dataset");

  ByolTrainResult result{ByolNetworks(cfg.spec), {}, 0, cfg};
  ByolNetworks& nets = result.nets;

  nn::ParamRefs<float> online_params;
  nets.online.collect(online_params);
  nets.predictor.collect(online_params);
  nn::Adam<float> opt(online_params, static_cast<float>(cfg.lr));

  auto online_state = full_state(nets.online);
  auto target_state = full_state(nets.target);
  auto pred_state = predictor_state(nets.predictor);

  int start_epoch = 0;
  int64_t global_step = 0;
  if (resume) {
    if (resume->header.kind != "byol")
      throw std::runtime_error("train_byol: checkpoint kind is not 'byol'");
    for (auto& p : online_state) *p.value = resume->at(p.name);
    for (auto& p : target_state) *p.value = resume->at(p.name);
    for (auto& p : pred_state) *p.value = resume->at(p.name);
    for (size_t i = 0; i < online_params.items.size(); ++i) {
      opt.moment1()[i] = resume->at("adam.m." + online_params.items[i].name);
      opt.moment2()[i] = resume->at("adam.v." + online_params.items[i].name);
    }
    opt.set_step_count(resume->header.meta.at("adam_step").get<int64_t>());
    start_epoch = resume->header.meta.at("epoch").get<int>();
    global_step = resume->header.meta.at("global_step").get<int64_t>();
    const Tensor<float>& hist = resume->at("loss_history");
    result.history.assign(hist.data(), hist.data() + hist.numel());
  } else {
    Rng init_rng(derive_seed(cfg.seed, 0xb101u));
    nets.init(init_rng);
  }
  result.epoch = start_epoch;

  Tensor<float> images = vae::dataset_to_tensor(data);
  int64_t n = images.dim(0);
  int64_t per = images.numel() / n;
  int64_t steps_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
  EmaSchedule ema = cfg.ema;
  if (ema.total_steps == 0) ema.total_steps = steps_per_epoch * cfg.epochs;

  int out_size = cfg.policy.view1.out_size;
  for (int epoch = start_epoch; epoch < cfg.epochs; ++epoch) {
    Rng order_rng(derive_seed(cfg.seed, 0x0e0cu, static_cast<uint64_t>(epoch)));
    std::vector<size_t> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    for (size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1],
                order[static_cast<size_t>(order_rng.uniform_int(0, static_cast<int64_t>(i) - 1))]);

    for (int64_t step = 0; step < steps_per_epoch; ++step, ++global_step) {
      size_t begin = static_cast<size_t>(step) * cfg.batch_size;
      size_t end = std::min(begin + cfg.batch_size, static_cast<size_t>(n));
      int64_t b_count = static_cast<int64_t>(end - begin);

      Tensor<float> v1({b_count, 3, out_size, out_size});
      Tensor<float> v2({b_count, 3, out_size, out_size});
      int64_t view_per = 3LL * out_size * out_size;
      for (int64_t b = 0; b < b_count; ++b) {
        size_t idx = order[begin + static_cast<size_t>(b)];
        Tensor<float> img({3, images.dim(2), images.dim(3)});
        std::copy(images.data() + static_cast<int64_t>(idx) * per,
                  images.data() + static_cast<int64_t>(idx + 1) * per, img.data());
        uint64_t aug_seed = derive_seed(cfg.seed, 0xa069u, static_cast<uint64_t>(global_step) * n + idx);
        auto [a, bview] = forge::augment_two_views(img, cfg.policy, aug_seed);
        std::copy(a.data(), a.data() + view_per, v1.data() + b * view_per);
        std::copy(bview.data(), bview.data() + view_per, v2.data() + b * view_per);
      }

      opt.zero_grad();
      SymmetricLossResult loss = symmetric_pr_byol_loss(nets, v1, v2, true, true);
      if (!std::isfinite(loss.value)) {
        std::ostringstream os;
        os << "train_byol: non-finite loss at epoch " << epoch << " step " << step
           << " (dir1 c=" << loss.dir1.content_distance << " s=" << loss.dir1.style_distance
           << ", dir2 c=" << loss.dir2.content_distance << " s=" << loss.dir2.style_distance
           << ")";
        throw std::runtime_error(os.str());
      }
      opt.step();
      float tau = static_cast<float>(ema.tau_at(global_step));
      ema_update(target_state, online_state, tau);
      result.history.push_back(loss.value);
    }
    result.epoch = epoch + 1;
  }

  if (save_path) {
    json meta;
    meta["spec"] = spec_to_meta(cfg.spec);
    meta["epoch"] = result.epoch;
    meta["seed"] = cfg.seed;
    meta["adam_step"] = opt.step_count();
    meta["global_step"] = global_step;
    meta["tau_base"] = cfg.ema.tau_base;
    meta["roles"] = json::array({"online", "target", "predictor"});

    std::vector<std::pair<std::string, const Tensor<float>*>> tensors;
    for (auto& p : online_state) tensors.emplace_back(p.name, p.value);
    for (auto& p : target_state) tensors.emplace_back(p.name, p.value);
    for (auto& p : pred_state) tensors.emplace_back(p.name, p.value);
    for (size_t i = 0; i < online_params.items.size(); ++i) {
      tensors.emplace_back("adam.m." + online_params.items[i].name, &opt.moment1()[i]);
      tensors.emplace_back("adam.v." + online_params.items[i].name, &opt.moment2()[i]);
    }
    Tensor<float> hist({static_cast<int64_t>(result.history.size())});
    std::copy(result.history.begin(), result.history.end(), hist.data());
    tensors.emplace_back("loss_history", &hist);
    runner::save_checkpoint(*save_path, "byol", meta, tensors);
  }
  return result;
}

ByolNetworks load_byol(const runner::Checkpoint& ckpt) {
  if (ckpt.header.kind != "byol")
    throw std::runtime_error("load_byol: checkpoint kind '" + ckpt.header.kind +
                             "' is not 'byol'");
  ByolNetworks nets(byol_spec_from_meta(ckpt.header.meta.at("spec")));
  auto online_state = full_state(nets.online);
  auto target_state = full_state(nets.target);
  auto pred_state = predictor_state(nets.predictor);
  for (auto& p : online_state) *p.value = ckpt.at(p.name);
  for (auto& p : target_state) *p.value = ckpt.at(p.name);
  for (auto& p : pred_state) *p.value = ckpt.at(p.name);
  return nets;
}

Tensor<float> project_all(ByolEncoder<float>& enc, const Tensor<float>& images, int batch_size) {
  int64_t n = images.dim(0);
  int64_t width = enc.spec().repr_width;
  Tensor<float> out({n, width});
  if (n == 0) return out;
  int64_t per = images.numel() / n;
  for (int64_t begin = 0; begin < n; begin += batch_size) {
    int64_t end = std::min<int64_t>(begin + batch_size, n);
    Tensor<float> batch({end - begin, images.dim(1), images.dim(2), images.dim(3)});
    std::copy(images.data() + begin * per, images.data() + end * per, batch.data());
    ByolEncoder<float>::Cache cache;
    Tensor<float> proj = enc.project(batch, cache, false);
    std::copy(proj.data(), proj.data() + (end - begin) * width, out.data() + begin * width);
  }
  return out;
}

Tensor<float> features_all(ByolEncoder<float>& enc, const Tensor<float>& images, int batch_size) {
  int64_t n = images.dim(0);
  int64_t feat = enc.feature_dim();
  Tensor<float> out({n, feat});
  if (n == 0) return out;
  int64_t per = images.numel() / n;
  for (int64_t begin = 0; begin < n; begin += batch_size) {
    int64_t end = std::min<int64_t>(begin + batch_size, n);
    Tensor<float> batch({end - begin, images.dim(1), images.dim(2), images.dim(3)});
    std::copy(images.data() + begin * per, images.data() + end * per, batch.data());
    ByolEncoder<float>::Cache cache;
    Tensor<float> f = enc.features(batch, cache, false);
    std::copy(f.data(), f.data() + (end - begin) * feat, out.data() + begin * feat);
  }
  return out;
}

}  // namespace partrep::byol
