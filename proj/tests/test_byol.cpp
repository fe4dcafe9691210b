#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "partrep/byol/train.hpp"
#include "partrep/nn/adam.hpp"

using namespace partrep;
using namespace partrep::byol;

namespace {

ByolSpec tiny_spec() {
  ByolSpec spec;
  spec.image_size = 16;
  spec.stem_channels = 8;
  spec.stage_channels = {8, 16};
  spec.repr_width = 16;
  spec.content_dim = 12;
  spec.style_dim = 4;
  spec.hidden_mult = 2;
  return spec;
}

Tensor<float> random_views(int64_t n, int size, uint64_t seed) {
  Rng rng(seed);
  Tensor<float> x({n, 3, size, size});
  for (int64_t i = 0; i < x.numel(); ++i) x[i] = static_cast<float>(rng.uniform(0.0, 1.0));
  return x;
}

}  // namespace

TEST_CASE("spec validation and the desk-scale 48/16 split") {
  ByolSpec spec;  // width 64 at ratio 3:1
  CHECK(spec.repr_width == 64);
  CHECK(spec.content_dim == 48);
  CHECK(spec.style_dim == 16);
  spec.validate();
  spec.content_dim = 40;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("full-scale preset: 256-wide representation split 192/64") {
  ByolSpec spec;
  spec.stem_channels = 64;
  spec.stage_channels = {64, 128, 256, 512};
  spec.blocks_per_stage = 2;
  spec.repr_width = 256;
  spec.content_dim = 192;
  spec.style_dim = 64;
  spec.validate();
  ByolEncoder<float> enc(spec, "online");
  Rng rng(4);
  enc.init(rng);
  auto v = random_views(1, 32, 5);
  ByolEncoder<float>::Cache cache;
  Tensor<float> proj = enc.project(v, cache, false);
  CHECK(proj.shape() == std::vector<int64_t>{1, 256});
  CHECK(enc.feature_dim() == 512);
  PartitionSpec part = spec.partition();
  CHECK(part.content_dim == 192);
  CHECK(part.style_dim == 64);
}

TEST_CASE("ema_update worked examples") {
  Tensor<float> t({1}), o({1});
  std::vector<nn::ParamRef<float>> ts{{"t", &t, nullptr}};
  std::vector<nn::ParamRef<float>> os{{"o", &o, nullptr}};

  t[0] = 1.0f;
  o[0] = 0.0f;
  ema_update(ts, os, 0.99f);
  CHECK(t[0] == doctest::Approx(0.99f));

  t[0] = 0.37f;
  ema_update(ts, os, 1.0f);  // tau = 1: unchanged
  CHECK(t[0] == doctest::Approx(0.37f));

  ema_update(ts, os, 0.0f);  // tau = 0: copy
  CHECK(t[0] == doctest::Approx(0.0f));
}

TEST_CASE("ema convexity: updates stay within [prior, online] elementwise") {
  Rng rng(5);
  Tensor<float> t({64}), o({64});
  for (int64_t i = 0; i < 64; ++i) {
    t[i] = static_cast<float>(rng.normal());
    o[i] = static_cast<float>(rng.normal());
  }
  Tensor<float> prior = t;
  std::vector<nn::ParamRef<float>> ts{{"t", &t, nullptr}};
  std::vector<nn::ParamRef<float>> os{{"o", &o, nullptr}};
  ema_update(ts, os, 0.42f);
  for (int64_t i = 0; i < 64; ++i) {
    CHECK(t[i] >= std::min(prior[i], o[i]) - 1e-6f);
    CHECK(t[i] <= std::max(prior[i], o[i]) + 1e-6f);
  }
}

TEST_CASE("forward shapes, determinism, and partition stability") {
  ByolSpec spec = tiny_spec();
  ByolNetworks nets(spec);
  Rng rng(7);
  nets.init(rng);
  auto v = random_views(4, 16, 9);

  ByolEncoder<float>::Cache c1, c2;
  Tensor<float> p1 = nets.online.project(v, c1, false);
  Tensor<float> p2 = nets.online.project(v, c2, false);
  CHECK(p1.shape() == std::vector<int64_t>{4, 16});
  CHECK(p1.vec() == p2.vec());  // identical views, identical outputs

  Tensor<float> t1 = nets.target.project(v, c1, false);
  CHECK(t1.shape() == p1.shape());  // online prediction width == target width
}

TEST_CASE("after ema with tau=0, target output equals online projector output") {
  ByolSpec spec = tiny_spec();
  ByolNetworks nets(spec);
  Rng rng(11);
  nets.init(rng);
  // push online away from target first
  nn::ParamRefs<float> params;
  nets.online.collect(params);
  for (auto& p : params.items)
    for (int64_t i = 0; i < p.value->numel(); ++i) (*p.value)[i] += 0.01f;

  auto online_state = full_state(nets.online);
  auto target_state = full_state(nets.target);
  ema_update(target_state, online_state, 0.0f);

  auto v = random_views(3, 16, 13);
  ByolEncoder<float>::Cache c1, c2;
  Tensor<float> po = nets.online.project(v, c1, false);
  Tensor<float> pt = nets.target.project(v, c2, false);
  CHECK(po.vec() == pt.vec());
}

TEST_CASE("symmetric loss: gradient isolation and optimizer leaves target untouched") {
  ByolSpec spec = tiny_spec();
  ByolNetworks nets(spec);
  Rng rng(17);
  nets.init(rng);

  nn::ParamRefs<float> online_params;
  nets.online.collect(online_params);
  nets.predictor.collect(online_params);
  nn::ParamRefs<float> target_params;
  nets.target.collect(target_params);
  nn::Adam<float> opt(online_params, 1e-3f);

  auto v1 = random_views(6, 16, 19);
  auto v2 = random_views(6, 16, 23);

  opt.zero_grad();
  for (auto& p : target_params.items) p.grad->zero();
  SymmetricLossResult loss = symmetric_pr_byol_loss(nets, v1, v2, true, true);
  CHECK(std::isfinite(loss.value));
  CHECK(loss.value == doctest::Approx(loss.dir1.total + loss.dir2.total));

  // loss gradient w.r.t. target parameters is identically zero
  for (auto& p : target_params.items)
    CHECK(kern::sumsq(p.grad->data(), p.grad->numel()) == 0.0f);

  // some online gradient is nonzero, and the step changes only online
  float online_grad = 0;
  for (auto& p : online_params.items) online_grad += kern::sumsq(p.grad->data(), p.grad->numel());
  CHECK(online_grad > 0.0f);

  std::vector<std::vector<float>> target_before;
  for (auto& p : target_params.items) target_before.push_back(p.value->vec());
  opt.step();
  size_t k = 0;
  for (auto& p : target_params.items) CHECK(p.value->vec() == target_before[k++]);
}

TEST_CASE("symmetric loss bounds: value within [-4a, 4]") {
  ByolSpec spec = tiny_spec();
  spec.alpha = 1.0;
  ByolNetworks nets(spec);
  Rng rng(29);
  nets.init(rng);
  for (int trial = 0; trial < 3; ++trial) {
    auto v1 = random_views(5, 16, 31 + static_cast<uint64_t>(trial));
    auto v2 = random_views(5, 16, 131 + static_cast<uint64_t>(trial));
    SymmetricLossResult loss = symmetric_pr_byol_loss(nets, v1, v2, true, false);
    CHECK(loss.value >= -4.0 * spec.alpha - 1e-6);
    CHECK(loss.value <= 4.0 + 1e-6);
  }
}

TEST_CASE("alpha = 0 reduces each direction to the content pull alone") {
  ByolSpec spec = tiny_spec();
  spec.alpha = 0.0;
  ByolNetworks nets(spec);
  Rng rng(37);
  nets.init(rng);
  auto v1 = random_views(4, 16, 41);
  auto v2 = random_views(4, 16, 43);
  SymmetricLossResult loss = symmetric_pr_byol_loss(nets, v1, v2, true, false);
  CHECK(loss.dir1.total == doctest::Approx(loss.dir1.content_distance));
  CHECK(loss.dir2.total == doctest::Approx(loss.dir2.content_distance));
  CHECK(loss.value >= 0.0);
}

TEST_CASE("normalized loss reproduces the closed form at known angles") {
  // 2-dim parts at controlled angles against a fixed target.
  PartitionSpec part(2, 2, 0.8);
  for (double theta_c : {0.3, 1.1, 2.5}) {
    for (double theta_s : {0.2, 1.7}) {
      std::vector<float> pred{static_cast<float>(2.0 * std::cos(theta_c)),
                              static_cast<float>(2.0 * std::sin(theta_c)),
                              static_cast<float>(0.5 * std::cos(theta_s)),
                              static_cast<float>(0.5 * std::sin(theta_s))};
      std::vector<float> tgt{3.0f, 0.0f, 7.0f, 0.0f};
      auto r = pr_loss_normalized_grad<float>(pred.data(), tgt.data(), part);
      double expect_c = std::sqrt(2.0 - 2.0 * std::cos(theta_c));
      double expect_s = std::sqrt(2.0 - 2.0 * std::cos(theta_s));
      CHECK(r.content_distance == doctest::Approx(expect_c).epsilon(1e-5));
      CHECK(r.style_distance == doctest::Approx(expect_s).epsilon(1e-5));
      CHECK(r.total == doctest::Approx(expect_c - 0.8 * expect_s).epsilon(1e-4));
    }
  }
}

TEST_CASE("ema schedule: cosine ramp runs from tau_base toward 1") {
  EmaSchedule sched{0.9, true, 100};
  CHECK(sched.tau_at(0) == doctest::Approx(0.9));
  CHECK(sched.tau_at(100) == doctest::Approx(1.0));
  CHECK(sched.tau_at(50) == doctest::Approx(0.95).epsilon(1e-9));
  double prev = 0.0;
  for (int64_t s = 0; s <= 100; s += 10) {
    double tau = sched.tau_at(s);
    CHECK(tau >= prev);
    CHECK(tau <= 1.0);
    prev = tau;
  }
  EmaSchedule flat{0.99, false, 100};
  CHECK(flat.tau_at(77) == doctest::Approx(0.99));
}

TEST_CASE("train_byol smoke: bookkeeping and checkpoint round trip") {
  auto data = forge::make_synthetic_colored(48, 16, forge::ColorMode::unbiased, 61);
  ByolTrainConfig cfg;
  cfg.spec = tiny_spec();
  cfg.policy = forge::default_two_view_policy(16);
  cfg.policy.view1.crop_scale_min = 0.5;
  cfg.policy.view2.crop_scale_min = 0.5;
  cfg.epochs = 2;
  cfg.batch_size = 24;
  cfg.seed = 3;
  std::string path = "/tmp/partrep_byol_test.ckpt";
  ByolTrainResult result = train_byol(cfg, data, nullptr, &path);
  CHECK(result.history.size() == 4);  // 2 epochs x ceil(48/24)
  for (float v : result.history) CHECK(std::isfinite(v));

  runner::Checkpoint ckpt = runner::load_checkpoint(path);
  ByolNetworks loaded = load_byol(ckpt);
  auto x = random_views(5, 16, 67);
  Tensor<float> a = project_all(result.nets.online, x);
  Tensor<float> b = project_all(loaded.online, x);
  CHECK(a.vec() == b.vec());
  Tensor<float> ta = project_all(result.nets.target, x);
  Tensor<float> tb = project_all(loaded.target, x);
  CHECK(ta.vec() == tb.vec());
}
