#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "partrep/core/rng.hpp"
#include "partrep/nn/adam.hpp"
#include "partrep/nn/layers.hpp"

using namespace partrep;

namespace {

// Central finite differences over every registered parameter and the
// input, against the layer's analytic backward. Double precision, h=1e-5.
struct GradCheck {
  double h = 1e-5;
  double tol = 1e-6;

  // loss(y) = sum(w .* y) with fixed random w makes dL/dy = w.
  template <class Forward, class Backward>
  void run(nn::ParamRefs<double>& params, Tensor<double>& x, Forward fwd, Backward bwd) {
    Rng rng(99);
    Tensor<double> y0 = fwd();
    Tensor<double> w(y0.shape());
    for (int64_t i = 0; i < w.numel(); ++i) w[i] = rng.normal();

    auto loss = [&]() {
      Tensor<double> y = fwd();
      return kern::dot(w.data(), y.data(), y.numel());
    };

    for (auto& p : params.items) p.grad->zero();
    Tensor<double> dx = bwd(w);

    for (auto& p : params.items) {
      for (int64_t i = 0; i < p.value->numel(); ++i) {
        double saved = (*p.value)[i];
        (*p.value)[i] = saved + h;
        double lp = loss();
        (*p.value)[i] = saved - h;
        double lm = loss();
        (*p.value)[i] = saved;
        double fd = (lp - lm) / (2 * h);
        double an = (*p.grad)[i];
        double denom = std::max({1.0, std::abs(fd), std::abs(an)});
        INFO(p.name << "[" << i << "] fd=" << fd << " analytic=" << an);
        CHECK(std::abs(fd - an) / denom < tol);
      }
    }
    for (int64_t i = 0; i < x.numel(); ++i) {
      double saved = x[i];
      x[i] = saved + h;
      double lp = loss();
      x[i] = saved - h;
      double lm = loss();
      x[i] = saved;
      double fd = (lp - lm) / (2 * h);
      double an = dx[i];
      double denom = std::max({1.0, std::abs(fd), std::abs(an)});
      INFO("input[" << i << "] fd=" << fd << " analytic=" << an);
      CHECK(std::abs(fd - an) / denom < tol);
    }
  }
};

Tensor<double> random_tensor(std::vector<int64_t> shape, Rng& rng, double scale = 1.0) {
  Tensor<double> t(std::move(shape));
  for (int64_t i = 0; i < t.numel(); ++i) t[i] = rng.normal() * scale;
  return t;
}

}  // namespace

TEST_CASE("conv2d shape and gradients") {
  Rng rng(1);
  nn::Conv2d<double> conv("conv", 2, 3, 3, 2, 1);
  conv.init(rng);
  Tensor<double> x = random_tensor({2, 2, 7, 7}, rng);

  nn::Conv2d<double>::Cache cache;
  Tensor<double> y = conv.forward(x, cache);
  CHECK(y.shape() == std::vector<int64_t>{2, 3, 4, 4});

  nn::ParamRefs<double> params;
  conv.collect(params);
  GradCheck gc;
  gc.run(
      params, x,
      [&]() {
        nn::Conv2d<double>::Cache c;
        return conv.forward(x, c);
      },
      [&](const Tensor<double>& w) { return conv.backward(w, cache); });
}

TEST_CASE("conv2d matches direct convolution on a known case") {
  nn::Conv2d<double> conv("c", 1, 1, 3, 1, 1);
  nn::ParamRefs<double> params;
  conv.collect(params);
  // identity kernel: 1 at center
  params.items[0].value->zero();
  (*params.items[0].value)[4] = 1.0;
  params.items[1].value->zero();
  Rng rng(2);
  Tensor<double> x = random_tensor({1, 1, 5, 5}, rng);
  nn::Conv2d<double>::Cache cache;
  Tensor<double> y = conv.forward(x, cache);
  for (int64_t i = 0; i < x.numel(); ++i) CHECK(y[i] == doctest::Approx(x[i]));
}

TEST_CASE("conv_transpose2d inverts conv geometry and passes gradcheck") {
  Rng rng(3);
  nn::ConvTranspose2d<double> deconv("d", 3, 2, 3, 2, 1, 1);
  deconv.init(rng);
  Tensor<double> x = random_tensor({2, 3, 4, 4}, rng);
  nn::ConvTranspose2d<double>::Cache cache;
  Tensor<double> y = deconv.forward(x, cache);
  CHECK(y.shape() == std::vector<int64_t>{2, 2, 8, 8});

  nn::ParamRefs<double> params;
  deconv.collect(params);
  GradCheck gc;
  gc.run(
      params, x,
      [&]() {
        nn::ConvTranspose2d<double>::Cache c;
        return deconv.forward(x, c);
      },
      [&](const Tensor<double>& w) { return deconv.backward(w, cache); });
}

TEST_CASE("linear gradients") {
  Rng rng(4);
  nn::Linear<double> lin("l", 5, 4);
  lin.init(rng);
  Tensor<double> x = random_tensor({3, 5}, rng);
  nn::Linear<double>::Cache cache;
  lin.forward(x, cache);
  nn::ParamRefs<double> params;
  lin.collect(params);
  GradCheck gc;
  gc.run(
      params, x,
      [&]() {
        nn::Linear<double>::Cache c;
        return lin.forward(x, c);
      },
      [&](const Tensor<double>& w) { return lin.backward(w, cache); });
}

TEST_CASE("batchnorm 1d and 2d gradients (training mode)") {
  Rng rng(5);
  SUBCASE("1d") {
    nn::BatchNorm<double> bn("bn", 4);
    Tensor<double> x = random_tensor({6, 4}, rng);
    nn::BatchNorm<double>::Cache cache;
    // Freeze running stats by doing grad check through a fresh forward each
    // time; running-stat updates do not affect train-mode outputs.
    bn.forward(x, cache, true);
    nn::ParamRefs<double> params;
    bn.collect(params);
    GradCheck gc;
    gc.tol = 1e-5;
    gc.run(
        params, x,
        [&]() {
          nn::BatchNorm<double>::Cache c;
          return bn.forward(x, c, true);
        },
        [&](const Tensor<double>& w) { return bn.backward(w, cache); });
  }
  SUBCASE("2d") {
    nn::BatchNorm<double> bn("bn2", 3);
    Tensor<double> x = random_tensor({2, 3, 4, 4}, rng);
    nn::BatchNorm<double>::Cache cache;
    bn.forward(x, cache, true);
    nn::ParamRefs<double> params;
    bn.collect(params);
    GradCheck gc;
    gc.tol = 1e-5;
    gc.run(
        params, x,
        [&]() {
          nn::BatchNorm<double>::Cache c;
          return bn.forward(x, c, true);
        },
        [&](const Tensor<double>& w) { return bn.backward(w, cache); });
  }
}

TEST_CASE("batchnorm eval mode uses running statistics") {
  nn::BatchNorm<double> bn("bn", 2);
  Rng rng(6);
  Tensor<double> x = random_tensor({64, 2}, rng);
  for (int i = 0; i < 50; ++i) {
    nn::BatchNorm<double>::Cache c;
    bn.forward(x, c, true);
  }
  nn::BatchNorm<double>::Cache c;
  Tensor<double> y = bn.forward(x, c, false);
  // after many updates on the same batch, eval ~ train output
  Tensor<double> yt = bn.forward(x, c, true);
  for (int64_t i = 0; i < y.numel(); ++i)
    CHECK(y[i] == doctest::Approx(yt[i]).epsilon(0.05));
}

TEST_CASE("global average pool and backward") {
  Rng rng(7);
  Tensor<double> x = random_tensor({2, 3, 2, 2}, rng);
  Tensor<double> y = nn::global_avg_pool(x);
  CHECK(y.shape() == std::vector<int64_t>{2, 3});
  CHECK(y[0] == doctest::Approx((x[0] + x[1] + x[2] + x[3]) / 4));
  Tensor<double> dy({2, 3});
  for (int64_t i = 0; i < dy.numel(); ++i) dy[i] = 1.0;
  Tensor<double> dx = nn::global_avg_pool_backward(dy, x.shape());
  for (int64_t i = 0; i < dx.numel(); ++i) CHECK(dx[i] == doctest::Approx(0.25));
}

TEST_CASE("adam trains a quadratic to its minimum") {
  Tensor<float> p({4});
  Tensor<float> g({4});
  for (int64_t i = 0; i < 4; ++i) p[i] = 5.0f + static_cast<float>(i);
  nn::ParamRefs<float> params;
  params.add("p", p, g);
  nn::Adam<float> opt(params, 0.1f);
  for (int step = 0; step < 500; ++step) {
    for (int64_t i = 0; i < 4; ++i) g[i] = 2.0f * (p[i] - 1.0f);
    opt.step();
  }
  for (int64_t i = 0; i < 4; ++i) CHECK(std::abs(p[i] - 1.0f) < 1e-3f);
}

TEST_CASE("global norm clip rescales to the cap") {
  Tensor<float> p({3}), g({3});
  g[0] = 3.0f;
  g[1] = 4.0f;
  g[2] = 0.0f;
  nn::ParamRefs<float> params;
  params.add("p", p, g);
  float norm = nn::clip_global_norm(params, 1.0f);
  CHECK(norm == doctest::Approx(5.0f));
  CHECK(std::sqrt(kern::sumsq(g.data(), 3)) == doctest::Approx(1.0f));
}
