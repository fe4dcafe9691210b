#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "partrep/core/rng.hpp"
#include "partrep/prcore/pr_loss.hpp"

using namespace partrep;

namespace {

PartitionedEmbedding<double> emb(std::vector<double> v, const PartitionSpec& spec) {
  return PartitionedEmbedding<double>(std::move(v), spec);
}

}  // namespace

TEST_CASE("partition spec invariants") {
  CHECK_THROWS_AS(PartitionSpec(0, 3, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(PartitionSpec(7, 0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(PartitionSpec(7, 3, -0.1), std::invalid_argument);
  PartitionSpec spec(7, 3, 0.5);
  CHECK(spec.total_dim() == 10);
}

TEST_CASE("split returns views and rejects bad lengths") {
  PartitionSpec spec(2, 1, 1.0);
  auto [content, style] = split<double>({1, 2, 3}, spec);
  CHECK(content == std::vector<double>{1, 2});
  CHECK(style == std::vector<double>{3});
  CHECK_THROWS_AS(split<double>({1, 2}, spec), std::invalid_argument);

  // concat(split(v)) == v round trip
  Rng rng(1);
  PartitionSpec s2(5, 4, 1.0);
  std::vector<double> v(9);
  for (auto& x : v) x = rng.normal();
  auto [c, st] = split(v, s2);
  c.insert(c.end(), st.begin(), st.end());
  CHECK(c == v);
}

TEST_CASE("swap_styles worked example, involution, self-swap") {
  PartitionSpec spec(2, 1, 1.0);
  auto z1 = emb({1, 2, 9}, spec);
  auto z2 = emb({3, 4, 7}, spec);
  auto [a, b] = swap_styles(z1, z2);
  CHECK(a.values == std::vector<double>{1, 2, 7});
  CHECK(b.values == std::vector<double>{3, 4, 9});
  auto [a2, b2] = swap_styles(a, b);
  CHECK(a2.values == z1.values);
  CHECK(b2.values == z2.values);
  auto [s1, s2] = swap_styles(z1, z1);
  CHECK(s1.values == z1.values);
  CHECK(s2.values == z1.values);
}

TEST_CASE("euclidean form worked examples") {
  PartitionSpec spec(2, 2, 0.5);
  // z_a=(1,0 | 0,0), z_p=(0,0 | 3,4): content 1, style 5, total -1.5
  auto r = pr_loss_euclidean(emb({1, 0, 0, 0}, spec), emb({0, 0, 3, 4}, spec), spec);
  CHECK(r.content_distance == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.style_distance == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(r.total == doctest::Approx(-1.5).epsilon(1e-12));

  // coincident points
  auto z = emb({1, 2, 3, 4}, spec);
  auto r0 = pr_loss_euclidean(z, z, spec);
  CHECK(r0.content_distance == 0.0);
  CHECK(r0.style_distance == 0.0);
  CHECK(r0.total == 0.0);

  // alpha = 0 reduces to the plain pull
  PartitionSpec spec0(2, 2, 0.0);
  auto ra = pr_loss_euclidean(emb({1, 0, 5, 5}, spec0), emb({0, 0, 3, 4}, spec0), spec0);
  CHECK(ra.total == doctest::Approx(ra.content_distance));
}

TEST_CASE("euclidean form: 100 random vectors against a direct oracle") {
  Rng rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    int dc = 1 + static_cast<int>(rng.uniform_int(0, 4));
    int ds = 1 + static_cast<int>(rng.uniform_int(0, 4));
    double alpha = rng.uniform(0.0, 2.0);
    PartitionSpec spec(dc, ds, alpha);
    std::vector<double> a(static_cast<size_t>(dc + ds)), p(a.size());
    for (auto& x : a) x = rng.normal() * 3;
    for (auto& x : p) x = rng.normal() * 3;

    double c2 = 0, s2 = 0;
    for (int i = 0; i < dc; ++i) c2 += (a[i] - p[i]) * (a[i] - p[i]);
    for (int i = dc; i < dc + ds; ++i) s2 += (a[i] - p[i]) * (a[i] - p[i]);
    double expected = std::sqrt(c2) - alpha * std::sqrt(s2);

    auto r = pr_loss_euclidean(emb(a, spec), emb(p, spec), spec);
    CHECK(std::abs(r.total - expected) <= 1e-9 * std::max(1.0, std::abs(expected)));
    CHECK(r.total == doctest::Approx(r.content_distance - alpha * r.style_distance).epsilon(1e-15));
  }
}

TEST_CASE("euclidean form is symmetric") {
  Rng rng(7);
  PartitionSpec spec(3, 2, 0.7);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(5), p(5);
    for (auto& x : a) x = rng.normal();
    for (auto& x : p) x = rng.normal();
    auto r1 = pr_loss_euclidean(emb(a, spec), emb(p, spec), spec);
    auto r2 = pr_loss_euclidean(emb(p, spec), emb(a, spec), spec);
    CHECK(r1.total == r2.total);
    CHECK(r1.content_distance == r2.content_distance);
    CHECK(r1.style_distance == r2.style_distance);
  }
}

TEST_CASE("euclidean gradient matches central finite differences") {
  Rng rng(17);
  PartitionSpec spec(3, 2, 0.8);
  const double h = 1e-5;
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<double> a(5), p(5);
    for (auto& x : a) x = rng.normal();
    for (auto& x : p) x = rng.normal();
    std::vector<double> da(5, 0.0), dp(5, 0.0);
    pr_loss_euclidean_grad<double>(a.data(), p.data(), spec, 1.0, da.data(), dp.data());
    for (int i = 0; i < 5; ++i) {
      double saved = a[i];
      a[i] = saved + h;
      double lp = pr_loss_euclidean_grad<double>(a.data(), p.data(), spec).total;
      a[i] = saved - h;
      double lm = pr_loss_euclidean_grad<double>(a.data(), p.data(), spec).total;
      a[i] = saved;
      double fd = (lp - lm) / (2 * h);
      CHECK(std::abs(fd - da[i]) / std::max(1.0, std::abs(fd)) < 1e-6);
    }
    for (int i = 0; i < 5; ++i) {
      double saved = p[i];
      p[i] = saved + h;
      double lp = pr_loss_euclidean_grad<double>(a.data(), p.data(), spec).total;
      p[i] = saved - h;
      double lm = pr_loss_euclidean_grad<double>(a.data(), p.data(), spec).total;
      p[i] = saved;
      double fd = (lp - lm) / (2 * h);
      CHECK(std::abs(fd - dp[i]) / std::max(1.0, std::abs(fd)) < 1e-6);
    }
  }
}

TEST_CASE("normalized form geometry") {
  PartitionSpec spec(2, 2, 1.0);
  SUBCASE("parallel parts have zero distance") {
    auto r = pr_loss_normalized(emb({2, 0, 0, 3}, spec), emb({5, 0, 0, 7}, spec), spec);
    CHECK(r.content_distance == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(r.style_distance == doctest::Approx(0.0).epsilon(1e-9));
  }
  SUBCASE("antiparallel content parts give distance 2") {
    auto r = pr_loss_normalized(emb({1, 0, 1, 0}, spec), emb({-3, 0, 1, 0}, spec), spec);
    CHECK(r.content_distance == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("orthogonal content and style at alpha=1 cancel: sqrt2 - sqrt2 = 0") {
    auto r = pr_loss_normalized(emb({1, 0, 0, 2}, spec), emb({0, 1, 4, 0}, spec), spec);
    CHECK(r.content_distance == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(r.style_distance == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(r.total == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("zero-norm part raises the degeneracy error") {
    CHECK_THROWS_AS(pr_loss_normalized(emb({0, 0, 1, 0}, spec), emb({1, 0, 1, 0}, spec), spec),
                    std::domain_error);
  }
}

TEST_CASE("normalized form: bounds and scale invariance properties") {
  Rng rng(23);
  PartitionSpec spec(3, 2, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> a(5), b(5);
    for (auto& x : a) x = rng.normal();
    for (auto& x : b) x = rng.normal();
    auto r = pr_loss_normalized(emb(a, spec), emb(b, spec), spec);
    CHECK(r.content_distance >= 0.0);
    CHECK(r.content_distance <= 2.0 + 1e-12);
    CHECK(r.style_distance >= 0.0);
    CHECK(r.style_distance <= 2.0 + 1e-12);
    CHECK(r.total >= -2.0 * spec.alpha - 1e-12);
    CHECK(r.total <= 2.0 + 1e-12);

    // positive rescaling of any single part changes nothing
    auto scaled = a;
    double f = rng.uniform(0.1, 10.0);
    for (int i = 0; i < 3; ++i) scaled[static_cast<size_t>(i)] *= f;
    auto r2 = pr_loss_normalized(emb(scaled, spec), emb(b, spec), spec);
    CHECK(r2.total == doctest::Approx(r.total).epsilon(1e-9));
    auto scaled_b = b;
    for (int i = 3; i < 5; ++i) scaled_b[static_cast<size_t>(i)] *= f;
    auto r3 = pr_loss_normalized(emb(a, spec), emb(scaled_b, spec), spec);
    CHECK(r3.total == doctest::Approx(r.total).epsilon(1e-9));
  }
}

TEST_CASE("normalized gradient (prediction side) matches finite differences") {
  Rng rng(31);
  PartitionSpec spec(3, 2, 0.6);
  const double h = 1e-6, eps = 1e-12;
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<double> u(5), v(5);
    for (auto& x : u) x = rng.normal();
    for (auto& x : v) x = rng.normal();
    std::vector<double> du(5, 0.0);
    pr_loss_normalized_grad<double>(u.data(), v.data(), spec, eps, 1.0, du.data());
    for (int i = 0; i < 5; ++i) {
      double saved = u[i];
      u[i] = saved + h;
      double lp = pr_loss_normalized_grad<double>(u.data(), v.data(), spec, eps).total;
      u[i] = saved - h;
      double lm = pr_loss_normalized_grad<double>(u.data(), v.data(), spec, eps).total;
      u[i] = saved;
      double fd = (lp - lm) / (2 * h);
      CHECK(std::abs(fd - du[i]) / std::max(1.0, std::abs(fd)) < 1e-5);
    }
  }
}

TEST_CASE("breakdown consistency to machine precision") {
  Rng rng(37);
  for (int trial = 0; trial < 100; ++trial) {
    PartitionSpec spec(2, 3, rng.uniform(0.0, 2.0));
    std::vector<double> a(5), b(5);
    for (auto& x : a) x = rng.normal();
    for (auto& x : b) x = rng.normal();
    auto r = pr_loss_euclidean(emb(a, spec), emb(b, spec), spec);
    CHECK(r.total == r.content_distance - spec.alpha * r.style_distance);
  }
}
