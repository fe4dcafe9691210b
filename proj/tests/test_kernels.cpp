#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "partrep/core/rng.hpp"
#include "partrep/kern/kernels.hpp"

using namespace partrep;

namespace {

// Sizes straddling every SIMD block boundary used by the kernels.
const int64_t kSizes[] = {1, 2, 3, 5, 7, 8, 9, 15, 16, 17, 31, 33, 64, 100, 257};

template <class T>
std::vector<T> random_vec(int64_t n, Rng& rng, double scale = 1.0) {
  std::vector<T> v(static_cast<size_t>(n));
  for (auto& x : v) x = static_cast<T>(rng.normal() * scale);
  return v;
}

template <class T>
void expect_close(const std::vector<T>& a, const std::vector<T>& b, double tol) {
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    double denom = std::max(1.0, std::abs(static_cast<double>(a[i])));
    CHECK(std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])) / denom < tol);
  }
}

}  // namespace

#if defined(PARTREP_HAVE_AVX2_TU)

// Scalar reference vs AVX2 variants over ragged shapes. Reductions change
// summation order, hence tolerance rather than bit equality.
TEST_CASE_TEMPLATE("gemm variants match scalar reference", T, float, double) {
  if (!kern::cpu_has_avx2()) return;
  Rng rng(42);
  double tol = sizeof(T) == 4 ? 2e-4 : 1e-10;
  for (int64_t m : {1, 2, 3, 6, 7, 13}) {
    for (int64_t n : {1, 5, 16, 17, 33}) {
      for (int64_t k : {1, 4, 9, 65}) {
        auto a = random_vec<T>(m * k, rng);
        auto b = random_vec<T>(k * n, rng);
        auto at = std::vector<T>(static_cast<size_t>(k * m));
        for (int64_t i = 0; i < m; ++i)
          for (int64_t p = 0; p < k; ++p) at[static_cast<size_t>(p * m + i)] = a[static_cast<size_t>(i * k + p)];
        auto bt = std::vector<T>(static_cast<size_t>(n * k));
        for (int64_t p = 0; p < k; ++p)
          for (int64_t j = 0; j < n; ++j) bt[static_cast<size_t>(j * k + p)] = b[static_cast<size_t>(p * n + j)];

        std::vector<T> c_ref(static_cast<size_t>(m * n)), c_simd(static_cast<size_t>(m * n));
        kern::scalar::gemm_nn(a.data(), b.data(), c_ref.data(), m, n, k, false);
        kern::avx2::gemm_nn(a.data(), b.data(), c_simd.data(), m, n, k, false);
        expect_close(c_ref, c_simd, tol);

        kern::scalar::gemm_tn(at.data(), b.data(), c_ref.data(), m, n, k, false);
        kern::avx2::gemm_tn(at.data(), b.data(), c_simd.data(), m, n, k, false);
        expect_close(c_ref, c_simd, tol);

        kern::scalar::gemm_nt(a.data(), bt.data(), c_ref.data(), m, n, k, false);
        kern::avx2::gemm_nt(a.data(), bt.data(), c_simd.data(), m, n, k, false);
        expect_close(c_ref, c_simd, tol);

        // accumulate path
        auto seed_ref = random_vec<T>(m * n, rng);
        auto seed_simd = seed_ref;
        kern::scalar::gemm_nn(a.data(), b.data(), seed_ref.data(), m, n, k, true);
        kern::avx2::gemm_nn(a.data(), b.data(), seed_simd.data(), m, n, k, true);
        expect_close(seed_ref, seed_simd, tol);
      }
    }
  }
}

TEST_CASE_TEMPLATE("elementwise and reduction variants match scalar", T, float, double) {
  if (!kern::cpu_has_avx2()) return;
  Rng rng(7);
  double tol = sizeof(T) == 4 ? 1e-4 : 1e-12;
  for (int64_t n : kSizes) {
    auto x = random_vec<T>(n, rng);
    auto y = random_vec<T>(n, rng);
    std::vector<T> r1(static_cast<size_t>(n)), r2(static_cast<size_t>(n));

    kern::scalar::add(x.data(), y.data(), r1.data(), n);
    kern::avx2::add(x.data(), y.data(), r2.data(), n);
    expect_close(r1, r2, tol);

    kern::scalar::sub(x.data(), y.data(), r1.data(), n);
    kern::avx2::sub(x.data(), y.data(), r2.data(), n);
    expect_close(r1, r2, tol);

    kern::scalar::mul(x.data(), y.data(), r1.data(), n);
    kern::avx2::mul(x.data(), y.data(), r2.data(), n);
    expect_close(r1, r2, tol);

    r1 = y;
    r2 = y;
    kern::scalar::axpy(T(0.37), x.data(), r1.data(), n);
    kern::avx2::axpy(T(0.37), x.data(), r2.data(), n);
    expect_close(r1, r2, tol);

    kern::scalar::relu_fwd(x.data(), r1.data(), n);
    kern::avx2::relu_fwd(x.data(), r2.data(), n);
    expect_close(r1, r2, 0.0 + tol);

    kern::scalar::relu_bwd(x.data(), y.data(), r1.data(), n);
    kern::avx2::relu_bwd(x.data(), y.data(), r2.data(), n);
    expect_close(r1, r2, tol);

    CHECK(std::abs(kern::scalar::dot(x.data(), y.data(), n) -
                   kern::avx2::dot(x.data(), y.data(), n)) <
          tol * std::max<double>(1.0, std::abs(kern::scalar::dot(x.data(), y.data(), n))) + tol * n);
    CHECK(std::abs(kern::scalar::sum(x.data(), n) - kern::avx2::sum(x.data(), n)) < tol * n + tol);
    CHECK(std::abs(kern::scalar::sumsq(x.data(), n) - kern::avx2::sumsq(x.data(), n)) <
          tol * n + tol);
    CHECK(std::abs(kern::scalar::sqdist(x.data(), y.data(), n) -
                   kern::avx2::sqdist(x.data(), y.data(), n)) < tol * n + tol);
  }
}

TEST_CASE_TEMPLATE("adam variants match scalar", T, float, double) {
  if (!kern::cpu_has_avx2()) return;
  Rng rng(11);
  double tol = sizeof(T) == 4 ? 1e-5 : 1e-12;
  for (int64_t n : kSizes) {
    auto p1 = random_vec<T>(n, rng);
    auto g = random_vec<T>(n, rng);
    auto m1 = random_vec<T>(n, rng, 0.1);
    std::vector<T> v1(static_cast<size_t>(n), T(0.01));
    auto p2 = p1;
    auto m2 = m1;
    auto v2 = v1;
    kern::scalar::adam_step(p1.data(), g.data(), m1.data(), v1.data(), n, T(1e-3), T(0.9),
                            T(0.999), T(1e-8), 3);
    kern::avx2::adam_step(p2.data(), g.data(), m2.data(), v2.data(), n, T(1e-3), T(0.9), T(0.999),
                          T(1e-8), 3);
    expect_close(p1, p2, tol);
    expect_close(m1, m2, tol);
    expect_close(v1, v2, tol);
  }
}

#endif  // PARTREP_HAVE_AVX2_TU

TEST_CASE("scalar gemm_nn against hand-rolled triple loop") {
  Rng rng(3);
  const int64_t m = 4, n = 5, k = 3;
  auto a = random_vec<double>(m * k, rng);
  auto b = random_vec<double>(k * n, rng);
  std::vector<double> c(static_cast<size_t>(m * n));
  kern::gemm_nn(a.data(), b.data(), c.data(), m, n, k, false);
  for (int64_t i = 0; i < m; ++i)
    for (int64_t j = 0; j < n; ++j) {
      double acc = 0;
      for (int64_t p = 0; p < k; ++p)
        acc += a[static_cast<size_t>(i * k + p)] * b[static_cast<size_t>(p * n + j)];
      CHECK(c[static_cast<size_t>(i * n + j)] == doctest::Approx(acc).epsilon(1e-12));
    }
}

TEST_CASE("dispatched kernels honor PARTREP_ISA=scalar") {
  // active_isa is latched once per process; here we only check the
  // dispatcher produces the same values as the scalar namespace.
  Rng rng(5);
  auto x = random_vec<float>(33, rng);
  auto y = random_vec<float>(33, rng);
  float got = kern::sqdist(x.data(), y.data(), 33);
  float ref = kern::scalar::sqdist(x.data(), y.data(), 33);
  CHECK(std::abs(got - ref) < 1e-4f);
}
