// AVX2+FMA variants. Compiled with -mavx2 -mfma in its own TU and only
// entered after the runtime CPU check in dispatch.cpp. Reductions keep a
// fixed lane order, so outputs are reproducible run to run; they are not
// bit-identical to the scalar reference (different summation order), which
// is why the equivalence tests compare with a tolerance.

#include <cmath>
#include <cstring>
#include <immintrin.h>

#include "partrep/kern/kernels.hpp"

namespace partrep::kern::avx2 {

namespace {

inline float hsum(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  lo = _mm_add_ps(lo, _mm_movehl_ps(lo, lo));
  lo = _mm_add_ss(lo, _mm_shuffle_ps(lo, lo, 1));
  return _mm_cvtss_f32(lo);
}

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(lo) + _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo));
}

// 6x16 f32 block of C += A*B; A element fetched via `lda`-strided lambda-free
// indexing so the same kernel serves nn (a[i*k+p]) and tn (a[p*m+i]).
template <bool kTransA>
inline void f32_block6x16(const float* a, const float* b, float* c,
                          int64_t i, int64_t j, int64_t n, int64_t k, int64_t m) {
  __m256 acc[6][2];
  for (int r = 0; r < 6; ++r) {
    acc[r][0] = _mm256_loadu_ps(c + (i + r) * n + j);
    acc[r][1] = _mm256_loadu_ps(c + (i + r) * n + j + 8);
  }
  for (int64_t p = 0; p < k; ++p) {
    const float* bp = b + p * n + j;
    __m256 b0 = _mm256_loadu_ps(bp);
    __m256 b1 = _mm256_loadu_ps(bp + 8);
    for (int r = 0; r < 6; ++r) {
      float av = kTransA ? a[p * m + (i + r)] : a[(i + r) * k + p];
      __m256 va = _mm256_set1_ps(av);
      acc[r][0] = _mm256_fmadd_ps(va, b0, acc[r][0]);
      acc[r][1] = _mm256_fmadd_ps(va, b1, acc[r][1]);
    }
  }
  for (int r = 0; r < 6; ++r) {
    _mm256_storeu_ps(c + (i + r) * n + j, acc[r][0]);
    _mm256_storeu_ps(c + (i + r) * n + j + 8, acc[r][1]);
  }
}

template <bool kTransA>
inline void f64_block4x8(const double* a, const double* b, double* c,
                         int64_t i, int64_t j, int64_t n, int64_t k, int64_t m) {
  __m256d acc[4][2];
  for (int r = 0; r < 4; ++r) {
    acc[r][0] = _mm256_loadu_pd(c + (i + r) * n + j);
    acc[r][1] = _mm256_loadu_pd(c + (i + r) * n + j + 4);
  }
  for (int64_t p = 0; p < k; ++p) {
    const double* bp = b + p * n + j;
    __m256d b0 = _mm256_loadu_pd(bp);
    __m256d b1 = _mm256_loadu_pd(bp + 4);
    for (int r = 0; r < 4; ++r) {
      double av = kTransA ? a[p * m + (i + r)] : a[(i + r) * k + p];
      __m256d va = _mm256_set1_pd(av);
      acc[r][0] = _mm256_fmadd_pd(va, b0, acc[r][0]);
      acc[r][1] = _mm256_fmadd_pd(va, b1, acc[r][1]);
    }
  }
  for (int r = 0; r < 4; ++r) {
    _mm256_storeu_pd(c + (i + r) * n + j, acc[r][0]);
    _mm256_storeu_pd(c + (i + r) * n + j + 4, acc[r][1]);
  }
}

// Accumulating edge fallback for the ragged borders of a gemm tile.
template <class T, bool kTransA>
inline void edge_block(const T* a, const T* b, T* c,
                       int64_t i0, int64_t i1, int64_t j0, int64_t j1,
                       int64_t n, int64_t k, int64_t m) {
  for (int64_t i = i0; i < i1; ++i) {
    for (int64_t p = 0; p < k; ++p) {
      T av = kTransA ? a[p * m + i] : a[i * k + p];
      if (av == T(0)) continue;
      const T* bp = b + p * n;
      T* ci = c + i * n;
      for (int64_t j = j0; j < j1; ++j) ci[j] += av * bp[j];
    }
  }
}

template <bool kTransA>
void gemm_f32(const float* a, const float* b, float* c,
              int64_t m, int64_t n, int64_t k, bool accumulate) {
  if (!accumulate) std::memset(c, 0, sizeof(float) * static_cast<size_t>(m * n));
  int64_t mb = m - m % 6;
  int64_t nb = n - n % 16;
  for (int64_t i = 0; i < mb; i += 6)
    for (int64_t j = 0; j < nb; j += 16)
      f32_block6x16<kTransA>(a, b, c, i, j, n, k, m);
  if (nb < n) edge_block<float, kTransA>(a, b, c, 0, mb, nb, n, n, k, m);
  if (mb < m) edge_block<float, kTransA>(a, b, c, mb, m, 0, n, n, k, m);
}

template <bool kTransA>
void gemm_f64(const double* a, const double* b, double* c,
              int64_t m, int64_t n, int64_t k, bool accumulate) {
  if (!accumulate) std::memset(c, 0, sizeof(double) * static_cast<size_t>(m * n));
  int64_t mb = m - m % 4;
  int64_t nb = n - n % 8;
  for (int64_t i = 0; i < mb; i += 4)
    for (int64_t j = 0; j < nb; j += 8)
      f64_block4x8<kTransA>(a, b, c, i, j, n, k, m);
  if (nb < n) edge_block<double, kTransA>(a, b, c, 0, mb, nb, n, n, k, m);
  if (mb < m) edge_block<double, kTransA>(a, b, c, mb, m, 0, n, n, k, m);
}

}  // namespace

void gemm_nn(const float* a, const float* b, float* c,
                    int64_t m, int64_t n, int64_t k, bool accumulate) {
  gemm_f32<false>(a, b, c, m, n, k, accumulate);
}
void gemm_nn(const double* a, const double* b, double* c,
                     int64_t m, int64_t n, int64_t k, bool accumulate) {
  gemm_f64<false>(a, b, c, m, n, k, accumulate);
}
void gemm_tn(const float* a, const float* b, float* c,
                    int64_t m, int64_t n, int64_t k, bool accumulate) {
  gemm_f32<true>(a, b, c, m, n, k, accumulate);
}
void gemm_tn(const double* a, const double* b, double* c,
                     int64_t m, int64_t n, int64_t k, bool accumulate) {
  gemm_f64<true>(a, b, c, m, n, k, accumulate);
}

// C[m,n] (+)= A * B^T, B stored [n,k]: blocked dot products, 2x2 tiles
// sharing loads of the A and B rows.
void gemm_nt(const float* a, const float* b, float* c,
                    int64_t m, int64_t n, int64_t k, bool accumulate) {
  int64_t kb = k - k % 8;
  for (int64_t i = 0; i + 2 <= m; i += 2) {
    const float* a0 = a + i * k;
    const float* a1 = a0 + k;
    for (int64_t j = 0; j + 2 <= n; j += 2) {
      const float* b0 = b + j * k;
      const float* b1 = b0 + k;
      __m256 s00 = _mm256_setzero_ps(), s01 = _mm256_setzero_ps();
      __m256 s10 = _mm256_setzero_ps(), s11 = _mm256_setzero_ps();
      for (int64_t p = 0; p < kb; p += 8) {
        __m256 va0 = _mm256_loadu_ps(a0 + p);
        __m256 va1 = _mm256_loadu_ps(a1 + p);
        __m256 vb0 = _mm256_loadu_ps(b0 + p);
        __m256 vb1 = _mm256_loadu_ps(b1 + p);
        s00 = _mm256_fmadd_ps(va0, vb0, s00);
        s01 = _mm256_fmadd_ps(va0, vb1, s01);
        s10 = _mm256_fmadd_ps(va1, vb0, s10);
        s11 = _mm256_fmadd_ps(va1, vb1, s11);
      }
      float r00 = hsum(s00), r01 = hsum(s01), r10 = hsum(s10), r11 = hsum(s11);
      for (int64_t p = kb; p < k; ++p) {
        r00 += a0[p] * b0[p];
        r01 += a0[p] * b1[p];
        r10 += a1[p] * b0[p];
        r11 += a1[p] * b1[p];
      }
      float* c0 = c + i * n + j;
      float* c1 = c0 + n;
      if (accumulate) {
        c0[0] += r00; c0[1] += r01; c1[0] += r10; c1[1] += r11;
      } else {
        c0[0] = r00; c0[1] = r01; c1[0] = r10; c1[1] = r11;
      }
    }
    if (n % 2) {
      int64_t j = n - 1;
      const float* bj = b + j * k;
      float r0 = dot(a0, bj, k);
      float r1 = dot(a1, bj, k);
      if (accumulate) {
        c[i * n + j] += r0;
        c[(i + 1) * n + j] += r1;
      } else {
        c[i * n + j] = r0;
        c[(i + 1) * n + j] = r1;
      }
    }
  }
  if (m % 2) {
    int64_t i = m - 1;
    const float* ai = a + i * k;
    for (int64_t j = 0; j < n; ++j) {
      float r = dot(ai, b + j * k, k);
      if (accumulate) c[i * n + j] += r;
      else c[i * n + j] = r;
    }
  }
}

void gemm_nt(const double* a, const double* b, double* c,
                     int64_t m, int64_t n, int64_t k, bool accumulate) {
  int64_t kb = k - k % 4;
  for (int64_t i = 0; i < m; ++i) {
    const double* ai = a + i * k;
    for (int64_t j = 0; j < n; ++j) {
      const double* bj = b + j * k;
      __m256d s0 = _mm256_setzero_pd();
      for (int64_t p = 0; p < kb; p += 4)
        s0 = _mm256_fmadd_pd(_mm256_loadu_pd(ai + p), _mm256_loadu_pd(bj + p), s0);
      double r = hsum(s0);
      for (int64_t p = kb; p < k; ++p) r += ai[p] * bj[p];
      c[i * n + j] = accumulate ? c[i * n + j] + r : r;
    }
  }
}

void add(const float* x, const float* y, float* out, int64_t n) {
  int64_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(out + i, _mm256_add_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
  for (; i < n; ++i) out[i] = x[i] + y[i];
}
void add(const double* x, const double* y, double* out, int64_t n) {
  int64_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) out[i] = x[i] + y[i];
}

void sub(const float* x, const float* y, float* out, int64_t n) {
  int64_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(out + i, _mm256_sub_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
  for (; i < n; ++i) out[i] = x[i] - y[i];
}
void sub(const double* x, const double* y, double* out, int64_t n) {
  int64_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) out[i] = x[i] - y[i];
}

void mul(const float* x, const float* y, float* out, int64_t n) {
  int64_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(out + i, _mm256_mul_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
  for (; i < n; ++i) out[i] = x[i] * y[i];
}
void mul(const double* x, const double* y, double* out, int64_t n) {
  int64_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) out[i] = x[i] * y[i];
}

void axpy(float alpha, const float* x, float* y, int64_t n) {
  __m256 va = _mm256_set1_ps(alpha);
  int64_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(y + i, _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}
void axpy(double alpha, const double* x, double* y, int64_t n) {
  __m256d va = _mm256_set1_pd(alpha);
  int64_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale(float alpha, float* x, int64_t n) {
  __m256 va = _mm256_set1_ps(alpha);
  int64_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(x + i, _mm256_mul_ps(va, _mm256_loadu_ps(x + i)));
  for (; i < n; ++i) x[i] *= alpha;
}
void scale(double alpha, double* x, int64_t n) {
  __m256d va = _mm256_set1_pd(alpha);
  int64_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] *= alpha;
}

float dot(const float* x, const float* y, int64_t n) {
  __m256 s0 = _mm256_setzero_ps(), s1 = _mm256_setzero_ps();
  int64_t i = 0;
  for (; i + 16 <= n; i += 16) {
    s0 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i), s0);
    s1 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i + 8), _mm256_loadu_ps(y + i + 8), s1);
  }
  for (; i + 8 <= n; i += 8)
    s0 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i), s0);
  float acc = hsum(_mm256_add_ps(s0, s1));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}
double dot(const double* x, const double* y, int64_t n) {
  __m256d s0 = _mm256_setzero_pd();
  int64_t i = 0;
  for (; i + 4 <= n; i += 4)
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), s0);
  double acc = hsum(s0);
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

float sum(const float* x, int64_t n) {
  __m256 s = _mm256_setzero_ps();
  int64_t i = 0;
  for (; i + 8 <= n; i += 8) s = _mm256_add_ps(s, _mm256_loadu_ps(x + i));
  float acc = hsum(s);
  for (; i < n; ++i) acc += x[i];
  return acc;
}
double sum(const double* x, int64_t n) {
  __m256d s = _mm256_setzero_pd();
  int64_t i = 0;
  for (; i + 4 <= n; i += 4) s = _mm256_add_pd(s, _mm256_loadu_pd(x + i));
  double acc = hsum(s);
  for (; i < n; ++i) acc += x[i];
  return acc;
}

float sumsq(const float* x, int64_t n) {
  __m256 s = _mm256_setzero_ps();
  int64_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 v = _mm256_loadu_ps(x + i);
    s = _mm256_fmadd_ps(v, v, s);
  }
  float acc = hsum(s);
  for (; i < n; ++i) acc += x[i] * x[i];
  return acc;
}
double sumsq(const double* x, int64_t n) {
  __m256d s = _mm256_setzero_pd();
  int64_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(x + i);
    s = _mm256_fmadd_pd(v, v, s);
  }
  double acc = hsum(s);
  for (; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

float sqdist(const float* x, const float* y, int64_t n) {
  __m256 s = _mm256_setzero_ps();
  int64_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 d = _mm256_sub_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i));
    s = _mm256_fmadd_ps(d, d, s);
  }
  float acc = hsum(s);
  for (; i < n; ++i) {
    float d = x[i] - y[i];
    acc += d * d;
  }
  return acc;
}
double sqdist(const double* x, const double* y, int64_t n) {
  __m256d s = _mm256_setzero_pd();
  int64_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    s = _mm256_fmadd_pd(d, d, s);
  }
  double acc = hsum(s);
  for (; i < n; ++i) {
    double d = x[i] - y[i];
    acc += d * d;
  }
  return acc;
}

void relu_fwd(const float* x, float* y, int64_t n) {
  __m256 z = _mm256_setzero_ps();
  int64_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(y + i, _mm256_max_ps(z, _mm256_loadu_ps(x + i)));
  for (; i < n; ++i) y[i] = x[i] > 0.f ? x[i] : 0.f;
}
void relu_fwd(const double* x, double* y, int64_t n) {
  __m256d z = _mm256_setzero_pd();
  int64_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_max_pd(z, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_bwd(const float* x, const float* dy, float* dx, int64_t n) {
  __m256 z = _mm256_setzero_ps();
  int64_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 mask = _mm256_cmp_ps(_mm256_loadu_ps(x + i), z, _CMP_GT_OQ);
    _mm256_storeu_ps(dx + i, _mm256_and_ps(mask, _mm256_loadu_ps(dy + i)));
  }
  for (; i < n; ++i) dx[i] = x[i] > 0.f ? dy[i] : 0.f;
}
void relu_bwd(const double* x, const double* dy, double* dx, int64_t n) {
  __m256d z = _mm256_setzero_pd();
  int64_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(x + i), z, _CMP_GT_OQ);
    _mm256_storeu_pd(dx + i, _mm256_and_pd(mask, _mm256_loadu_pd(dy + i)));
  }
  for (; i < n; ++i) dx[i] = x[i] > 0.0 ? dy[i] : 0.0;
}

void adam_step(float* p, const float* g, float* m, float* v, int64_t n,
                      float lr, float beta1, float beta2, float eps, int64_t t) {
  float bc1 = 1.f - std::pow(beta1, static_cast<float>(t));
  float bc2 = 1.f - std::pow(beta2, static_cast<float>(t));
  __m256 vb1 = _mm256_set1_ps(beta1), vc1 = _mm256_set1_ps(1.f - beta1);
  __m256 vb2 = _mm256_set1_ps(beta2), vc2 = _mm256_set1_ps(1.f - beta2);
  __m256 vlr = _mm256_set1_ps(lr), veps = _mm256_set1_ps(eps);
  __m256 vrc1 = _mm256_set1_ps(1.f / bc1), vrc2 = _mm256_set1_ps(1.f / bc2);
  int64_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 gi = _mm256_loadu_ps(g + i);
    __m256 mi = _mm256_fmadd_ps(vb1, _mm256_loadu_ps(m + i), _mm256_mul_ps(vc1, gi));
    __m256 vi = _mm256_fmadd_ps(vb2, _mm256_loadu_ps(v + i),
                                _mm256_mul_ps(vc2, _mm256_mul_ps(gi, gi)));
    _mm256_storeu_ps(m + i, mi);
    _mm256_storeu_ps(v + i, vi);
    __m256 mhat = _mm256_mul_ps(mi, vrc1);
    __m256 denom = _mm256_add_ps(_mm256_sqrt_ps(_mm256_mul_ps(vi, vrc2)), veps);
    __m256 upd = _mm256_div_ps(_mm256_mul_ps(vlr, mhat), denom);
    _mm256_storeu_ps(p + i, _mm256_sub_ps(_mm256_loadu_ps(p + i), upd));
  }
  for (; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.f - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.f - beta2) * g[i] * g[i];
    p[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
  }
}
void adam_step(double* p, const double* g, double* m, double* v, int64_t n,
                       double lr, double beta1, double beta2, double eps, int64_t t) {
  double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  for (int64_t i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
    p[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
  }
}

}  // namespace partrep::kern::avx2
