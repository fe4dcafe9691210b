// NEON variants for aarch64. Same contracts and blocking scheme as the
// AVX2 TU; covered by the same scalar-equivalence tests when built on ARM.

#include <arm_neon.h>

#include <cmath>
#include <cstring>

#include "partrep/kern/kernels.hpp"

namespace partrep::kern::neon {

namespace {

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

// 4x8 f32 block of C += A*B.
template <bool kTransA>
inline void f32_block4x8(const float* a, const float* b, float* c,
                         int64_t i, int64_t j, int64_t n, int64_t k, int64_t m) {
  float32x4_t acc[4][2];
  for (int r = 0; r < 4; ++r) {
    acc[r][0] = vld1q_f32(c + (i + r) * n + j);
    acc[r][1] = vld1q_f32(c + (i + r) * n + j + 4);
  }
  for (int64_t p = 0; p < k; ++p) {
    const float* bp = b + p * n + j;
    float32x4_t b0 = vld1q_f32(bp);
    float32x4_t b1 = vld1q_f32(bp + 4);
    for (int r = 0; r < 4; ++r) {
      float av = kTransA ? a[p * m + (i + r)] : a[(i + r) * k + p];
      acc[r][0] = vfmaq_n_f32(acc[r][0], b0, av);
      acc[r][1] = vfmaq_n_f32(acc[r][1], b1, av);
    }
  }
  for (int r = 0; r < 4; ++r) {
    vst1q_f32(c + (i + r) * n + j, acc[r][0]);
    vst1q_f32(c + (i + r) * n + j + 4, acc[r][1]);
  }
}

template <bool kTransA>
inline void f64_block2x4(const double* a, const double* b, double* c,
                         int64_t i, int64_t j, int64_t n, int64_t k, int64_t m) {
  float64x2_t acc[2][2];
  for (int r = 0; r < 2; ++r) {
    acc[r][0] = vld1q_f64(c + (i + r) * n + j);
    acc[r][1] = vld1q_f64(c + (i + r) * n + j + 2);
  }
  for (int64_t p = 0; p < k; ++p) {
    const double* bp = b + p * n + j;
    float64x2_t b0 = vld1q_f64(bp);
    float64x2_t b1 = vld1q_f64(bp + 2);
    for (int r = 0; r < 2; ++r) {
      double av = kTransA ? a[p * m + (i + r)] : a[(i + r) * k + p];
      acc[r][0] = vfmaq_n_f64(acc[r][0], b0, av);
      acc[r][1] = vfmaq_n_f64(acc[r][1], b1, av);
    }
  }
  for (int r = 0; r < 2; ++r) {
    vst1q_f64(c + (i + r) * n + j, acc[r][0]);
    vst1q_f64(c + (i + r) * n + j + 2, acc[r][1]);
  }
}

template <bool kTransA>
void gemm_f32(const float* a, const float* b, float* c,
              int64_t m, int64_t n, int64_t k, bool accumulate) {
  if (!accumulate) std::memset(c, 0, sizeof(float) * static_cast<size_t>(m * n));
  int64_t mb = m - m % 4;
  int64_t nb = n - n % 8;
  for (int64_t i = 0; i < mb; i += 4)
    for (int64_t j = 0; j < nb; j += 8)
      f32_block4x8<kTransA>(a, b, c, i, j, n, k, m);
  if (nb < n) edge_block<float, kTransA>(a, b, c, 0, mb, nb, n, n, k, m);
  if (mb < m) edge_block<float, kTransA>(a, b, c, mb, m, 0, n, n, k, m);
}

template <bool kTransA>
void gemm_f64(const double* a, const double* b, double* c,
              int64_t m, int64_t n, int64_t k, bool accumulate) {
  if (!accumulate) std::memset(c, 0, sizeof(double) * static_cast<size_t>(m * n));
  int64_t mb = m - m % 2;
  int64_t nb = n - n % 4;
  for (int64_t i = 0; i < mb; i += 2)
    for (int64_t j = 0; j < nb; j += 4)
      f64_block2x4<kTransA>(a, b, c, i, j, n, k, m);
  if (nb < n) edge_block<double, kTransA>(a, b, c, 0, mb, nb, n, n, k, m);
  if (mb < m) edge_block<double, kTransA>(a, b, c, mb, m, 0, n, n, k, m);
}

}  // namespace

void gemm_nn(const float* a, const float* b, float* c,
             int64_t m, int64_t n, int64_t k, bool acc) {
  gemm_f32<false>(a, b, c, m, n, k, acc);
}
void gemm_nn(const double* a, const double* b, double* c,
             int64_t m, int64_t n, int64_t k, bool acc) {
  gemm_f64<false>(a, b, c, m, n, k, acc);
}
void gemm_tn(const float* a, const float* b, float* c,
             int64_t m, int64_t n, int64_t k, bool acc) {
  gemm_f32<true>(a, b, c, m, n, k, acc);
}
void gemm_tn(const double* a, const double* b, double* c,
             int64_t m, int64_t n, int64_t k, bool acc) {
  gemm_f64<true>(a, b, c, m, n, k, acc);
}

void gemm_nt(const float* a, const float* b, float* c,
             int64_t m, int64_t n, int64_t k, bool acc) {
  int64_t kb = k - k % 4;
  for (int64_t i = 0; i < m; ++i) {
    const float* ai = a + i * k;
    for (int64_t j = 0; j < n; ++j) {
      const float* bj = b + j * k;
      float32x4_t s = vdupq_n_f32(0.f);
      for (int64_t p = 0; p < kb; p += 4)
        s = vfmaq_f32(s, vld1q_f32(ai + p), vld1q_f32(bj + p));
      float r = vaddvq_f32(s);
      for (int64_t p = kb; p < k; ++p) r += ai[p] * bj[p];
      c[i * n + j] = acc ? c[i * n + j] + r : r;
    }
  }
}
void gemm_nt(const double* a, const double* b, double* c,
             int64_t m, int64_t n, int64_t k, bool acc) {
  int64_t kb = k - k % 2;
  for (int64_t i = 0; i < m; ++i) {
    const double* ai = a + i * k;
    for (int64_t j = 0; j < n; ++j) {
      const double* bj = b + j * k;
      float64x2_t s = vdupq_n_f64(0.0);
      for (int64_t p = 0; p < kb; p += 2)
        s = vfmaq_f64(s, vld1q_f64(ai + p), vld1q_f64(bj + p));
      double r = vaddvq_f64(s);
      for (int64_t p = kb; p < k; ++p) r += ai[p] * bj[p];
      c[i * n + j] = acc ? c[i * n + j] + r : r;
    }
  }
}

void add(const float* x, const float* y, float* out, int64_t n) {
  int64_t i = 0;
  for (; i + 4 <= n; i += 4) vst1q_f32(out + i, vaddq_f32(vld1q_f32(x + i), vld1q_f32(y + i)));
  for (; i < n; ++i) out[i] = x[i] + y[i];
}
void add(const double* x, const double* y, double* out, int64_t n) {
  int64_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vaddq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
  for (; i < n; ++i) out[i] = x[i] + y[i];
}
void sub(const float* x, const float* y, float* out, int64_t n) {
  int64_t i = 0;
  for (; i + 4 <= n; i += 4) vst1q_f32(out + i, vsubq_f32(vld1q_f32(x + i), vld1q_f32(y + i)));
  for (; i < n; ++i) out[i] = x[i] - y[i];
}
void sub(const double* x, const double* y, double* out, int64_t n) {
  int64_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vsubq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
  for (; i < n; ++i) out[i] = x[i] - y[i];
}
void mul(const float* x, const float* y, float* out, int64_t n) {
  int64_t i = 0;
  for (; i + 4 <= n; i += 4) vst1q_f32(out + i, vmulq_f32(vld1q_f32(x + i), vld1q_f32(y + i)));
  for (; i < n; ++i) out[i] = x[i] * y[i];
}
void mul(const double* x, const double* y, double* out, int64_t n) {
  int64_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vmulq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
  for (; i < n; ++i) out[i] = x[i] * y[i];
}
void axpy(float alpha, const float* x, float* y, int64_t n) {
  int64_t i = 0;
  for (; i + 4 <= n; i += 4) vst1q_f32(y + i, vfmaq_n_f32(vld1q_f32(y + i), vld1q_f32(x + i), alpha));
  for (; i < n; ++i) y[i] += alpha * x[i];
}
void axpy(double alpha, const double* x, double* y, int64_t n) {
  int64_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_n_f64(vld1q_f64(y + i), vld1q_f64(x + i), alpha));
  for (; i < n; ++i) y[i] += alpha * x[i];
}
void scale(float alpha, float* x, int64_t n) {
  int64_t i = 0;
  for (; i + 4 <= n; i += 4) vst1q_f32(x + i, vmulq_n_f32(vld1q_f32(x + i), alpha));
  for (; i < n; ++i) x[i] *= alpha;
}
void scale(double alpha, double* x, int64_t n) {
  int64_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(x + i, vmulq_n_f64(vld1q_f64(x + i), alpha));
  for (; i < n; ++i) x[i] *= alpha;
}
float dot(const float* x, const float* y, int64_t n) {
  float32x4_t s = vdupq_n_f32(0.f);
  int64_t i = 0;
  for (; i + 4 <= n; i += 4) s = vfmaq_f32(s, vld1q_f32(x + i), vld1q_f32(y + i));
  float acc = vaddvq_f32(s);
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}
double dot(const double* x, const double* y, int64_t n) {
  float64x2_t s = vdupq_n_f64(0.0);
  int64_t i = 0;
  for (; i + 2 <= n; i += 2) s = vfmaq_f64(s, vld1q_f64(x + i), vld1q_f64(y + i));
  double acc = vaddvq_f64(s);
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}
float sum(const float* x, int64_t n) {
  float32x4_t s = vdupq_n_f32(0.f);
  int64_t i = 0;
  for (; i + 4 <= n; i += 4) s = vaddq_f32(s, vld1q_f32(x + i));
  float acc = vaddvq_f32(s);
  for (; i < n; ++i) acc += x[i];
  return acc;
}
double sum(const double* x, int64_t n) {
  float64x2_t s = vdupq_n_f64(0.0);
  int64_t i = 0;
  for (; i + 2 <= n; i += 2) s = vaddq_f64(s, vld1q_f64(x + i));
  double acc = vaddvq_f64(s);
  for (; i < n; ++i) acc += x[i];
  return acc;
}
float sumsq(const float* x, int64_t n) {
  float32x4_t s = vdupq_n_f32(0.f);
  int64_t i = 0;
  for (; i + 4 <= n; i += 4) {
    float32x4_t v = vld1q_f32(x + i);
    s = vfmaq_f32(s, v, v);
  }
  float acc = vaddvq_f32(s);
  for (; i < n; ++i) acc += x[i] * x[i];
  return acc;
}
double sumsq(const double* x, int64_t n) {
  float64x2_t s = vdupq_n_f64(0.0);
  int64_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t v = vld1q_f64(x + i);
    s = vfmaq_f64(s, v, v);
  }
  double acc = vaddvq_f64(s);
  for (; i < n; ++i) acc += x[i] * x[i];
  return acc;
}
float sqdist(const float* x, const float* y, int64_t n) {
  float32x4_t s = vdupq_n_f32(0.f);
  int64_t i = 0;
  for (; i + 4 <= n; i += 4) {
    float32x4_t d = vsubq_f32(vld1q_f32(x + i), vld1q_f32(y + i));
    s = vfmaq_f32(s, d, d);
  }
  float acc = vaddvq_f32(s);
  for (; i < n; ++i) {
    float d = x[i] - y[i];
    acc += d * d;
  }
  return acc;
}
double sqdist(const double* x, const double* y, int64_t n) {
  float64x2_t s = vdupq_n_f64(0.0);
  int64_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t d = vsubq_f64(vld1q_f64(x + i), vld1q_f64(y + i));
    s = vfmaq_f64(s, d, d);
  }
  double acc = vaddvq_f64(s);
  for (; i < n; ++i) {
    double d = x[i] - y[i];
    acc += d * d;
  }
  return acc;
}
void relu_fwd(const float* x, float* y, int64_t n) {
  float32x4_t z = vdupq_n_f32(0.f);
  int64_t i = 0;
  for (; i + 4 <= n; i += 4) vst1q_f32(y + i, vmaxq_f32(z, vld1q_f32(x + i)));
  for (; i < n; ++i) y[i] = x[i] > 0.f ? x[i] : 0.f;
}
void relu_fwd(const double* x, double* y, int64_t n) {
  float64x2_t z = vdupq_n_f64(0.0);
  int64_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vmaxq_f64(z, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}
void relu_bwd(const float* x, const float* dy, float* dx, int64_t n) {
  float32x4_t z = vdupq_n_f32(0.f);
  int64_t i = 0;
  for (; i + 4 <= n; i += 4) {
    uint32x4_t mask = vcgtq_f32(vld1q_f32(x + i), z);
    float32x4_t g = vld1q_f32(dy + i);
    vst1q_f32(dx + i, vreinterpretq_f32_u32(vandq_u32(mask, vreinterpretq_u32_f32(g))));
  }
  for (; i < n; ++i) dx[i] = x[i] > 0.f ? dy[i] : 0.f;
}
void relu_bwd(const double* x, const double* dy, double* dx, int64_t n) {
  float64x2_t z = vdupq_n_f64(0.0);
  int64_t i = 0;
  for (; i + 2 <= n; i += 2) {
    uint64x2_t mask = vcgtq_f64(vld1q_f64(x + i), z);
    float64x2_t g = vld1q_f64(dy + i);
    vst1q_f64(dx + i, vreinterpretq_f64_u64(vandq_u64(mask, vreinterpretq_u64_f64(g))));
  }
  for (; i < n; ++i) dx[i] = x[i] > 0.0 ? dy[i] : 0.0;
}
void adam_step(float* p, const float* g, float* m, float* v, int64_t n,
               float lr, float beta1, float beta2, float eps, int64_t t) {
  float bc1 = 1.f - std::pow(beta1, static_cast<float>(t));
  float bc2 = 1.f - std::pow(beta2, static_cast<float>(t));
  for (int64_t i = 0; i < n; ++i) {
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

}  // namespace partrep::kern::neon
