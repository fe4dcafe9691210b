#pragma once

#include <cstdint>

#include "partrep/kern/backend.hpp"

// Data-parallel inner loops. Every kernel has a scalar reference
// implementation and SIMD variants selected at runtime; the test suite
// asserts scalar/SIMD equivalence on ragged sizes. Matrices are dense
// row-major. GEMM reductions run serially over k per output element, so
// results are independent of how callers shard m or n across threads.

namespace partrep::kern {

// C[m,n] (+)= A[m,k] * B[k,n]
template <class T>
void gemm_nn(const T* a, const T* b, T* c, int64_t m, int64_t n, int64_t k, bool accumulate);

// C[m,n] (+)= A^T * B with A stored [k,m]
template <class T>
void gemm_tn(const T* a, const T* b, T* c, int64_t m, int64_t n, int64_t k, bool accumulate);

// C[m,n] (+)= A * B^T with B stored [n,k]
template <class T>
void gemm_nt(const T* a, const T* b, T* c, int64_t m, int64_t n, int64_t k, bool accumulate);

template <class T> void add(const T* x, const T* y, T* out, int64_t n);
template <class T> void sub(const T* x, const T* y, T* out, int64_t n);
template <class T> void mul(const T* x, const T* y, T* out, int64_t n);
template <class T> void axpy(T alpha, const T* x, T* y, int64_t n);  // y += alpha*x
template <class T> void scale(T alpha, T* x, int64_t n);

template <class T> T dot(const T* x, const T* y, int64_t n);
template <class T> T sum(const T* x, int64_t n);
template <class T> T sumsq(const T* x, int64_t n);
template <class T> T sqdist(const T* x, const T* y, int64_t n);

template <class T> void relu_fwd(const T* x, T* y, int64_t n);
// dx = dy where x > 0 else 0
template <class T> void relu_bwd(const T* x, const T* dy, T* dx, int64_t n);
template <class T> void sigmoid(const T* x, T* y, int64_t n);

// Bias-corrected Adam update over one parameter block.
template <class T>
void adam_step(T* p, const T* g, T* m, T* v, int64_t n,
               T lr, T beta1, T beta2, T eps, int64_t t);

namespace scalar {
template <class T>
void gemm_nn(const T* a, const T* b, T* c, int64_t m, int64_t n, int64_t k, bool accumulate);
template <class T>
void gemm_tn(const T* a, const T* b, T* c, int64_t m, int64_t n, int64_t k, bool accumulate);
template <class T>
void gemm_nt(const T* a, const T* b, T* c, int64_t m, int64_t n, int64_t k, bool accumulate);
template <class T> void add(const T* x, const T* y, T* out, int64_t n);
template <class T> void sub(const T* x, const T* y, T* out, int64_t n);
template <class T> void mul(const T* x, const T* y, T* out, int64_t n);
template <class T> void axpy(T alpha, const T* x, T* y, int64_t n);
template <class T> void scale(T alpha, T* x, int64_t n);
template <class T> T dot(const T* x, const T* y, int64_t n);
template <class T> T sum(const T* x, int64_t n);
template <class T> T sumsq(const T* x, int64_t n);
template <class T> T sqdist(const T* x, const T* y, int64_t n);
template <class T> void relu_fwd(const T* x, T* y, int64_t n);
template <class T> void relu_bwd(const T* x, const T* dy, T* dx, int64_t n);
template <class T> void sigmoid(const T* x, T* y, int64_t n);
template <class T>
void adam_step(T* p, const T* g, T* m, T* v, int64_t n,
               T lr, T beta1, T beta2, T eps, int64_t t);
}  // namespace scalar

// SIMD variants are plain overloads per element type; each lives in its own
// TU compiled with the matching -m flags and is reached only after the
// runtime CPU check.
#define PARTREP_DECLARE_SIMD_VARIANT(T)                                                      \
  void gemm_nn(const T* a, const T* b, T* c, int64_t m, int64_t n, int64_t k, bool acc);     \
  void gemm_tn(const T* a, const T* b, T* c, int64_t m, int64_t n, int64_t k, bool acc);     \
  void gemm_nt(const T* a, const T* b, T* c, int64_t m, int64_t n, int64_t k, bool acc);     \
  void add(const T* x, const T* y, T* out, int64_t n);                                       \
  void sub(const T* x, const T* y, T* out, int64_t n);                                       \
  void mul(const T* x, const T* y, T* out, int64_t n);                                       \
  void axpy(T alpha, const T* x, T* y, int64_t n);                                           \
  void scale(T alpha, T* x, int64_t n);                                                      \
  T dot(const T* x, const T* y, int64_t n);                                                  \
  T sum(const T* x, int64_t n);                                                              \
  T sumsq(const T* x, int64_t n);                                                            \
  T sqdist(const T* x, const T* y, int64_t n);                                               \
  void relu_fwd(const T* x, T* y, int64_t n);                                                \
  void relu_bwd(const T* x, const T* dy, T* dx, int64_t n);                                  \
  void adam_step(T* p, const T* g, T* m, T* v, int64_t n, T lr, T beta1, T beta2, T eps,     \
                 int64_t t);

#if defined(PARTREP_HAVE_AVX2_TU)
namespace avx2 {
PARTREP_DECLARE_SIMD_VARIANT(float)
PARTREP_DECLARE_SIMD_VARIANT(double)
}  // namespace avx2
#endif

#if defined(PARTREP_HAVE_NEON_TU)
namespace neon {
PARTREP_DECLARE_SIMD_VARIANT(float)
PARTREP_DECLARE_SIMD_VARIANT(double)
}  // namespace neon
#endif

#undef PARTREP_DECLARE_SIMD_VARIANT

}  // namespace partrep::kern
