#include "partrep/kern/kernels.hpp"

namespace partrep::kern {

#if defined(PARTREP_HAVE_AVX2_TU)
#define PARTREP_DISPATCH(call_scalar, call_simd) \
  if (active_isa() == Isa::avx2) { call_simd; } else { call_scalar; }
#define PARTREP_SIMD_NS avx2
#elif defined(PARTREP_HAVE_NEON_TU)
#define PARTREP_DISPATCH(call_scalar, call_simd) \
  if (active_isa() == Isa::neon) { call_simd; } else { call_scalar; }
#define PARTREP_SIMD_NS neon
#else
#define PARTREP_DISPATCH(call_scalar, call_simd) call_scalar;
#define PARTREP_SIMD_NS scalar
#endif

template <class T>
void gemm_nn(const T* a, const T* b, T* c, int64_t m, int64_t n, int64_t k, bool acc) {
  PARTREP_DISPATCH(scalar::gemm_nn(a, b, c, m, n, k, acc),
                   PARTREP_SIMD_NS::gemm_nn(a, b, c, m, n, k, acc))
}
template <class T>
void gemm_tn(const T* a, const T* b, T* c, int64_t m, int64_t n, int64_t k, bool acc) {
  PARTREP_DISPATCH(scalar::gemm_tn(a, b, c, m, n, k, acc),
                   PARTREP_SIMD_NS::gemm_tn(a, b, c, m, n, k, acc))
}
template <class T>
void gemm_nt(const T* a, const T* b, T* c, int64_t m, int64_t n, int64_t k, bool acc) {
  PARTREP_DISPATCH(scalar::gemm_nt(a, b, c, m, n, k, acc),
                   PARTREP_SIMD_NS::gemm_nt(a, b, c, m, n, k, acc))
}
template <class T>
void add(const T* x, const T* y, T* out, int64_t n) {
  PARTREP_DISPATCH(scalar::add(x, y, out, n), PARTREP_SIMD_NS::add(x, y, out, n))
}
template <class T>
void sub(const T* x, const T* y, T* out, int64_t n) {
  PARTREP_DISPATCH(scalar::sub(x, y, out, n), PARTREP_SIMD_NS::sub(x, y, out, n))
}
template <class T>
void mul(const T* x, const T* y, T* out, int64_t n) {
  PARTREP_DISPATCH(scalar::mul(x, y, out, n), PARTREP_SIMD_NS::mul(x, y, out, n))
}
template <class T>
void axpy(T alpha, const T* x, T* y, int64_t n) {
  PARTREP_DISPATCH(scalar::axpy(alpha, x, y, n), PARTREP_SIMD_NS::axpy(alpha, x, y, n))
}
template <class T>
void scale(T alpha, T* x, int64_t n) {
  PARTREP_DISPATCH(scalar::scale(alpha, x, n), PARTREP_SIMD_NS::scale(alpha, x, n))
}
template <class T>
T dot(const T* x, const T* y, int64_t n) {
  PARTREP_DISPATCH(return scalar::dot(x, y, n), return PARTREP_SIMD_NS::dot(x, y, n))
}
template <class T>
T sum(const T* x, int64_t n) {
  PARTREP_DISPATCH(return scalar::sum(x, n), return PARTREP_SIMD_NS::sum(x, n))
}
template <class T>
T sumsq(const T* x, int64_t n) {
  PARTREP_DISPATCH(return scalar::sumsq(x, n), return PARTREP_SIMD_NS::sumsq(x, n))
}
template <class T>
T sqdist(const T* x, const T* y, int64_t n) {
  PARTREP_DISPATCH(return scalar::sqdist(x, y, n), return PARTREP_SIMD_NS::sqdist(x, y, n))
}
template <class T>
void relu_fwd(const T* x, T* y, int64_t n) {
  PARTREP_DISPATCH(scalar::relu_fwd(x, y, n), PARTREP_SIMD_NS::relu_fwd(x, y, n))
}
template <class T>
void relu_bwd(const T* x, const T* dy, T* dx, int64_t n) {
  PARTREP_DISPATCH(scalar::relu_bwd(x, dy, dx, n), PARTREP_SIMD_NS::relu_bwd(x, dy, dx, n))
}
template <class T>
void sigmoid(const T* x, T* y, int64_t n) {
  scalar::sigmoid(x, y, n);  // exp-bound; no SIMD variant
}
template <class T>
void adam_step(T* p, const T* g, T* m, T* v, int64_t n, T lr, T b1, T b2, T eps, int64_t t) {
  PARTREP_DISPATCH(scalar::adam_step(p, g, m, v, n, lr, b1, b2, eps, t),
                   PARTREP_SIMD_NS::adam_step(p, g, m, v, n, lr, b1, b2, eps, t))
}

#define PARTREP_INSTANTIATE_DISPATCH(T)                                                       \
  template void gemm_nn<T>(const T*, const T*, T*, int64_t, int64_t, int64_t, bool);          \
  template void gemm_tn<T>(const T*, const T*, T*, int64_t, int64_t, int64_t, bool);          \
  template void gemm_nt<T>(const T*, const T*, T*, int64_t, int64_t, int64_t, bool);          \
  template void add<T>(const T*, const T*, T*, int64_t);                                      \
  template void sub<T>(const T*, const T*, T*, int64_t);                                      \
  template void mul<T>(const T*, const T*, T*, int64_t);                                      \
  template void axpy<T>(T, const T*, T*, int64_t);                                            \
  template void scale<T>(T, T*, int64_t);                                                     \
  template T dot<T>(const T*, const T*, int64_t);                                             \
  template T sum<T>(const T*, int64_t);                                                       \
  template T sumsq<T>(const T*, int64_t);                                                     \
  template T sqdist<T>(const T*, const T*, int64_t);                                          \
  template void relu_fwd<T>(const T*, T*, int64_t);                                           \
  template void relu_bwd<T>(const T*, const T*, T*, int64_t);                                 \
  template void sigmoid<T>(const T*, T*, int64_t);                                            \
  template void adam_step<T>(T*, const T*, T*, T*, int64_t, T, T, T, T, int64_t);

PARTREP_INSTANTIATE_DISPATCH(float)
PARTREP_INSTANTIATE_DISPATCH(double)

}  // namespace partrep::kern
