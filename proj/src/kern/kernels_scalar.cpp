#include <cmath>
#include <cstring>

#include "partrep/kern/kernels.hpp"

namespace partrep::kern::scalar {

template <class T>
void gemm_nn(const T* a, const T* b, T* c, int64_t m, int64_t n, int64_t k, bool accumulate) {
  for (int64_t i = 0; i < m; ++i) {
    T* ci = c + i * n;
    if (!accumulate) std::memset(ci, 0, sizeof(T) * static_cast<size_t>(n));
    const T* ai = a + i * k;
    for (int64_t p = 0; p < k; ++p) {
      T av = ai[p];
      if (av == T(0)) continue;
      const T* bp = b + p * n;
      for (int64_t j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

template <class T>
void gemm_tn(const T* a, const T* b, T* c, int64_t m, int64_t n, int64_t k, bool accumulate) {
  // a stored [k,m]
  for (int64_t i = 0; i < m; ++i) {
    T* ci = c + i * n;
    if (!accumulate) std::memset(ci, 0, sizeof(T) * static_cast<size_t>(n));
    for (int64_t p = 0; p < k; ++p) {
      T av = a[p * m + i];
      if (av == T(0)) continue;
      const T* bp = b + p * n;
      for (int64_t j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

template <class T>
void gemm_nt(const T* a, const T* b, T* c, int64_t m, int64_t n, int64_t k, bool accumulate) {
  // b stored [n,k]
  for (int64_t i = 0; i < m; ++i) {
    const T* ai = a + i * k;
    T* ci = c + i * n;
    for (int64_t j = 0; j < n; ++j) {
      const T* bj = b + j * k;
      T acc = 0;
      for (int64_t p = 0; p < k; ++p) acc += ai[p] * bj[p];
      ci[j] = accumulate ? ci[j] + acc : acc;
    }
  }
}

template <class T>
void add(const T* x, const T* y, T* out, int64_t n) {
  for (int64_t i = 0; i < n; ++i) out[i] = x[i] + y[i];
}

template <class T>
void sub(const T* x, const T* y, T* out, int64_t n) {
  for (int64_t i = 0; i < n; ++i) out[i] = x[i] - y[i];
}

template <class T>
void mul(const T* x, const T* y, T* out, int64_t n) {
  for (int64_t i = 0; i < n; ++i) out[i] = x[i] * y[i];
}

template <class T>
void axpy(T alpha, const T* x, T* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

template <class T>
void scale(T alpha, T* x, int64_t n) {
  for (int64_t i = 0; i < n; ++i) x[i] *= alpha;
}

template <class T>
T dot(const T* x, const T* y, int64_t n) {
  T acc = 0;
  for (int64_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

template <class T>
T sum(const T* x, int64_t n) {
  T acc = 0;
  for (int64_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

template <class T>
T sumsq(const T* x, int64_t n) {
  T acc = 0;
  for (int64_t i = 0; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

template <class T>
T sqdist(const T* x, const T* y, int64_t n) {
  T acc = 0;
  for (int64_t i = 0; i < n; ++i) {
    T d = x[i] - y[i];
    acc += d * d;
  }
  return acc;
}

template <class T>
void relu_fwd(const T* x, T* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
}

template <class T>
void relu_bwd(const T* x, const T* dy, T* dx, int64_t n) {
  for (int64_t i = 0; i < n; ++i) dx[i] = x[i] > T(0) ? dy[i] : T(0);
}

template <class T>
void sigmoid(const T* x, T* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = T(1) / (T(1) + std::exp(-x[i]));
}

template <class T>
void adam_step(T* p, const T* g, T* m, T* v, int64_t n,
               T lr, T beta1, T beta2, T eps, int64_t t) {
  T bc1 = T(1) - std::pow(beta1, static_cast<T>(t));
  T bc2 = T(1) - std::pow(beta2, static_cast<T>(t));
  for (int64_t i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + (T(1) - beta1) * g[i];
    v[i] = beta2 * v[i] + (T(1) - beta2) * g[i] * g[i];
    T mhat = m[i] / bc1;
    T vhat = v[i] / bc2;
    p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

#define PARTREP_INSTANTIATE_SCALAR(T)                                                         \
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

PARTREP_INSTANTIATE_SCALAR(float)
PARTREP_INSTANTIATE_SCALAR(double)

}  // namespace partrep::kern::scalar
