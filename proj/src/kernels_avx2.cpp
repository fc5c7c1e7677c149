// AVX2 variants of the data-parallel kernels.  This translation unit is
// compiled with -mavx2 (and only on x86-64); everything else in the library
// stays at the baseline ISA.  No FMA: mul/add stay separate so results match
// the scalar reference bit for bit.

#include "rham/kernels.hpp"

#if defined(__x86_64__) && defined(__AVX2__)

#include <immintrin.h>

namespace rham::kernels {
namespace {

void diff1_avx2(const double* pad, double* out, std::size_t n, double inv_2h) {
  const __m256d s = _mm256_set1_pd(inv_2h);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d hi = _mm256_loadu_pd(pad + i + 2);
    __m256d lo = _mm256_loadu_pd(pad + i);
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_sub_pd(hi, lo), s));
  }
  for (; i < n; ++i) out[i] = (pad[i + 2] - pad[i]) * inv_2h;
}

void diff2_avx2(const double* pad, double* out, std::size_t n, double inv_h2) {
  const __m256d s = _mm256_set1_pd(inv_h2);
  const __m256d two = _mm256_set1_pd(2.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d hi = _mm256_loadu_pd(pad + i + 2);
    __m256d mid = _mm256_loadu_pd(pad + i + 1);
    __m256d lo = _mm256_loadu_pd(pad + i);
    __m256d t = _mm256_sub_pd(hi, _mm256_mul_pd(two, mid));
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_add_pd(t, lo), s));
  }
  for (; i < n; ++i) out[i] = ((pad[i + 2] - 2.0 * pad[i + 1]) + pad[i]) * inv_h2;
}

void weighted_stencil_avx2(const double* w, const double* a, const double* c,
                           const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d cb = _mm256_mul_pd(_mm256_loadu_pd(c + i), _mm256_loadu_pd(b + i));
    __m256d sum = _mm256_add_pd(_mm256_loadu_pd(a + i), cb);
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(w + i), sum));
  }
  for (; i < n; ++i) out[i] = w[i] * (a[i] + c[i] * b[i]);
}

void weighted_product_avx2(const double* w, const double* a, const double* b,
                           double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d ab = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(w + i), ab));
  }
  for (; i < n; ++i) out[i] = w[i] * (a[i] * b[i]);
}

void product_avx2(const double* a, const double* b, double* out,
                  std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(
        out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void axpy_avx2(const double* a, double s, const double* b, double* out,
               std::size_t n) {
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d sb = _mm256_mul_pd(vs, _mm256_loadu_pd(b + i));
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), sb));
  }
  for (; i < n; ++i) out[i] = a[i] + s * b[i];
}

void rk4_combine_avx2(const double* y, const double* k1, const double* k2,
                      const double* k3, const double* k4, double s, double* out,
                      std::size_t n) {
  const __m256d vs = _mm256_set1_pd(s);
  const __m256d two = _mm256_set1_pd(2.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d outer = _mm256_add_pd(_mm256_loadu_pd(k1 + i), _mm256_loadu_pd(k4 + i));
    __m256d inner = _mm256_add_pd(_mm256_loadu_pd(k2 + i), _mm256_loadu_pd(k3 + i));
    __m256d sum = _mm256_add_pd(outer, _mm256_mul_pd(two, inner));
    _mm256_storeu_pd(out + i,
                     _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_mul_pd(vs, sum)));
  }
  for (; i < n; ++i)
    out[i] = y[i] + s * ((k1[i] + k4[i]) + 2.0 * (k2[i] + k3[i]));
}

}  // namespace

const Ops* avx2_ops_impl() {
  static const Ops ops{
      "avx2",
      diff1_avx2,
      diff2_avx2,
      weighted_stencil_avx2,
      weighted_product_avx2,
      product_avx2,
      axpy_avx2,
      rk4_combine_avx2,
  };
  return &ops;
}

}  // namespace rham::kernels

#else

namespace rham::kernels {
const Ops* avx2_ops_impl() { return nullptr; }
}  // namespace rham::kernels

#endif
