// AVX2 kernels, 4-wide double lanes. Elementwise ops use explicit mul+add
// (no fma) so they match the scalar backend bit for bit; reductions differ
// from scalar only by summation order.

#if defined(__x86_64__)

#include <immintrin.h>

#include <cstring>

#include "vdsp/kernels.hpp"

namespace vdsp::kernels {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  __m128d s = _mm_add_pd(lo, hi);
  s = _mm_add_sd(s, _mm_unpackhi_pd(s, s));
  return _mm_cvtsd_f64(s);
}

inline double hmax(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  __m128d m = _mm_max_pd(lo, hi);
  m = _mm_max_sd(m, _mm_unpackhi_pd(m, m));
  return _mm_cvtsd_f64(m);
}

double reduce_max_avx2(const double* x, std::size_t n) {
  std::size_t i = 0;
  double m;
  if (n >= 4) {
    __m256d acc = _mm256_loadu_pd(x);
    for (i = 4; i + 4 <= n; i += 4) {
      acc = _mm256_max_pd(acc, _mm256_loadu_pd(x + i));
    }
    m = hmax(acc);
  } else {
    m = x[0];
    i = 1;
  }
  for (; i < n; ++i) {
    if (x[i] > m) m = x[i];
  }
  return m;
}

double reduce_sum_avx2(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d yv = _mm256_loadu_pd(y + i);
    yv = _mm256_add_pd(yv, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
    _mm256_storeu_pd(y + i, yv);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void scale_avx2(double* x, std::size_t n, double a) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), av));
  }
  for (; i < n; ++i) x[i] *= a;
}

void masked_fill_avx2(double* x, const std::uint8_t* keep, std::size_t n, double fill) {
  const __m256d fv = _mm256_set1_pd(fill);
  const __m256i zero = _mm256_setzero_si256();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    std::int32_t packed;
    std::memcpy(&packed, keep + i, 4);
    __m256i k64 = _mm256_cvtepi32_epi64(_mm_cvtepu8_epi32(_mm_cvtsi32_si128(packed)));
    __m256d drop = _mm256_castsi256_pd(_mm256_cmpeq_epi64(k64, zero));
    __m256d xv = _mm256_loadu_pd(x + i);
    _mm256_storeu_pd(x + i, _mm256_blendv_pd(xv, fv, drop));
  }
  for (; i < n; ++i) {
    if (keep[i] == 0) x[i] = fill;
  }
}

}  // namespace

const Ops& avx2_ops() {
  static const Ops ops{reduce_max_avx2, reduce_sum_avx2, dot_avx2,
                       axpy_avx2,       scale_avx2,      masked_fill_avx2};
  return ops;
}

}  // namespace vdsp::kernels

#endif  // __x86_64__
