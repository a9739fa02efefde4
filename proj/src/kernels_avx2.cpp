// Compiled with -mavx2 -mfma; only reached through the dispatcher after a
// CPU feature check.
#include "qtopo/kernels.hpp"

#include <cstddef>

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#define QTOPO_HAVE_AVX2_BUILD 1
#endif

namespace qtopo::kernels::avx2 {

#ifdef QTOPO_HAVE_AVX2_BUILD

namespace {
inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}
}  // namespace

double dot(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(&x[i]), _mm256_loadu_pd(&y[i]), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(&x[i + 4]), _mm256_loadu_pd(&y[i + 4]), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(&x[i]), _mm256_loadu_pd(&y[i]), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  const std::size_t n = x.size();
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(&y[i], _mm256_fmadd_pd(va, _mm256_loadu_pd(&x[i]), _mm256_loadu_pd(&y[i])));
  for (; i < n; ++i) y[i] += a * x[i];
}

void xpay(std::span<const double> x, double a, std::span<double> y) {
  const std::size_t n = x.size();
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(&y[i], _mm256_fmadd_pd(va, _mm256_loadu_pd(&y[i]), _mm256_loadu_pd(&x[i])));
  for (; i < n; ++i) y[i] = x[i] + a * y[i];
}

void hadamard(std::span<const double> x, std::span<const double> y, std::span<double> out) {
  const std::size_t n = x.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(&out[i], _mm256_mul_pd(_mm256_loadu_pd(&x[i]), _mm256_loadu_pd(&y[i])));
  for (; i < n; ++i) out[i] = x[i] * y[i];
}

void spmv(const CsrView& a, std::span<const double> x, std::span<double> y) {
  const double* xp = x.data();
  for (std::int32_t r = 0; r < a.rows; ++r) {
    std::int32_t k = a.row_ptr[r];
    const std::int32_t end = a.row_ptr[r + 1];
    __m256d acc = _mm256_setzero_pd();
    for (; k + 4 <= end; k += 4) {
      const __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(&a.col[k]));
      const __m256d xv = _mm256_i32gather_pd(xp, idx, 8);
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(&a.val[k]), xv, acc);
    }
    double s = hsum(acc);
    for (; k < end; ++k) s += a.val[k] * xp[a.col[k]];
    y[r] = s;
  }
}

#else

double dot(std::span<const double> x, std::span<const double> y) { return scalar::dot(x, y); }
void axpy(double a, std::span<const double> x, std::span<double> y) { scalar::axpy(a, x, y); }
void xpay(std::span<const double> x, double a, std::span<double> y) { scalar::xpay(x, a, y); }
void hadamard(std::span<const double> x, std::span<const double> y, std::span<double> out) {
  scalar::hadamard(x, y, out);
}
void spmv(const CsrView& a, std::span<const double> x, std::span<double> y) { scalar::spmv(a, x, y); }

#endif

}  // namespace qtopo::kernels::avx2
