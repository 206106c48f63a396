// AVX2/FMA variants. This translation unit is compiled with -mavx2 -mfma and
// only entered after the dispatcher has confirmed CPU support.
#include <immintrin.h>

#include <algorithm>
#include <limits>

#include "lab/simd/kernels.hpp"

namespace lab::simd {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline double hmin(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d m = _mm_min_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_min_sd(m, _mm_unpackhi_pd(m, m)));
}

double dot(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  if (i + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    i += 4;
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

void xpby(const double* x, double b, double* y, std::size_t n) {
  const __m256d vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(vb, _mm256_loadu_pd(y + i), _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) y[i] = x[i] + b * y[i];
}

void csr_spmv(std::size_t rows, const std::int64_t* row_ptr, const std::int32_t* col,
              const double* val, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    std::int64_t k = row_ptr[r];
    const std::int64_t end = row_ptr[r + 1];
    __m256d acc = _mm256_setzero_pd();
    for (; k + 4 <= end; k += 4) {
      const __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(col + k));
      const __m256d xv = _mm256_i32gather_pd(x, idx, 8);
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(val + k), xv, acc);
    }
    double s = hsum(acc);
    for (; k < end; ++k) s += val[k] * x[col[k]];
    y[r] = s;
  }
}

double min_sq_dist_boxes(const BoxSoA& b, const double* q) {
  const __m256d zero = _mm256_setzero_pd();
  __m256d best = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  std::size_t i = 0;
  for (; i + 4 <= b.count; i += 4) {
    __m256d d2 = zero;
    for (int k = 0; k < b.dim; ++k) {
      const __m256d qk = _mm256_set1_pd(q[k]);
      const __m256d below = _mm256_sub_pd(_mm256_loadu_pd(b.lo[k] + i), qk);
      const __m256d above = _mm256_sub_pd(qk, _mm256_loadu_pd(b.hi[k] + i));
      const __m256d gap = _mm256_max_pd(_mm256_max_pd(below, above), zero);
      d2 = _mm256_fmadd_pd(gap, gap, d2);
    }
    best = _mm256_min_pd(best, d2);
  }
  double result = hmin(best);
  for (; i < b.count; ++i) {
    double d2 = 0.0;
    for (int k = 0; k < b.dim; ++k) {
      const double gap = std::max({b.lo[k][i] - q[k], q[k] - b.hi[k][i], 0.0});
      d2 += gap * gap;
    }
    result = std::min(result, d2);
  }
  return result;
}

}  // namespace

namespace detail {
const KernelTable kAvx2Table{Isa::avx2, dot, axpy, xpby, csr_spmv, min_sq_dist_boxes};
}  // namespace detail

}  // namespace lab::simd
