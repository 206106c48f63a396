// NEON variants for aarch64 (Advanced SIMD is mandatory there).
#include <arm_neon.h>

#include <algorithm>
#include <limits>

#include "lab/simd/kernels.hpp"

namespace lab::simd {
namespace {

double dot(const double* x, const double* y, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

void xpby(const double* x, double b, double* y, std::size_t n) {
  const float64x2_t vb = vdupq_n_f64(b);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(x + i), vb, vld1q_f64(y + i)));
  for (; i < n; ++i) y[i] = x[i] + b * y[i];
}

void csr_spmv(std::size_t rows, const std::int64_t* row_ptr, const std::int32_t* col,
              const double* val, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    std::int64_t k = row_ptr[r];
    const std::int64_t end = row_ptr[r + 1];
    float64x2_t acc = vdupq_n_f64(0.0);
    for (; k + 2 <= end; k += 2) {
      const double gathered[2] = {x[col[k]], x[col[k + 1]]};
      acc = vfmaq_f64(acc, vld1q_f64(val + k), vld1q_f64(gathered));
    }
    double s = vaddvq_f64(acc);
    for (; k < end; ++k) s += val[k] * x[col[k]];
    y[r] = s;
  }
}

double min_sq_dist_boxes(const BoxSoA& b, const double* q) {
  const float64x2_t zero = vdupq_n_f64(0.0);
  float64x2_t best = vdupq_n_f64(std::numeric_limits<double>::infinity());
  std::size_t i = 0;
  for (; i + 2 <= b.count; i += 2) {
    float64x2_t d2 = zero;
    for (int k = 0; k < b.dim; ++k) {
      const float64x2_t qk = vdupq_n_f64(q[k]);
      const float64x2_t below = vsubq_f64(vld1q_f64(b.lo[k] + i), qk);
      const float64x2_t above = vsubq_f64(qk, vld1q_f64(b.hi[k] + i));
      const float64x2_t gap = vmaxq_f64(vmaxq_f64(below, above), zero);
      d2 = vfmaq_f64(d2, gap, gap);
    }
    best = vminq_f64(best, d2);
  }
  double result = vminvq_f64(best);
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
const KernelTable kNeonTable{Isa::neon, dot, axpy, xpby, csr_spmv, min_sq_dist_boxes};
}  // namespace detail

}  // namespace lab::simd
