#include "lab/simd/kernels.hpp"

#include <algorithm>
#include <limits>

namespace lab::simd {
namespace {

double dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void xpby(const double* x, double b, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + b * y[i];
}

void csr_spmv(std::size_t rows, const std::int64_t* row_ptr, const std::int32_t* col,
              const double* val, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::int64_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) s += val[k] * x[col[k]];
    y[r] = s;
  }
}

double min_sq_dist_boxes(const BoxSoA& b, const double* q) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < b.count; ++i) {
    double d2 = 0.0;
    for (int k = 0; k < b.dim; ++k) {
      const double below = b.lo[k][i] - q[k];
      const double above = q[k] - b.hi[k][i];
      const double gap = std::max({below, above, 0.0});
      d2 += gap * gap;
    }
    best = std::min(best, d2);
  }
  return best;
}

}  // namespace

namespace detail {
const KernelTable kScalarTable{Isa::scalar, dot, axpy, xpby, csr_spmv, min_sq_dist_boxes};
}  // namespace detail

}  // namespace lab::simd
