#pragma once

#include <array>
#include <cmath>

namespace lab {

inline constexpr int kMaxDim = 3;

/// Point in R^d with d <= 3; unused trailing coordinates are zero.
using Point = std::array<double, kMaxDim>;

inline double squared_norm(const Point& p) { return p[0] * p[0] + p[1] * p[1] + p[2] * p[2]; }

inline double distance(const Point& a, const Point& b) {
  const Point d{a[0] - b[0], a[1] - b[1], a[2] - b[2]};
  return std::sqrt(squared_norm(d));
}

/// Symmetric dim x dim matrix, stored dense. Symmetry is maintained by the setter.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(int dim) : dim_(dim) {}

  static SymMatrix identity(int dim) {
    SymMatrix m(dim);
    for (int i = 0; i < dim; ++i) m.set(i, i, 1.0);
    return m;
  }
  static SymMatrix scalar(int dim, double value) {
    SymMatrix m(dim);
    for (int i = 0; i < dim; ++i) m.set(i, i, value);
    return m;
  }

  int dim() const { return dim_; }
  double operator()(int i, int j) const { return a_[i * kMaxDim + j]; }
  void set(int i, int j, double v) {
    a_[i * kMaxDim + j] = v;
    a_[j * kMaxDim + i] = v;
  }

  SymMatrix scaled(double s) const {
    SymMatrix m(*this);
    for (auto& v : m.a_) v *= s;
    return m;
  }

  bool is_diagonal() const {
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j)
        if (i != j && (*this)(i, j) != 0.0) return false;
    return true;
  }

  /// Spectral norm bound: max absolute row sum (exact for diagonal matrices).
  double norm_bound() const {
    double best = 0.0;
    for (int i = 0; i < dim_; ++i) {
      double row = 0.0;
      for (int j = 0; j < dim_; ++j) row += std::abs((*this)(i, j));
      best = row > best ? row : best;
    }
    return best;
  }

  double determinant() const;
  SymMatrix inverse() const;
  /// Cholesky test; true iff strictly positive definite.
  bool positive_definite() const;
  /// Smallest eigenvalue (Jacobi rotations for dim <= 3).
  double min_eigenvalue() const;
  double max_eigenvalue() const;

  bool operator==(const SymMatrix&) const = default;

 private:
  int dim_ = 0;
  std::array<double, kMaxDim * kMaxDim> a_{};
};

}  // namespace lab
