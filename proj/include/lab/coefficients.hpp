#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "lab/geometry.hpp"
#include "lab/point.hpp"

namespace lab {

struct Degeneracy {
  TargetSet target;
  double gamma = 0.0;
  double amplitude = 1.0;
};

/// Symmetric matrix-valued coefficient field x -> C(x).
class CoefficientField {
 public:
  using Eval = std::function<SymMatrix(const Point&)>;

  CoefficientField(int dim, Eval eval, std::string label, bool diagonal,
                   std::optional<double> lipschitz_bound = std::nullopt,
                   std::optional<Degeneracy> degeneracy = std::nullopt);

  static CoefficientField constant(const SymMatrix& c, std::string label = "constant");
  /// C(x) = s(x) * I.
  static CoefficientField scalar(int dim, std::function<double(const Point&)> s, std::string label,
                                 std::optional<double> lipschitz_bound = std::nullopt);

  int dim() const { return dim_; }
  SymMatrix operator()(const Point& x) const { return eval_(x); }
  const std::string& label() const { return label_; }
  bool is_diagonal() const { return diagonal_; }
  const std::optional<double>& lipschitz_bound() const { return lipschitz_bound_; }
  const std::optional<Degeneracy>& degeneracy() const { return degeneracy_; }
  /// Degeneracy exponents in (0, 1) give non-Lipschitz coefficients at A.
  bool outside_lipschitz_hypothesis() const {
    return degeneracy_ && degeneracy_->gamma > 0.0 && degeneracy_->gamma < 1.0;
  }
  /// Pointwise scaled copy s * C(x).
  CoefficientField scaled(double s) const;

 private:
  int dim_;
  Eval eval_;
  std::string label_;
  bool diagonal_;
  std::optional<double> lipschitz_bound_;
  std::optional<Degeneracy> degeneracy_;
};

/// c(x) = (1 - x^2)^delta on (-1, 1), delta >= 1. Zero for |x| >= 1.
class Profile1D {
 public:
  explicit Profile1D(double delta) : delta_(delta) {}
  double delta() const { return delta_; }
  double operator()(double x) const;
  double derivative(double x) const;
  /// sup |c'| over (-1, 1).
  double lipschitz_bound() const;

 private:
  double delta_;
};

/// Throws ErrorCode::regime for delta < 1.
Profile1D make_profile_1d(double delta);
CoefficientField profile_field(const Profile1D& profile);

/// C(x) = amplitude * min(d_A(x), 1)^gamma * base. Throws for gamma < 0,
/// amplitude <= 0 or a base that is not positive definite.
CoefficientField make_degenerate_field(int dim, TargetSet a, double gamma, double amplitude, const SymMatrix& base);

struct Face {
  std::size_t a = 0;       // compact index of the lower cell
  std::int64_t b = -1;     // compact index of the upper cell; -1 for a boundary face
  int axis = 0;
  int dir = 1;             // direction from a towards b (boundary faces: +-1)
  Point midpoint{};
  SymMatrix value;
};

/// Face-midpoint samples of C on a grid.
class FaceTable {
 public:
  const std::vector<Face>& interior() const { return interior_; }
  const std::vector<Face>& boundary() const { return boundary_; }
  /// Interior face between cells a and b in either order; nullptr if not adjacent.
  const SymMatrix* lookup(std::size_t a, std::size_t b) const;

 private:
  friend FaceTable sample_on_faces(const CoefficientField&, const DomainGrid&, bool);
  std::vector<Face> interior_;
  std::vector<Face> boundary_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
};

/// Evaluates C at every face midpoint between adjacent inside cells, and
/// optionally at faces between inside cells and the exterior.
FaceTable sample_on_faces(const CoefficientField& field, const DomainGrid& grid, bool include_boundary = false);

}  // namespace lab
