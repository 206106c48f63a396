#include "lab/coefficients.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "lab/error.hpp"

namespace lab {

namespace {

Eigen::MatrixXd to_eigen(const SymMatrix& m) {
  Eigen::MatrixXd e(m.dim(), m.dim());
  for (int i = 0; i < m.dim(); ++i)
    for (int j = 0; j < m.dim(); ++j) e(i, j) = m(i, j);
  return e;
}

}  // namespace

double SymMatrix::determinant() const { return dim_ == 0 ? 1.0 : to_eigen(*this).determinant(); }

SymMatrix SymMatrix::inverse() const {
  require(determinant() != 0.0, ErrorCode::invalid_argument, "singular coefficient matrix");
  const Eigen::MatrixXd inv = to_eigen(*this).inverse();
  SymMatrix out(dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = i; j < dim_; ++j) out.set(i, j, 0.5 * (inv(i, j) + inv(j, i)));
  return out;
}

bool SymMatrix::positive_definite() const {
  if (dim_ == 0) return false;
  Eigen::LLT<Eigen::MatrixXd> llt(to_eigen(*this));
  return llt.info() == Eigen::Success && min_eigenvalue() > 0.0;
}

double SymMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(*this), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double SymMatrix::max_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(*this), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

CoefficientField::CoefficientField(int dim, Eval eval, std::string label, bool diagonal,
                                   std::optional<double> lipschitz_bound, std::optional<Degeneracy> degeneracy)
    : dim_(dim),
      eval_(std::move(eval)),
      label_(std::move(label)),
      diagonal_(diagonal),
      lipschitz_bound_(lipschitz_bound),
      degeneracy_(std::move(degeneracy)) {
  require(dim >= 1 && dim <= kMaxDim, ErrorCode::invalid_argument, "field dimension must be 1, 2 or 3");
}

CoefficientField CoefficientField::constant(const SymMatrix& c, std::string label) {
  require(c.min_eigenvalue() >= 0.0, ErrorCode::invalid_argument, "constant coefficient is not PSD");
  return CoefficientField(c.dim(), [c](const Point&) { return c; }, std::move(label), c.is_diagonal(), 0.0);
}

CoefficientField CoefficientField::scalar(int dim, std::function<double(const Point&)> s, std::string label,
                                          std::optional<double> lipschitz_bound) {
  return CoefficientField(
      dim, [dim, s = std::move(s)](const Point& x) { return SymMatrix::scalar(dim, s(x)); }, std::move(label), true,
      lipschitz_bound);
}

CoefficientField CoefficientField::scaled(double s) const {
  require(s > 0.0, ErrorCode::invalid_argument, "field scale must be positive");
  std::optional<Degeneracy> deg = degeneracy_;
  if (deg) deg->amplitude *= s;
  std::optional<double> lip = lipschitz_bound_;
  if (lip) *lip *= s;
  return CoefficientField(
      dim_, [eval = eval_, s](const Point& x) { return eval(x).scaled(s); }, label_ + "*" + std::to_string(s),
      diagonal_, lip, std::move(deg));
}

double Profile1D::operator()(double x) const {
  const double base = 1.0 - x * x;
  return base <= 0.0 ? 0.0 : std::pow(base, delta_);
}

double Profile1D::derivative(double x) const {
  const double base = 1.0 - x * x;
  if (base <= 0.0) return 0.0;
  return -2.0 * delta_ * x * std::pow(base, delta_ - 1.0);
}

double Profile1D::lipschitz_bound() const {
  // |c'| peaks where x^2 = 1 / (2 delta - 1).
  const double x = 1.0 / std::sqrt(2.0 * delta_ - 1.0);
  return std::abs(derivative(x));
}

Profile1D make_profile_1d(double delta) {
  require(std::isfinite(delta) && delta >= 1.0, ErrorCode::regime,
          "profile exponent delta must be >= 1 (Lipschitz coefficients)");
  return Profile1D(delta);
}

CoefficientField profile_field(const Profile1D& profile) {
  return CoefficientField::scalar(
      1, [profile](const Point& x) { return profile(x[0]); }, "profile1d(delta=" + std::to_string(profile.delta()) + ")",
      profile.lipschitz_bound());
}

CoefficientField make_degenerate_field(int dim, TargetSet a, double gamma, double amplitude, const SymMatrix& base) {
  require(gamma >= 0.0 && std::isfinite(gamma), ErrorCode::invalid_argument, "gamma must be >= 0");
  require(amplitude > 0.0, ErrorCode::invalid_argument, "amplitude must be positive");
  require(base.dim() == dim, ErrorCode::invalid_argument, "base matrix dimension mismatch");
  require(base.positive_definite(), ErrorCode::invalid_argument, "base matrix is not positive definite");
  require(a.is_empty() || a.dim() == dim, ErrorCode::invalid_argument, "target dimension mismatch");
  require(!a.is_empty() || gamma == 0.0, ErrorCode::invalid_argument, "degenerate field needs a nonempty target");

  std::optional<double> lipschitz;
  if (gamma == 0.0) lipschitz = 0.0;
  else if (gamma >= 1.0) lipschitz = amplitude * gamma * base.max_eigenvalue();

  auto eval = [a, gamma, amplitude, base](const Point& x) {
    const double d = a.is_empty() ? 1.0 : std::min(a.distance(x), 1.0);
    return base.scaled(amplitude * std::pow(d, gamma));
  };
  std::string label = "degenerate(gamma=" + std::to_string(gamma) + ", target=" + a.label() + ")";
  return CoefficientField(dim, std::move(eval), std::move(label), base.is_diagonal(), lipschitz,
                          Degeneracy{std::move(a), gamma, amplitude});
}

namespace {

std::uint64_t face_key(std::size_t a, std::size_t b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (hi << 32) | lo;
}

}  // namespace

const SymMatrix* FaceTable::lookup(std::size_t a, std::size_t b) const {
  const auto it = index_.find(face_key(a, b));
  return it == index_.end() ? nullptr : &interior_[it->second].value;
}

FaceTable sample_on_faces(const CoefficientField& field, const DomainGrid& grid, bool include_boundary) {
  require(field.dim() == grid.dim(), ErrorCode::invalid_argument, "field/grid dimension mismatch");
  FaceTable table;
  const double half = 0.5 * grid.h();
  for (std::size_t c = 0; c < grid.inside_count(); ++c) {
    const Point x = grid.center(c);
    for (int axis = 0; axis < grid.dim(); ++axis)
      for (int dir : {-1, 1}) {
        const std::int64_t nb = grid.neighbor(c, axis, dir);
        if (nb >= 0 && dir < 0) continue;  // each interior face once, from its lower cell
        Face f;
        f.a = c;
        f.b = nb;
        f.axis = axis;
        f.dir = dir;
        f.midpoint = x;
        f.midpoint[axis] += dir * half;
        if (nb >= 0) {
          f.value = field(f.midpoint);
          table.index_.emplace(face_key(c, static_cast<std::size_t>(nb)), table.interior_.size());
          table.interior_.push_back(f);
        } else if (include_boundary) {
          f.value = field(f.midpoint);
          table.boundary_.push_back(f);
        }
      }
  }
  return table;
}

}  // namespace lab
