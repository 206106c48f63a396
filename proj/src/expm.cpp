#include "lab/expm.hpp"

#include <cmath>

#include "lab/error.hpp"

namespace lab {

Eigen::MatrixXd expm(const Eigen::MatrixXd& a) {
  require(a.rows() == a.cols(), ErrorCode::invalid_argument, "expm needs a square matrix");
  const Eigen::Index n = a.rows();
  if (n == 0) return a;

  // Pade(13) coefficients and its backward-error bound on ||A||_1.
  static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                 1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                 670442572800.0,      33522128640.0,       1323241920.0,
                                 40840800.0,          960960.0,            16380.0,
                                 182.0,               1.0};
  constexpr double theta13 = 5.371920351148152;

  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  if (norm1 > theta13) s = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
  const Eigen::MatrixXd as = a * std::ldexp(1.0, -s);

  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd a2 = as * as;
  const Eigen::MatrixXd a4 = a2 * a2;
  const Eigen::MatrixXd a6 = a4 * a2;
  const Eigen::MatrixXd u_inner = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id;
  const Eigen::MatrixXd u = as * u_inner;
  const Eigen::MatrixXd v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;

  Eigen::MatrixXd r = (v - u).partialPivLu().solve(u + v);
  for (int k = 0; k < s; ++k) r = r * r;
  return r;
}

}  // namespace lab
