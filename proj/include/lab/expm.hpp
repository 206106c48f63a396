#pragma once

#include <Eigen/Dense>

namespace lab {

/// exp(A) by scaling and squaring with the degree-13 Pade approximant.
Eigen::MatrixXd expm(const Eigen::MatrixXd& a);

}  // namespace lab
