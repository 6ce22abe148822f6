#pragma once

#include <Eigen/Core>

namespace accsplit::detail {

struct ThinSvd {
  Eigen::MatrixXd U;  // rows x p
  Eigen::VectorXd S;  // descending, p = min(rows, cols)
  Eigen::MatrixXd V;  // cols x p
};

// LAPACK dgesdd when the library was built with it, Eigen's BDCSVD otherwise
// or when dgesdd reports a failure. Throws NumericalError if both fail.
ThinSvd thin_svd(const Eigen::MatrixXd& X);

// Singular values only.
Eigen::VectorXd singular_values(const Eigen::MatrixXd& X);

}  // namespace accsplit::detail
