#include "accsplit/detail/svd.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <string>

#include "accsplit/errors.hpp"

#ifdef ACCSPLIT_HAVE_LAPACKE
#include <lapacke.h>
#endif

namespace accsplit::detail {

namespace {

ThinSvd eigen_svd(const Eigen::MatrixXd& X, bool vectors) {
  const unsigned opts = vectors ? (Eigen::ComputeThinU | Eigen::ComputeThinV) : 0u;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(X, opts);
  if (svd.info() != Eigen::Success) {
    throw NumericalError("SVD failed for a " + std::to_string(X.rows()) + "x" +
                         std::to_string(X.cols()) + " matrix with |X|_F = " +
                         std::to_string(X.norm()));
  }
  ThinSvd out;
  out.S = svd.singularValues();
  if (vectors) {
    out.U = svd.matrixU();
    out.V = svd.matrixV();
  }
  return out;
}

#ifdef ACCSPLIT_HAVE_LAPACKE
bool lapack_svd(const Eigen::MatrixXd& X, bool vectors, ThinSvd& out) {
  const auto m = static_cast<lapack_int>(X.rows());
  const auto n = static_cast<lapack_int>(X.cols());
  const lapack_int p = std::min(m, n);
  Eigen::MatrixXd A = X;  // overwritten by dgesdd
  out.S.resize(p);
  Eigen::MatrixXd VT;
  if (vectors) {
    out.U.resize(m, p);
    VT.resize(p, n);
  }
  Eigen::VectorXd superb(std::max<lapack_int>(1, p - 1));
  // dgesdd from some OpenBLAS builds returns wrong factors above 25 x 25.
  const lapack_int info = LAPACKE_dgesvd(
      LAPACK_COL_MAJOR, vectors ? 'S' : 'N', vectors ? 'S' : 'N', m, n, A.data(),
      std::max<lapack_int>(1, m), out.S.data(), vectors ? out.U.data() : nullptr,
      std::max<lapack_int>(1, m), vectors ? VT.data() : nullptr, std::max<lapack_int>(1, p),
      superb.data());
  if (info != 0 || !out.S.allFinite()) return false;
  if (vectors) out.V = VT.transpose();
  return true;
}
#endif

ThinSvd compute(const Eigen::MatrixXd& X, bool vectors) {
  if (X.size() == 0) return {};
#ifdef ACCSPLIT_HAVE_LAPACKE
  ThinSvd out;
  if (lapack_svd(X, vectors, out)) return out;
#endif
  return eigen_svd(X, vectors);
}

}  // namespace

ThinSvd thin_svd(const Eigen::MatrixXd& X) { return compute(X, true); }

Eigen::VectorXd singular_values(const Eigen::MatrixXd& X) { return compute(X, false).S; }

}  // namespace accsplit::detail
