#pragma once

#include <Eigen/Core>
#include <Eigen/QR>
#include <algorithm>
#include <cstdint>

#include "accsplit/element.hpp"
#include "accsplit/rng.hpp"

namespace accsplit::testing {

inline Element random_vector(Rng& rng, Index n, double sd = 1.0) {
  return Element::vector(rng.normal_matrix(n, 1, 0.0, sd).col(0));
}

inline Element random_matrix(Rng& rng, Index rows, Index cols, double sd = 1.0) {
  return Element::matrix(rng.normal_matrix(rows, cols, 0.0, sd));
}

inline Element vec(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Index>(values.size()));
  Index i = 0;
  for (double x : values) v(i++) = x;
  return Element::vector(v);
}

// Relative distance |x - y| / max(1, |y|).
inline double rel_diff(const Element& x, const Element& y) {
  return (x.mat() - y.mat()).norm() / std::max(1.0, y.mat().norm());
}

inline Eigen::MatrixXd random_spd(Rng& rng, Index n, double lo, double hi) {
  Eigen::MatrixXd G = rng.normal_matrix(n, n);
  Eigen::MatrixXd Q = G.householderQr().householderQ();
  Eigen::VectorXd ev(n);
  for (Index i = 0; i < n; ++i) ev(i) = lo + (hi - lo) * rng.uniform();
  Eigen::MatrixXd S = Q * ev.asDiagonal() * Q.transpose();
  return (S + S.transpose()) / 2;
}

}  // namespace accsplit::testing
