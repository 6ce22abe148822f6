#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <string>

#include "accsplit/element.hpp"

namespace accsplit {

/// Resolvent oracle J_{lambda A}(v) = (I + lambda A)^{-1}(v) for one term of
/// the objective. For A the subdifferential of a closed convex phi this is the
/// proximal map argmin_x phi(x) + |x - v|^2 / (2 lambda).
///
/// Smooth terms may also carry their value and gradient; the order checks in
/// the ODE lab and the stationarity tests need them. Oracles are immutable
/// after construction and may be evaluated from several threads at once.
class ProxOracle {
 public:
  using Resolvent = std::function<Element(const Element& v, Scalar lambda)>;
  using Value = std::function<Scalar(const Element& x)>;
  using Gradient = std::function<Element(const Element& x)>;

  ProxOracle(std::string name, Resolvent resolvent, Value value = {},
             Gradient gradient = {});

  /// Evaluates J_{lambda A}(v). Throws ParameterError unless lambda > 0.
  Element operator()(const Element& v, Scalar lambda) const;

  const std::string& name() const noexcept { return name_; }

  bool has_value() const noexcept { return static_cast<bool>(value_); }
  Scalar value(const Element& x) const;

  bool is_smooth() const noexcept { return static_cast<bool>(gradient_); }
  Element gradient(const Element& x) const;

 private:
  std::string name_;
  Resolvent resolvent_;
  Value value_;
  Gradient gradient_;
};

/// A smooth term w: gradient, value, and an optional Lipschitz constant of the
/// gradient.
class GradOracle {
 public:
  using Value = ProxOracle::Value;
  using Gradient = ProxOracle::Gradient;

  GradOracle(std::string name, Gradient gradient, Value value,
             std::optional<Scalar> lipschitz = std::nullopt);

  Element gradient(const Element& x) const { return gradient_(x); }
  Scalar value(const Element& x) const { return value_(x); }
  std::optional<Scalar> lipschitz() const noexcept { return lipschitz_; }
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
  Gradient gradient_;
  Value value_;
  std::optional<Scalar> lipschitz_;
};

// ---------------------------------------------------------------------------
// Closed-form operators.

/// Soft threshold sign(v_i) max(|v_i| - tau, 0). Ties |v_i| = tau map to 0.
Element prox_l1(const Element& v, Scalar tau);

/// Solves (I + lambda A^T A) x = v + lambda A^T b, the proximal map of
/// x -> |Ax - b|^2 / 2. Factorizes on every call; see least_squares_oracle for
/// the cached variant.
Element prox_least_squares(const Element& v, Scalar lambda, const Eigen::MatrixXd& A,
                           const Element& b);

/// Elementwise clamp to [a, b].
Element project_box(const Element& X, Scalar a, Scalar b);

/// Singular value soft-thresholding U max(S - tau, 0) V^T via a full SVD.
Element prox_nuclear(const Element& X, Scalar tau);

/// Cayley operator 2 J(x) - x.
Element cayley(const ProxOracle& J, Scalar lambda, const Element& x);

/// Max relative deviation between the oracle gradient and central finite
/// differences of its value (step 1e-6).
Scalar grad_check(const GradOracle& w, const Element& x);

/// Largest eigenvalue of A^T A by power iteration.
Scalar largest_eigenvalue_ata(const Eigen::MatrixXd& A, int max_iters = 1000,
                              Scalar rel_tol = 1e-12);

// ---------------------------------------------------------------------------
// Oracle factories.

/// Zero function; the resolvent is the identity.
ProxOracle identity_oracle();

/// alpha |x|_1.
ProxOracle l1_oracle(Scalar alpha);

/// |Ax - b|^2 / 2. Keeps a Cholesky factor of (I + lambda A^T A) for the most
/// recent lambda; solvers call it with a fixed lambda, so after the first call
/// each evaluation costs two triangular solves.
ProxOracle least_squares_oracle(Eigen::MatrixXd A, Eigen::VectorXd b);

/// Indicator of the box [a, b]^n; resolvent is the projection for every lambda.
ProxOracle box_oracle(Scalar a, Scalar b);

/// alpha |X|_* (sum of singular values).
ProxOracle nuclear_oracle(Scalar alpha);

/// x^T Q x / 2 - q^T x with Q symmetric positive semidefinite.
ProxOracle quadratic_oracle(Eigen::MatrixXd Q, Eigen::VectorXd q);

/// alpha * sum_i huber_delta(x_i), huber_delta(t) = t^2/(2 delta) for
/// |t| <= delta and |t| - delta/2 otherwise. A smooth stand-in for alpha |x|_1.
ProxOracle huber_l1_oracle(Scalar alpha, Scalar delta);

/// |Ax - b|^2 / 2 as a gradient oracle, L = |A|_2^2.
GradOracle least_squares_grad(Eigen::MatrixXd A, Eigen::VectorXd b);

/// x^T Q x / 2 - q^T x as a gradient oracle, L = largest eigenvalue of Q.
GradOracle quadratic_grad(Eigen::MatrixXd Q, Eigen::VectorXd q);

/// <c, x> + offset; the gradient is constant.
GradOracle affine_grad(Element c, Scalar offset = 0.0);

}  // namespace accsplit
