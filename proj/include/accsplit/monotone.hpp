#pragma once

#include <functional>
#include <string>

#include "accsplit/damping.hpp"
#include "accsplit/element.hpp"
#include "accsplit/prox.hpp"
#include "accsplit/solvers.hpp"

namespace accsplit {

/// A maximal monotone operator, represented only through its resolvent
/// J_{lambda A} = (I + lambda A)^{-1}.
class MonotoneOracle {
 public:
  using Resolvent = std::function<Element(const Element& x, Scalar lambda)>;

  MonotoneOracle(std::string name, Resolvent resolvent);

  /// Wraps the subdifferential of the term behind a ProxOracle.
  static MonotoneOracle from_prox(const ProxOracle& prox);
  /// The zero operator; J is the identity for every lambda.
  static MonotoneOracle zero();

  Element resolvent(const Element& x, Scalar lambda) const;
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
  Resolvent resolvent_;
};

/// Yosida regularization A_mu(x) = (x - J_{mu A}(x)) / mu. Throws
/// ParameterError unless mu > 0.
Element yosida_apply(const MonotoneOracle& A, Scalar mu, const Element& x);

/// J_{lambda A_mu}(x) = (mu x + lambda J_{(mu + lambda) A}(x)) / (mu + lambda).
/// mu = 0 returns J_{lambda A}(x) without any arithmetic on top.
Element resolvent_of_yosida(const MonotoneOracle& A, Scalar lambda, Scalar mu, const Element& x);

/// Davis-Yin step for 0 in A x + B x + C x with A and B replaced by their
/// Yosida regularizations, followed by the usual extrapolation with
/// gamma_{k+1}. With mu = 0 and oracles taken from f and g it reproduces
/// step_davis_yin bit for bit.
SolverState step_dy_regularized(const SolverState& state, const MonotoneOracle& A,
                                const MonotoneOracle& B, const std::optional<GradOracle>& C,
                                Scalar lambda, Scalar mu, const DampingSchedule& schedule);

}  // namespace accsplit
