#include "accsplit/monotone.hpp"

#include <cmath>
#include <utility>

#include "accsplit/detail/davis_yin_kernel.hpp"
#include "accsplit/errors.hpp"

namespace accsplit {

MonotoneOracle::MonotoneOracle(std::string name, Resolvent resolvent)
    : name_(std::move(name)), resolvent_(std::move(resolvent)) {
  if (!resolvent_) throw ConfigurationError("MonotoneOracle '" + name_ + "' has no resolvent");
}

MonotoneOracle MonotoneOracle::from_prox(const ProxOracle& prox) {
  return MonotoneOracle("subdiff(" + prox.name() + ")",
                        [prox](const Element& x, Scalar lambda) { return prox(x, lambda); });
}

MonotoneOracle MonotoneOracle::zero() {
  return MonotoneOracle("zero", [](const Element& x, Scalar) { return x; });
}

Element MonotoneOracle::resolvent(const Element& x, Scalar lambda) const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ParameterError(name_ + ": resolvent parameter must be positive and finite");
  }
  Element out = resolvent_(x, lambda);
  require_same_shape(x, out, name_.c_str());
  return out;
}

Element yosida_apply(const MonotoneOracle& A, Scalar mu, const Element& x) {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw ParameterError("yosida_apply: mu must be positive and finite");
  }
  return (1.0 / mu) * (x - A.resolvent(x, mu));
}

Element resolvent_of_yosida(const MonotoneOracle& A, Scalar lambda, Scalar mu,
                            const Element& x) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ParameterError("resolvent_of_yosida: lambda must be positive and finite");
  }
  if (!(mu >= 0.0) || !std::isfinite(mu)) {
    throw ParameterError("resolvent_of_yosida: mu must be non-negative and finite");
  }
  if (mu == 0.0) return A.resolvent(x, lambda);
  const Scalar s = mu + lambda;
  return combine(mu / s, x, lambda / s, A.resolvent(x, s));
}

SolverState step_dy_regularized(const SolverState& state, const MonotoneOracle& A,
                                const MonotoneOracle& B, const std::optional<GradOracle>& C,
                                Scalar lambda, Scalar mu, const DampingSchedule& schedule) {
  const StepConfig cfg(lambda, schedule);
  require_same_shape(state.x, state.x_hat, "step_dy_regularized");
  require_same_shape(state.x, state.x_prev, "step_dy_regularized");

  auto pts = detail::davis_yin_points(
      state.x_hat, lambda,
      [&](const Element& v) { return resolvent_of_yosida(A, lambda, mu, v); },
      [&](const Element& v) { return resolvent_of_yosida(B, lambda, mu, v); },
      [&](const Element& x) { return C->gradient(x); }, C.has_value());

  SolverState out;
  out.k = state.k + 1;
  out.x_hat = extrapolate(pts.next, state.x, gamma(schedule, out.k, cfg.h()));
  out.x_prev = state.x;
  out.x = std::move(pts.next);
  out.c = state.c;
  out.last_half = std::move(pts.half);
  out.last_prox_g = std::move(pts.three_quarter);
  return out;
}

}  // namespace accsplit
