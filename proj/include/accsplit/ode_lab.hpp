#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "accsplit/damping.hpp"
#include "accsplit/element.hpp"
#include "accsplit/prox.hpp"
#include "accsplit/solvers.hpp"

namespace accsplit {

/// Continuous-time dynamics the solvers discretize:
///   gradient flow      x' = -grad F(x)
///   accelerated flow   x'' + eta(t) x' = -grad F(x)
/// `F` carries both grad F and F.
struct FlowSpec {
  enum class Kind { GradientFlow, AcceleratedFlow };

  Kind kind = Kind::GradientFlow;
  DampingSchedule schedule;
  GradOracle F;

  static FlowSpec gradient_flow(GradOracle F);
  /// Throws ParameterError for DampingSchedule::none().
  static FlowSpec accelerated(DampingSchedule schedule, GradOracle F);

  /// Gradient flow for schedule none(), accelerated flow otherwise.
  static FlowSpec for_schedule(const DampingSchedule& schedule, GradOracle F);
};

/// Samples of a reference trajectory. `v` is empty for gradient flows.
struct Trajectory {
  std::vector<Scalar> t;
  std::vector<Element> x;
  std::vector<Element> v;
};

/// Classical RK4 with fixed step (T - t0) / steps. Every `stride`-th state is
/// kept, plus the final one. Throws ParameterError on steps < 1, a missing v0
/// for accelerated flows, or t0 <= 0 with decaying damping; NumericalError if
/// the state stops being finite.
Trajectory reference_trajectory(const FlowSpec& flow, const Element& x0,
                                const std::optional<Element>& v0, Scalar t0, Scalar T,
                                std::int64_t steps, std::int64_t stride = 1);

struct LineFit {
  Scalar slope = 0.0;
  Scalar intercept = 0.0;
  Scalar r2 = 0.0;
  std::size_t points = 0;
};

/// Least-squares line y = slope x + intercept. Throws ParameterError for
/// fewer than 3 points.
LineFit fit_line(const std::vector<Scalar>& x, const std::vector<Scalar>& y);

/// Sum of the gradients of every present term, with F as the value.
GradOracle total_gradient(const ProblemSpec& p);

/// Largest curvature of F near x, by power iteration on finite-difference
/// Hessian-vector products.
Scalar estimate_lipschitz(const GradOracle& F, const Element& x);

/// h = 1/N for eight N between 10 and 1000.
std::vector<Scalar> default_h_grid();

struct OrderOptions {
  Scalar t0 = 1.0;
  /// Initial velocity; -grad F(x0) when absent.
  std::optional<Element> v0;
  /// RK4 substeps per solver step.
  int rk_substeps = 64;
  /// Curvature bound for the fit window h <= 0.1 / sqrt(L); estimated when absent.
  std::optional<Scalar> lipschitz;
};

struct OrderResult {
  std::vector<Scalar> h;
  std::vector<Scalar> error;
  std::vector<bool> in_window;
  LineFit fit;

  Scalar slope() const { return fit.slope; }
};

/// One-step local error of `m` against the reference flow over a grid of h.
///
/// For each h the step size is lambda = h^2 (accelerated) or lambda = h
/// (gradient flow). The solver state is set from the reference trajectory:
/// x_{k-1} = x(t_{k-1}) with (x0, v0) given at t_{k-1} = n h, n = round(t0/h),
/// and x_k = x(t_{k-1} + h); ADMM additionally gets c_k = -grad g(x_k). After
/// one step the error is |x_{k+1} - x(t_k + h)| for gradient flows and the
/// combined position and velocity deviation sqrt(|dx|^2 + |dv|^2) for
/// accelerated flows, with velocities taken as backward differences.
///
/// Throws ParameterError if the grid spans less than 1.5 decades or fewer than
/// 3 points fall in the fit window.
OrderResult local_error_order(Method m, const ProblemSpec& p, const DampingSchedule& schedule,
                              const std::vector<Scalar>& h_values, const Element& x0,
                              const OrderOptions& options = {});

enum class RateKind {
  /// Fits log |x(t) - x*| against t; the rate is minus the slope.
  Exponential,
  /// Fits log (F(x(t)) - F*) against log t using the upper envelope over
  /// logarithmic bins; the rate is the slope.
  Power,
};

struct RateOptions {
  RateKind kind = RateKind::Exponential;
  Scalar t0 = 1.0;
  std::optional<Element> v0;  // zero when absent
  std::int64_t steps = 20000;
  /// Fraction of [t0, T] at the start that is ignored by the fit.
  Scalar skip_fraction = 0.5;
};

struct RateResult {
  RateKind kind = RateKind::Exponential;
  Scalar rate = 0.0;
  LineFit fit;
};

/// Integrates the flow from x0 and fits the decay of the distance to x_star
/// or of the objective gap F - F_star.
RateResult continuous_rate_check(const FlowSpec& flow, const Element& x0, const Element& x_star,
                                 Scalar F_star, Scalar T, const RateOptions& options = {});

/// One row of the continuous-rate table: fitted value against the predicted
/// one. For exponential rows the fitted value is a decay rate, for power rows
/// a log-log slope.
struct RateRow {
  std::string name;
  RateKind kind = RateKind::Exponential;
  Scalar fitted = 0.0;
  Scalar predicted = 0.0;
  bool pass = false;
};

/// Gradient flow and accelerated flow on a 1-D quadratic with curvature m
/// (exponential rates m and sqrt(m), the latter with critical damping
/// r = 2 sqrt(m)) and on the convex quartic sum x_i^4 / 4 (power rates -1
/// and -2). Exponential rows pass within 15% (gradient flow) and 25%
/// (accelerated); power rows pass when the slope is at most predicted + 0.3.
std::vector<RateRow> standard_rate_checks(Scalar m = 0.5);

/// A smooth strongly convex test problem made of three quadratics
///   f = x^T Qf x / 2 - qf^T x,  g = ...,  w = ...
/// with a known minimizer.
struct QuadraticTriple {
  Eigen::MatrixXd Qf, Qg, Qw;
  Eigen::VectorXd qf, qg, qw;

  /// Random SPD blocks with eigenvalues in [0.2, 1]; deterministic in seed.
  static QuadraticTriple random(Index n, std::uint64_t seed);

  /// f, g as prox oracles and w as gradient oracle. With include_f = false
  /// the f block is folded into w so that F is unchanged.
  ProblemSpec problem(bool include_f = true) const;
  /// f + w as the prox term f, g unchanged, no smooth term.
  ProblemSpec problem_without_w() const;
  Element minimizer() const;
  Scalar strong_convexity() const;
  Scalar lipschitz() const;
};

}  // namespace accsplit
