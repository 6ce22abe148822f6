#include "accsplit/ode_lab.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <utility>

#include "accsplit/errors.hpp"
#include "accsplit/rng.hpp"

namespace accsplit {

namespace {

struct FlowState {
  Element x;
  Element v;  // empty for gradient flows
};

FlowState derivative(const FlowSpec& flow, Scalar t, const FlowState& s) {
  if (flow.kind == FlowSpec::Kind::GradientFlow) {
    return {-flow.F.gradient(s.x), {}};
  }
  const Scalar eta = flow.schedule.eta(t);
  return {s.v, combine(-eta, s.v, -1.0, flow.F.gradient(s.x))};
}

FlowState axpy(const FlowState& s, Scalar a, const FlowState& d) {
  FlowState out{combine(1.0, s.x, a, d.x), {}};
  if (!s.v.empty()) out.v = combine(1.0, s.v, a, d.v);
  return out;
}

FlowState rk4_step(const FlowSpec& flow, Scalar t, const FlowState& s, Scalar dt) {
  const FlowState k1 = derivative(flow, t, s);
  const FlowState k2 = derivative(flow, t + dt / 2, axpy(s, dt / 2, k1));
  const FlowState k3 = derivative(flow, t + dt / 2, axpy(s, dt / 2, k2));
  const FlowState k4 = derivative(flow, t + dt, axpy(s, dt, k3));
  FlowState out = axpy(s, dt / 6, k1);
  out = axpy(out, dt / 3, k2);
  out = axpy(out, dt / 3, k3);
  return axpy(out, dt / 6, k4);
}

// Integrates from t0 to t1 in `steps` RK4 steps and returns the end state.
FlowState integrate(const FlowSpec& flow, FlowState s, Scalar t0, Scalar t1, int steps) {
  const Scalar dt = (t1 - t0) / steps;
  for (int i = 0; i < steps; ++i) s = rk4_step(flow, t0 + i * dt, s, dt);
  return s;
}

void check_flow_start(const FlowSpec& flow, const std::optional<Element>& v0, Scalar t0) {
  if (flow.kind == FlowSpec::Kind::AcceleratedFlow) {
    if (!v0) throw ParameterError("accelerated flow needs an initial velocity");
    const auto kind = flow.schedule.kind();
    if ((kind == DampingSchedule::Kind::Decaying || kind == DampingSchedule::Kind::Combined) &&
        !(t0 > 0.0)) {
      throw ParameterError("decaying damping needs t0 > 0");
    }
  }
}

}  // namespace

FlowSpec FlowSpec::gradient_flow(GradOracle F) {
  return FlowSpec{Kind::GradientFlow, DampingSchedule::none(), std::move(F)};
}

FlowSpec FlowSpec::accelerated(DampingSchedule schedule, GradOracle F) {
  if (!schedule.accelerated()) {
    throw ParameterError("accelerated flow needs a damping schedule other than none");
  }
  return FlowSpec{Kind::AcceleratedFlow, schedule, std::move(F)};
}

FlowSpec FlowSpec::for_schedule(const DampingSchedule& schedule, GradOracle F) {
  return schedule.accelerated() ? accelerated(schedule, std::move(F))
                                : gradient_flow(std::move(F));
}

Trajectory reference_trajectory(const FlowSpec& flow, const Element& x0,
                                const std::optional<Element>& v0, Scalar t0, Scalar T,
                                std::int64_t steps, std::int64_t stride) {
  if (steps < 1) throw ParameterError("reference_trajectory: steps must be >= 1");
  if (stride < 1) throw ParameterError("reference_trajectory: stride must be >= 1");
  if (!(T > t0)) throw ParameterError("reference_trajectory: T must exceed t0");
  check_flow_start(flow, v0, t0);

  const bool accelerated = flow.kind == FlowSpec::Kind::AcceleratedFlow;
  FlowState s{x0, {}};
  if (accelerated) {
    require_same_shape(x0, *v0, "reference_trajectory");
    s.v = *v0;
  }

  Trajectory out;
  auto keep = [&](Scalar t) {
    out.t.push_back(t);
    out.x.push_back(s.x);
    if (accelerated) out.v.push_back(s.v);
  };
  keep(t0);
  const Scalar dt = (T - t0) / static_cast<Scalar>(steps);
  for (std::int64_t i = 0; i < steps; ++i) {
    // combine() throws NumericalError once the state is no longer finite.
    s = rk4_step(flow, t0 + static_cast<Scalar>(i) * dt, s, dt);
    if ((i + 1) % stride == 0 || i + 1 == steps) keep(t0 + static_cast<Scalar>(i + 1) * dt);
  }
  out.t.back() = T;
  return out;
}

LineFit fit_line(const std::vector<Scalar>& x, const std::vector<Scalar>& y) {
  if (x.size() != y.size()) throw ParameterError("fit_line: x and y differ in length");
  if (x.size() < 3) throw ParameterError("fit_line: need at least 3 points");
  const auto n = static_cast<Index>(x.size());
  const Eigen::Map<const Eigen::VectorXd> xs(x.data(), n);
  const Eigen::Map<const Eigen::VectorXd> ys(y.data(), n);
  const Scalar mx = xs.mean();
  const Scalar my = ys.mean();
  const Scalar sxx = (xs.array() - mx).square().sum();
  const Scalar sxy = ((xs.array() - mx) * (ys.array() - my)).sum();
  const Scalar syy = (ys.array() - my).square().sum();
  if (!(sxx > 0.0)) throw ParameterError("fit_line: x values are all equal");

  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  const Scalar sse = (ys.array() - (fit.slope * xs.array() + fit.intercept)).square().sum();
  fit.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  fit.points = x.size();
  return fit;
}

GradOracle total_gradient(const ProblemSpec& p) {
  p.validate();
  auto f = p.f;
  auto g = p.g;
  auto w = p.w;
  auto grad = [f, g, w](const Element& x) {
    Element total = Element::zeros_like(x);
    if (f) total += f->gradient(x);
    if (g) total += g->gradient(x);
    if (w) total += w->gradient(x);
    return total;
  };
  auto value = [f, g, w](const Element& x) {
    Scalar total = 0.0;
    if (f) total += f->value(x);
    if (g) total += g->value(x);
    if (w) total += w->value(x);
    return total;
  };
  return GradOracle("F", grad, value);
}

Scalar estimate_lipschitz(const GradOracle& F, const Element& x) {
  if (x.size() == 0) return 0.0;
  const Scalar eps = 1e-5 * std::max<Scalar>(1.0, norm(x));
  const Eigen::VectorXd dir = Eigen::VectorXd::LinSpaced(x.size(), 1.0, 1.5);
  Element u = with_shape(x.shape(), dir);
  u *= 1.0 / norm(u);
  Scalar estimate = 0.0;
  for (int it = 0; it < 200; ++it) {
    const Element hv =
        (0.5 / eps) * (F.gradient(combine(1.0, x, eps, u)) - F.gradient(combine(1.0, x, -eps, u)));
    const Scalar next = norm(hv);
    if (next == 0.0) return 0.0;
    u = (1.0 / next) * hv;
    const bool settled = std::abs(next - estimate) <= 1e-8 * next;
    estimate = next;
    if (settled) break;
  }
  return estimate;
}

std::vector<Scalar> default_h_grid() {
  std::vector<Scalar> h;
  for (int n : {10, 19, 37, 72, 139, 268, 518, 1000}) h.push_back(1.0 / n);
  return h;
}

OrderResult local_error_order(Method m, const ProblemSpec& p, const DampingSchedule& schedule,
                              const std::vector<Scalar>& h_values, const Element& x0,
                              const OrderOptions& options) {
  if (h_values.size() < 3) throw ParameterError("local_error_order: need at least 3 h values");
  for (Scalar h : h_values) {
    if (!(h > 0.0) || !std::isfinite(h)) {
      throw ParameterError("local_error_order: h values must be positive");
    }
  }
  const auto [h_min, h_max] = std::minmax_element(h_values.begin(), h_values.end());
  if (std::log10(*h_max / *h_min) < 1.5 - 1e-9) {
    throw ParameterError("local_error_order: h grid must span at least 1.5 decades");
  }
  if (options.rk_substeps < 1) throw ParameterError("local_error_order: rk_substeps >= 1");

  const GradOracle F = total_gradient(p);
  const FlowSpec flow = FlowSpec::for_schedule(schedule, F);
  const bool accelerated = flow.kind == FlowSpec::Kind::AcceleratedFlow;
  const Scalar L = options.lipschitz ? *options.lipschitz : estimate_lipschitz(F, x0);
  const Scalar h_cap = L > 0.0 ? 0.1 / std::sqrt(L) : std::numeric_limits<Scalar>::infinity();
  const Element v0 = options.v0 ? *options.v0 : -F.gradient(x0);

  OrderResult result;
  std::vector<Scalar> log_h, log_e;
  for (Scalar h : h_values) {
    const auto n = std::max<std::int64_t>(1, std::llround(options.t0 / h));
    const Scalar t_prev = static_cast<Scalar>(n) * h;
    const std::int64_t k = n + 1;

    FlowState start{x0, {}};
    if (accelerated) start.v = v0;
    const FlowState at_k = integrate(flow, start, t_prev, t_prev + h, options.rk_substeps);
    const FlowState at_next = integrate(flow, at_k, t_prev + h, t_prev + 2 * h, options.rk_substeps);

    const Scalar lambda = accelerated ? h * h : h;
    const StepConfig cfg(lambda, schedule);
    SolverState s;
    s.k = k;
    s.x = at_k.x;
    s.x_prev = accelerated ? x0 : at_k.x;
    s.x_hat = extrapolate(s.x, s.x_prev, gamma(schedule, k, cfg.h()));
    s.c = (m == Method::Admm && p.g) ? -p.g->gradient(s.x) : Element::zeros_like(s.x);
    s.last_half = s.x;
    s.last_prox_g = s.x;
    const SolverState next = step(m, s, p, cfg);

    Scalar err = 0.0;
    if (accelerated) {
      const Element dx = next.x - at_next.x;
      const Element dv = (1.0 / h) * dx;  // both velocities share the backward point x_k
      err = std::sqrt(std::pow(norm(dx), 2) + std::pow(norm(dv), 2));
    } else {
      err = norm(next.x - at_next.x);
    }
    const bool usable = h <= h_cap * (1.0 + 1e-12) && err > 0.0;
    result.h.push_back(h);
    result.error.push_back(err);
    result.in_window.push_back(usable);
    if (usable) {
      log_h.push_back(std::log(h));
      log_e.push_back(std::log(err));
    }
  }
  if (log_h.size() < 3) {
    throw ParameterError("local_error_order: fewer than 3 points inside the fit window h <= " +
                         std::to_string(h_cap));
  }
  result.fit = fit_line(log_h, log_e);
  return result;
}

RateResult continuous_rate_check(const FlowSpec& flow, const Element& x0, const Element& x_star,
                                 Scalar F_star, Scalar T, const RateOptions& options) {
  std::optional<Element> v0 = options.v0;
  if (flow.kind == FlowSpec::Kind::AcceleratedFlow && !v0) v0 = Element::zeros_like(x0);
  const Trajectory traj = reference_trajectory(flow, x0, v0, options.t0, T, options.steps);
  const Scalar t_fit = options.t0 + options.skip_fraction * (T - options.t0);

  RateResult result;
  result.kind = options.kind;
  std::vector<Scalar> xs, ys;
  if (options.kind == RateKind::Exponential) {
    const Scalar floor = 1e-11 * std::max<Scalar>(norm(x0 - x_star), 1e-300);
    for (std::size_t i = 0; i < traj.t.size(); ++i) {
      if (traj.t[i] < t_fit) continue;
      const Scalar d = norm(traj.x[i] - x_star);
      if (!(d > floor)) break;
      xs.push_back(traj.t[i]);
      ys.push_back(std::log(d));
    }
    result.fit = fit_line(xs, ys);
    result.rate = -result.fit.slope;
  } else {
    // Oscillating gaps touch zero periodically; fit the per-bin maxima.
    const int bins = 40;
    const Scalar lo = std::log(std::max(t_fit, options.t0));
    const Scalar hi = std::log(T);
    std::vector<Scalar> best(bins, -1.0), best_t(bins, 0.0);
    for (std::size_t i = 0; i < traj.t.size(); ++i) {
      if (traj.t[i] < t_fit) continue;
      const Scalar lt = std::log(traj.t[i]);
      const int b = std::min(bins - 1, static_cast<int>((lt - lo) / (hi - lo) * bins));
      const Scalar gap = flow.F.value(traj.x[i]) - F_star;
      if (gap > best[b]) {
        best[b] = gap;
        best_t[b] = traj.t[i];
      }
    }
    for (int b = 0; b < bins; ++b) {
      if (best[b] > 0.0) {
        xs.push_back(std::log(best_t[b]));
        ys.push_back(std::log(best[b]));
      }
    }
    result.fit = fit_line(xs, ys);
    result.rate = result.fit.slope;
  }
  return result;
}

std::vector<RateRow> standard_rate_checks(Scalar m) {
  if (!(m > 0.0)) throw ParameterError("standard_rate_checks: m must be positive");
  const GradOracle quad = quadratic_grad(Eigen::MatrixXd::Constant(1, 1, m),
                                         Eigen::VectorXd::Constant(1, m));
  const Element x_star = Element::vector(Eigen::VectorXd::Constant(1, 1.0));
  const Element x0 = Element::vector(Eigen::VectorXd::Constant(1, 4.0));
  const GradOracle quartic(
      "quartic",
      [](const Element& x) { return with_shape(x.shape(), x.mat().array().cube().matrix()); },
      [](const Element& x) { return x.mat().array().pow(4).sum() / 4.0; });
  const Element z0 = Element::vector(Eigen::VectorXd::LinSpaced(3, 0.5, 1.5));
  const Element z_star = Element::zeros_like(z0);

  std::vector<RateRow> rows;
  auto exponential = [&](std::string name, const FlowSpec& flow, Scalar T, Scalar predicted,
                         Scalar rel_tol) {
    RateOptions opt;
    opt.kind = RateKind::Exponential;
    opt.t0 = 0.0;
    const RateResult r = continuous_rate_check(flow, x0, x_star, quad.value(x_star), T, opt);
    rows.push_back({std::move(name), RateKind::Exponential, r.rate, predicted,
                    std::abs(r.rate - predicted) <= rel_tol * predicted});
  };
  auto power = [&](std::string name, const FlowSpec& flow, Scalar T, Scalar predicted) {
    RateOptions opt;
    opt.kind = RateKind::Power;
    opt.t0 = 1.0;
    opt.steps = 50000;
    opt.skip_fraction = 0.0;
    const RateResult r = continuous_rate_check(flow, z0, z_star, 0.0, T, opt);
    rows.push_back({std::move(name), RateKind::Power, r.rate, predicted, r.rate <= predicted + 0.3});
  };

  power("gradient-flow convex", FlowSpec::gradient_flow(quartic), 100.0, -1.0);
  exponential("gradient-flow strongly-convex", FlowSpec::gradient_flow(quad), 40.0, m, 0.15);
  power("accelerated decaying convex", FlowSpec::accelerated(DampingSchedule::decaying(3.0), quartic),
        100.0, -2.0);
  exponential("accelerated constant strongly-convex",
              FlowSpec::accelerated(DampingSchedule::constant(2.0 * std::sqrt(m)), quad), 60.0,
              std::sqrt(m), 0.25);
  return rows;
}

QuadraticTriple QuadraticTriple::random(Index n, std::uint64_t seed) {
  if (n < 1) throw ParameterError("QuadraticTriple: dimension must be positive");
  Rng rng(seed);
  auto spd = [&] {
    const Eigen::MatrixXd G = rng.normal_matrix(n, n);
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
    const Eigen::MatrixXd Q = qr.householderQ();
    Eigen::VectorXd eig(n);
    for (Index i = 0; i < n; ++i) eig(i) = 0.2 + 0.8 * rng.uniform();
    Eigen::MatrixXd S = Q * eig.asDiagonal() * Q.transpose();
    return Eigen::MatrixXd(0.5 * (S + S.transpose()));
  };
  QuadraticTriple t;
  t.Qf = spd();
  t.Qg = spd();
  t.Qw = spd();
  t.qf = rng.normal_matrix(n, 1);
  t.qg = rng.normal_matrix(n, 1);
  t.qw = rng.normal_matrix(n, 1);
  return t;
}

ProblemSpec QuadraticTriple::problem(bool include_f) const {
  if (include_f) {
    return make_problem(quadratic_oracle(Qf, qf), quadratic_oracle(Qg, qg),
                        quadratic_grad(Qw, qw));
  }
  return make_problem(std::nullopt, quadratic_oracle(Qg, qg), quadratic_grad(Qf + Qw, qf + qw));
}

ProblemSpec QuadraticTriple::problem_without_w() const {
  return make_problem(quadratic_oracle(Qf + Qw, qf + qw), quadratic_oracle(Qg, qg), std::nullopt);
}

Element QuadraticTriple::minimizer() const {
  const Eigen::MatrixXd Q = Qf + Qg + Qw;
  const Eigen::VectorXd q = qf + qg + qw;
  return Element::vector(Q.llt().solve(q));
}

Scalar QuadraticTriple::strong_convexity() const {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Qf + Qg + Qw);
  return es.eigenvalues().minCoeff();
}

Scalar QuadraticTriple::lipschitz() const {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Qf + Qg + Qw);
  return es.eigenvalues().maxCoeff();
}

}  // namespace accsplit
