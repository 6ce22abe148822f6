#include "accsplit/solvers.hpp"

#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>
#include <utility>

#include "accsplit/detail/davis_yin_kernel.hpp"
#include "accsplit/errors.hpp"

namespace accsplit {

namespace {

constexpr Scalar kNaN = std::numeric_limits<Scalar>::quiet_NaN();

Element apply_resolvent(const std::optional<ProxOracle>& J, const Element& v, Scalar lambda) {
  return J ? (*J)(v, lambda) : v;
}

void require_lambda(Scalar lambda, const char* where) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ParameterError(std::string(where) + ": lambda must be positive and finite");
  }
}

void require_state(const SolverState& s) {
  require_same_shape(s.x, s.x_prev, "SolverState");
  require_same_shape(s.x, s.x_hat, "SolverState");
  if (s.k < 0) throw ParameterError("SolverState: negative iteration index");
}

// Shared tail of every step: shift the iterates and extrapolate with gamma_{k+1}.
SolverState advance(const SolverState& s, const StepConfig& cfg, Element next) {
  SolverState out;
  out.k = s.k + 1;
  const Scalar g = gamma(cfg.schedule, out.k, cfg.h());
  out.x_hat = extrapolate(next, s.x, g);
  out.x_prev = s.x;
  out.x = std::move(next);
  return out;
}

Scalar relative_change(const Element& next, const Element& prev) {
  const Scalar base = norm(prev);
  const Scalar diff = norm(next - prev);
  if (base == 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<Scalar>::infinity();
  return diff / base;
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::Admm:
      return "admm";
    case Method::DavisYin:
      return "dy";
    case Method::Tseng:
      return "tseng";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "admm") return Method::Admm;
  if (name == "dy" || name == "dr" || name == "fb") return Method::DavisYin;
  if (name == "tseng") return Method::Tseng;
  throw ParameterError("unknown method '" + std::string(name) + "'");
}

void ProblemSpec::validate() const {
  if (!f && !g && !w) throw ConfigurationError("problem has no terms");
}

ProblemSpec make_problem(std::optional<ProxOracle> f, std::optional<ProxOracle> g,
                         std::optional<GradOracle> w) {
  ProblemSpec p;
  p.f = std::move(f);
  p.g = std::move(g);
  p.w = std::move(w);
  p.validate();
  const bool evaluable = (!p.f || p.f->has_value()) && (!p.g || p.g->has_value());
  if (evaluable) {
    auto f_ = p.f;
    auto g_ = p.g;
    auto w_ = p.w;
    p.objective = [f_, g_, w_](const Element& x) {
      Scalar total = 0.0;
      if (f_) total += f_->value(x);
      if (g_) total += g_->value(x);
      if (w_) total += w_->value(x);
      return total;
    };
  }
  return p;
}

ProblemSpec forward_backward_problem(ProxOracle g, GradOracle w) {
  return make_problem(std::nullopt, std::move(g), std::move(w));
}

ProblemSpec douglas_rachford_problem(ProxOracle f, ProxOracle g) {
  return make_problem(std::move(f), std::move(g), std::nullopt);
}

SolverState SolverState::initial(const Element& x0, const std::optional<Element>& c0) {
  SolverState s;
  s.x = x0;
  s.x_prev = x0;
  s.x_hat = x0;
  if (c0) {
    require_same_shape(x0, *c0, "SolverState::initial");
    s.c = *c0;
  } else {
    s.c = Element::zeros_like(x0);
  }
  s.k = 0;
  s.last_half = x0;
  s.last_prox_g = x0;
  return s;
}

StepConfig::StepConfig(Scalar lambda_, DampingSchedule schedule_)
    : lambda(lambda_), schedule(schedule_) {
  require_lambda(lambda, "StepConfig");
}

Scalar StepConfig::h() const {
  require_lambda(lambda, "StepConfig");
  return schedule.accelerated() ? std::sqrt(lambda) : lambda;
}

SolverState step_admm(const SolverState& s, const ProblemSpec& p, const StepConfig& cfg) {
  if (!p.f || !p.g) throw ConfigurationError("ADMM needs both f and g");
  require_state(s);
  require_same_shape(s.x, s.c, "step_admm");
  const Scalar lambda = cfg.lambda;
  require_lambda(lambda, "step_admm");

  Element v = s.x_hat + lambda * s.c;
  if (p.w) v -= lambda * p.w->gradient(s.x_hat);
  Element half = (*p.f)(v, lambda);
  Element next = (*p.g)(half - lambda * s.c, lambda);
  Element c_next = s.c + (1.0 / lambda) * (next - half);

  SolverState out = advance(s, cfg, next);
  out.c = std::move(c_next);
  out.last_half = std::move(half);
  out.last_prox_g = std::move(next);
  return out;
}

SolverState step_davis_yin(const SolverState& s, const ProblemSpec& p, const StepConfig& cfg) {
  if (!p.g) throw ConfigurationError("Davis-Yin needs g");
  require_state(s);
  const Scalar lambda = cfg.lambda;
  require_lambda(lambda, "step_davis_yin");

  auto pts = detail::davis_yin_points(
      s.x_hat, lambda, [&](const Element& v) { return apply_resolvent(p.f, v, lambda); },
      [&](const Element& v) { return (*p.g)(v, lambda); },
      [&](const Element& x) { return p.w->gradient(x); }, p.w.has_value());

  SolverState out = advance(s, cfg, pts.next);
  out.c = s.c;
  out.last_half = std::move(pts.half);
  out.last_prox_g = std::move(pts.three_quarter);
  return out;
}

SolverState step_tseng(const SolverState& s, const ProblemSpec& p, const StepConfig& cfg) {
  if (p.f) throw ConfigurationError("Tseng's method requires f to be absent");
  if (!p.g || !p.w) throw ConfigurationError("Tseng's method needs g and w");
  require_state(s);
  const Scalar lambda = cfg.lambda;
  require_lambda(lambda, "step_tseng");

  const Element grad_hat = p.w->gradient(s.x_hat);
  Element half = (*p.g)(s.x_hat - lambda * grad_hat, lambda);
  Element next = half - lambda * (p.w->gradient(half) - grad_hat);

  SolverState out = advance(s, cfg, next);
  out.c = s.c;
  out.last_prox_g = half;
  out.last_half = std::move(half);
  return out;
}

SolverState step(Method m, const SolverState& s, const ProblemSpec& p, const StepConfig& cfg) {
  switch (m) {
    case Method::Admm:
      return step_admm(s, p, cfg);
    case Method::DavisYin:
      return step_davis_yin(s, p, cfg);
    case Method::Tseng:
      return step_tseng(s, p, cfg);
  }
  throw ParameterError("unknown method");
}

Element dy_fixed_point_operator(const ProblemSpec& p, Scalar lambda, const Element& x) {
  require_lambda(lambda, "dy_fixed_point_operator");
  const Element jf = apply_resolvent(p.f, x, lambda);
  const Element cf = combine(2.0, jf, -1.0, x);
  const Element wj = p.w ? lambda * p.w->gradient(jf) : Element::zeros_like(x);
  const Element inner_pt = cf - wj;
  const Element cg = combine(2.0, apply_resolvent(p.g, inner_pt, lambda), -1.0, inner_pt);
  return 0.5 * x + 0.5 * cg - 0.5 * wj;
}

Element tseng_operator(const ProblemSpec& p, Scalar lambda, const Element& x) {
  require_lambda(lambda, "tseng_operator");
  const Element gx = p.w ? p.w->gradient(x) : Element::zeros_like(x);
  const Element z = apply_resolvent(p.g, x - lambda * gx, lambda);
  const Element gz = p.w ? p.w->gradient(z) : Element::zeros_like(x);
  return z - lambda * gz + lambda * gx;
}

Scalar residual(const ProblemSpec& p, Scalar lambda, const Element& x, Method m) {
  switch (m) {
    case Method::DavisYin:
      return norm(x - dy_fixed_point_operator(p, lambda, x));
    case Method::Tseng:
      return norm(x - tseng_operator(p, lambda, x));
    case Method::Admm:
      throw ConfigurationError("the ADMM residual needs the latest step; pass a SolverState");
  }
  return kNaN;
}

Scalar residual(const ProblemSpec& p, Scalar lambda, const SolverState& s, Method m) {
  if (m != Method::Admm) return residual(p, lambda, s.x, m);
  if (s.k == 0) return kNaN;
  return norm(s.x - s.last_half) + norm(s.x - s.x_prev);
}

const Element& solution_estimate(const SolverState& s) { return s.last_prox_g; }

StoppingRule StoppingRule::relative_change(Scalar tol) {
  return {Kind::RelativeChange, tol, 0.0};
}
StoppingRule StoppingRule::residual_below(Scalar tol) { return {Kind::Residual, tol, 0.0}; }
StoppingRule StoppingRule::objective_gap(Scalar f_ref, Scalar tol) {
  return {Kind::ObjectiveGap, tol, f_ref};
}
StoppingRule StoppingRule::max_iters_only() { return {Kind::MaxItersOnly, 0.0, 0.0}; }

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Converged:
      return "converged";
    case RunStatus::MaxIters:
      return "max-iters";
    case RunStatus::Diverged:
      return "diverged";
  }
  return "unknown";
}

RunResult run(Method m, const ProblemSpec& p, const StepConfig& cfg, const StoppingRule& stop,
              std::int64_t max_iters, const Element& x0, const std::optional<Element>& c0,
              const RunOptions& options) {
  return run_from(m, p, cfg, stop, max_iters, SolverState::initial(x0, c0), options);
}

RunResult run_from(Method m, const ProblemSpec& p, const StepConfig& cfg,
                   const StoppingRule& stop, std::int64_t max_iters, SolverState start,
                   const RunOptions& options) {
  if (max_iters < 1) throw ParameterError("max_iters must be at least 1");
  p.validate();
  require_lambda(cfg.lambda, "run");
  const bool need_objective =
      options.track_objective || stop.kind == StoppingRule::Kind::ObjectiveGap;
  if (need_objective && !p.has_objective()) {
    if (stop.kind == StoppingRule::Kind::ObjectiveGap) {
      throw ConfigurationError("objective-gap stopping needs an evaluable objective");
    }
  }
  const bool eval_objective = need_objective && p.has_objective();
  const bool eval_residual =
      options.track_residual || stop.kind == StoppingRule::Kind::Residual;
  if (constant_damping_clamped(cfg.schedule, cfg.h())) {
    std::cerr << "warning: constant damping r*h >= 1, momentum clamped to zero\n";
  }

  const auto t_start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  };
  auto record_for = [&](const SolverState& s) {
    IterRecord r;
    r.k = s.k;
    r.objective = eval_objective ? p.objective(solution_estimate(s)) : kNaN;
    r.residual = eval_residual ? residual(p, cfg.lambda, s, m) : kNaN;
    r.time_s = elapsed();
    return r;
  };

  RunResult result;
  result.state = std::move(start);
  result.trace.records.push_back(record_for(result.state));
  if (options.observer) options.observer(result.state);

  result.trace.status = RunStatus::MaxIters;
  for (std::int64_t it = 0; it < max_iters; ++it) {
    SolverState next;
    IterRecord rec;
    try {
      next = step(m, result.state, p, cfg);
      rec = record_for(next);
    } catch (const NumericalError&) {
      result.trace.status = RunStatus::Diverged;
      break;
    }
    const bool blown = !(norm(next.x) <= options.divergence_threshold) ||
                       (eval_objective && !std::isfinite(rec.objective));
    const Scalar change = relative_change(next.x, result.state.x);
    result.state = std::move(next);
    result.trace.records.push_back(rec);
    if (options.observer) options.observer(result.state);
    if (blown) {
      result.trace.status = RunStatus::Diverged;
      break;
    }

    bool done = false;
    switch (stop.kind) {
      case StoppingRule::Kind::RelativeChange:
        done = change <= stop.tol;
        break;
      case StoppingRule::Kind::Residual:
        done = rec.residual <= stop.tol;
        break;
      case StoppingRule::Kind::ObjectiveGap: {
        const Scalar ref = stop.reference_objective;
        const Scalar gap = std::abs(rec.objective - ref) / std::max(std::abs(ref), 1e-300);
        done = gap <= stop.tol;
        break;
      }
      case StoppingRule::Kind::MaxItersOnly:
        break;
    }
    if (done) {
      result.trace.status = RunStatus::Converged;
      break;
    }
  }
  return result;
}

}  // namespace accsplit
