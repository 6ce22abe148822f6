#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "accsplit/damping.hpp"
#include "accsplit/element.hpp"
#include "accsplit/prox.hpp"

namespace accsplit {

/// Splitting families. Douglas-Rachford and forward-backward are Davis-Yin
/// with w or f absent.
enum class Method { Admm, DavisYin, Tseng };

std::string to_string(Method m);
/// Accepts admm, dy, dr, fb, tseng (dr and fb map to DavisYin).
Method parse_method(std::string_view name);

/// min f(x) + g(x) + w(x). Absent terms act as the zero function: identity
/// resolvent, zero gradient.
struct ProblemSpec {
  std::optional<ProxOracle> f;
  std::optional<ProxOracle> g;
  std::optional<GradOracle> w;
  /// F(x); empty when some term has no value procedure.
  std::function<Scalar(const Element&)> objective;

  /// Throws ConfigurationError when no term is present.
  void validate() const;
  bool has_objective() const noexcept { return static_cast<bool>(objective); }
};

/// Builds a problem and assembles F from the term values when all present
/// terms can be evaluated.
ProblemSpec make_problem(std::optional<ProxOracle> f, std::optional<ProxOracle> g,
                         std::optional<GradOracle> w);
ProblemSpec forward_backward_problem(ProxOracle g, GradOracle w);
ProblemSpec douglas_rachford_problem(ProxOracle f, ProxOracle g);

/// Iterate tuple carried between steps.
struct SolverState {
  Element x;       // x_k
  Element x_prev;  // x_{k-1}
  Element x_hat;   // extrapolated point the next step starts from
  Element c;       // balance coefficient (ADMM only)
  std::int64_t k = 0;
  Element last_half;    // x_{k+1/2} of the latest step
  Element last_prox_g;  // output of the g-resolvent in the latest step

  /// x_prev = x_hat = x0, c = c0 or zero.
  static SolverState initial(const Element& x0, const std::optional<Element>& c0 = {});
};

/// Resolvent parameter and momentum schedule. The ODE step is h = sqrt(lambda)
/// for accelerated schedules and h = lambda otherwise.
struct StepConfig {
  Scalar lambda = 0.0;
  DampingSchedule schedule;

  StepConfig() = default;
  StepConfig(Scalar lambda, DampingSchedule schedule);

  Scalar h() const;
};

SolverState step_admm(const SolverState& s, const ProblemSpec& p, const StepConfig& cfg);
SolverState step_davis_yin(const SolverState& s, const ProblemSpec& p, const StepConfig& cfg);
SolverState step_tseng(const SolverState& s, const ProblemSpec& p, const StepConfig& cfg);
SolverState step(Method m, const SolverState& s, const ProblemSpec& p, const StepConfig& cfg);

/// Davis-Yin fixed-point map written with Cayley operators:
///   P = I/2 + C_g (C_f - lambda grad_w J_f) / 2 - lambda grad_w J_f / 2.
Element dy_fixed_point_operator(const ProblemSpec& p, Scalar lambda, const Element& x);

/// Tseng map (I - lambda grad_w) J_g (I - lambda grad_w) + lambda grad_w.
Element tseng_operator(const ProblemSpec& p, Scalar lambda, const Element& x);

/// Fixed-point residual |x - T(x)| for Davis-Yin and Tseng. For ADMM it is
/// |x_{k+1} - x_{k+1/2}| + |x_{k+1} - x_k| of the latest step, and NaN
/// before the first step.
Scalar residual(const ProblemSpec& p, Scalar lambda, const SolverState& s, Method m);
Scalar residual(const ProblemSpec& p, Scalar lambda, const Element& x, Method m);

/// Point the objective is measured at: the latest g-resolvent output, which
/// for Davis-Yin converges to J_f(x_inf) and for ADMM and Tseng to x_inf.
const Element& solution_estimate(const SolverState& s);

struct StoppingRule {
  enum class Kind { RelativeChange, Residual, ObjectiveGap, MaxItersOnly };

  Kind kind = Kind::Residual;
  Scalar tol = 1e-10;
  Scalar reference_objective = 0.0;

  /// |x_{k+1} - x_k| / |x_k| <= tol.
  static StoppingRule relative_change(Scalar tol = 1e-10);
  static StoppingRule residual_below(Scalar tol = 1e-10);
  /// |F_k - F_ref| / |F_ref| <= tol.
  static StoppingRule objective_gap(Scalar f_ref, Scalar tol);
  static StoppingRule max_iters_only();
};

enum class RunStatus { Converged, MaxIters, Diverged };
std::string to_string(RunStatus s);

struct IterRecord {
  std::int64_t k = 0;
  Scalar objective = 0.0;  // NaN when not tracked
  Scalar residual = 0.0;   // NaN when not tracked
  double time_s = 0.0;
};

struct IterTrace {
  std::vector<IterRecord> records;  // initial point included
  RunStatus status = RunStatus::MaxIters;

  std::int64_t iterations() const {
    return records.empty() ? 0 : static_cast<std::int64_t>(records.size()) - 1;
  }
};

struct RunOptions {
  bool track_objective = true;
  bool track_residual = true;
  Scalar divergence_threshold = 1e12;
  /// Called after the initial state and after every step.
  std::function<void(const SolverState&)> observer;
};

struct RunResult {
  SolverState state;
  IterTrace trace;
};

/// Iterates `m` until the stopping rule fires, max_iters steps were taken, or
/// |x_k| exceeds the divergence threshold. Throws ParameterError if
/// max_iters < 1.
RunResult run(Method m, const ProblemSpec& p, const StepConfig& cfg, const StoppingRule& stop,
              std::int64_t max_iters, const Element& x0,
              const std::optional<Element>& c0 = std::nullopt, const RunOptions& options = {});

/// Same as run() but continues from an existing state (warm starts).
RunResult run_from(Method m, const ProblemSpec& p, const StepConfig& cfg,
                   const StoppingRule& stop, std::int64_t max_iters, SolverState start,
                   const RunOptions& options = {});

}  // namespace accsplit
