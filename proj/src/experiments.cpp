#include "accsplit/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <tuple>
#include <utility>

#include "accsplit/detail/svd.hpp"
#include "accsplit/errors.hpp"
#include "accsplit/prox.hpp"
#include "accsplit/rng.hpp"

namespace accsplit {

namespace {

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, Scalar tau) {
  return v.unaryExpr([tau](double vi) {
    const double mag = std::abs(vi) - tau;
    return mag > 0.0 ? std::copysign(mag, vi) : 0.0;
  });
}

std::vector<Variant> select(std::vector<Variant> all, const std::vector<std::string>& names) {
  if (names.empty()) return all;
  std::vector<Variant> out;
  for (const auto& name : names) {
    auto it = std::find_if(all.begin(), all.end(), [&](const Variant& v) { return v.name == name; });
    if (it == all.end()) throw ParameterError("unknown variant '" + name + "'");
    out.push_back(*it);
  }
  return out;
}

std::vector<Variant> three_schedules(const std::string& base, Method m, Scalar r_decaying,
                                     Scalar r_constant) {
  return {{base, m, DampingSchedule::none()},
          {base + "-decaying", m, DampingSchedule::decaying(r_decaying)},
          {base + "-constant", m, DampingSchedule::constant(r_constant)}};
}

}  // namespace

// ---------------------------------------------------------------------------
// LASSO

LassoInstance gen_lasso(Index m, Index n, Scalar sparsity, Scalar noise_std, std::uint64_t seed,
                        Scalar alpha_fraction) {
  if (m < 1 || n < 1) throw ParameterError("gen_lasso: dimensions must be positive");
  if (!(sparsity > 0.0 && sparsity < 1.0)) {
    throw ParameterError("gen_lasso: sparsity must lie in (0, 1)");
  }
  if (!(noise_std >= 0.0)) throw ParameterError("gen_lasso: noise_std must be >= 0");
  if (!(alpha_fraction > 0.0)) throw ParameterError("gen_lasso: alpha_fraction must be > 0");

  Rng rng(seed);
  LassoInstance inst;
  inst.seed = seed;
  inst.A = rng.normal_matrix(m, n);
  for (Index j = 0; j < n; ++j) inst.A.col(j).normalize();

  const auto nnz = static_cast<std::uint64_t>(
      std::max<long long>(1, std::llround((1.0 - sparsity) * static_cast<Scalar>(n))));
  inst.x_true = Eigen::VectorXd::Zero(n);
  for (std::uint64_t idx : rng.sample_without_replacement(static_cast<std::uint64_t>(n), nnz)) {
    inst.x_true(static_cast<Index>(idx)) = rng.normal();
  }
  inst.b = inst.A * inst.x_true;
  if (noise_std > 0.0) {
    for (Index i = 0; i < m; ++i) inst.b(i) += rng.normal(0.0, noise_std);
  }
  inst.alpha = alpha_fraction * alpha_max(inst.A, inst.b);
  if (!(inst.alpha > 0.0)) throw NumericalError("gen_lasso: degenerate instance, alpha_max = 0");
  return inst;
}

Scalar alpha_max(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  if (A.rows() != b.size()) throw ShapeError("alpha_max: A and b disagree in rows");
  if (A.cols() == 0) return 0.0;
  return (A.transpose() * b).cwiseAbs().maxCoeff();
}

Scalar lasso_objective(const LassoInstance& inst, const Eigen::VectorXd& x) {
  return 0.5 * (inst.A * x - inst.b).squaredNorm() + inst.alpha * x.lpNorm<1>();
}

ReferenceSolution reference_solution(const LassoInstance& inst, Scalar tol,
                                     std::int64_t max_iters, Scalar step_fraction) {
  if (!(tol > 0.0)) throw ParameterError("reference_solution: tol must be > 0");
  if (max_iters < 1) throw ParameterError("reference_solution: max_iters must be >= 1");
  if (!(step_fraction > 0.0 && step_fraction < 2.0)) {
    throw ParameterError("reference_solution: step_fraction must lie in (0, 2)");
  }
  const Scalar L = largest_eigenvalue_ata(inst.A);
  ReferenceSolution out;
  out.x = Eigen::VectorXd::Zero(inst.A.cols());
  if (!(L > 0.0)) {
    out.objective = lasso_objective(inst, out.x);
    out.reached_tol = true;
    return out;
  }
  const Scalar step = step_fraction / L;
  const Eigen::VectorXd Atb = inst.A.transpose() * inst.b;

  Eigen::VectorXd x = out.x;
  Eigen::VectorXd best_x = x;
  Scalar best_res = std::numeric_limits<Scalar>::infinity();
  for (std::int64_t k = 1; k <= max_iters; ++k) {
    const Eigen::VectorXd grad = inst.A.transpose() * (inst.A * x) - Atb;
    Eigen::VectorXd next = soft_threshold(x - step * grad, step * inst.alpha);
    const Scalar res = (next - x).norm();
    x = std::move(next);
    out.iterations = k;
    if (res < best_res) {
      best_res = res;
      best_x = x;
    }
    if (res <= tol) {
      out.reached_tol = true;
      break;
    }
  }
  out.x = out.reached_tol ? x : best_x;
  out.residual = best_res;
  out.objective = lasso_objective(inst, out.x);
  return out;
}

ProblemSpec lasso_problem(const LassoInstance& inst, LassoSplit split) {
  if (split == LassoSplit::LeastSquaresProx) {
    return douglas_rachford_problem(least_squares_oracle(inst.A, inst.b), l1_oracle(inst.alpha));
  }
  return forward_backward_problem(l1_oracle(inst.alpha), least_squares_grad(inst.A, inst.b));
}

// ---------------------------------------------------------------------------
// Matrix completion

Index MatCompInstance::observed() const {
  return static_cast<Index>(std::llround(mask.sum()));
}

Scalar MatCompInstance::observed_norm() const { return mask.cwiseProduct(M).norm(); }

MatCompInstance gen_matcomp(Index n, Index m, Index rank, Scalar s, Scalar entry_mean,
                            std::uint64_t seed) {
  if (n < 1 || m < 1) throw ParameterError("gen_matcomp: dimensions must be positive");
  if (rank < 1 || rank > std::min(n, m)) {
    throw ParameterError("gen_matcomp: rank must lie in [1, min(n, m)]");
  }
  if (!(s > 0.0 && s <= 1.0)) throw ParameterError("gen_matcomp: s must lie in (0, 1]");

  Rng rng(seed);
  MatCompInstance inst;
  inst.seed = seed;
  inst.rank = rank;
  const Eigen::MatrixXd L1 = rng.normal_matrix(n, rank, entry_mean, 1.0);
  const Eigen::MatrixXd L2 = rng.normal_matrix(m, rank, entry_mean, 1.0);
  inst.M = L1 * L2.transpose();

  const auto total = static_cast<std::uint64_t>(n * m);
  auto count = static_cast<std::uint64_t>(std::floor(s * static_cast<Scalar>(total)));
  count = std::max<std::uint64_t>(count, 1);
  inst.mask = Eigen::MatrixXd::Zero(n, m);
  std::vector<Scalar> observed;
  observed.reserve(count);
  for (std::uint64_t idx : rng.sample_without_replacement(total, count)) {
    // Column-major flat index, matching Eigen storage.
    const auto i = static_cast<Index>(idx % static_cast<std::uint64_t>(n));
    const auto j = static_cast<Index>(idx / static_cast<std::uint64_t>(n));
    inst.mask(i, j) = 1.0;
    observed.push_back(inst.M(i, j));
  }
  const Eigen::Map<const Eigen::VectorXd> obs(observed.data(), static_cast<Index>(observed.size()));
  const Scalar mean = obs.mean();
  const Scalar sigma =
      obs.size() > 1 ? std::sqrt((obs.array() - mean).square().sum() / (obs.size() - 1)) : 0.0;
  inst.a = obs.minCoeff() - sigma / 2;
  inst.b = obs.maxCoeff() + sigma / 2;
  return inst;
}

GradOracle masked_least_squares_grad(const MatCompInstance& inst) {
  auto mask = std::make_shared<const Eigen::MatrixXd>(inst.mask);
  auto target = std::make_shared<const Eigen::MatrixXd>(inst.mask.cwiseProduct(inst.M));
  auto residual = [mask, target](const Element& X) -> Eigen::MatrixXd {
    if (X.rows() != mask->rows() || X.cols() != mask->cols() || !X.is_matrix()) {
      throw ShapeError("masked least squares: expected " +
                       Shape::dense(mask->rows(), mask->cols()).to_string() + ", got " +
                       X.shape().to_string());
    }
    return mask->cwiseProduct(X.mat()) - *target;
  };
  return GradOracle(
      "masked_least_squares",
      [residual](const Element& X) { return Element::matrix(residual(X)); },
      [residual](const Element& X) { return 0.5 * residual(X).squaredNorm(); }, 1.0);
}

ProblemSpec matcomp_problem(const MatCompInstance& inst, Scalar alpha) {
  return make_problem(nuclear_oracle(alpha), box_oracle(inst.a, inst.b),
                      masked_least_squares_grad(inst));
}

std::vector<Scalar> anneal_schedule(Scalar delta, Scalar alpha0, Scalar alpha_bar) {
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("anneal_schedule: delta in (0, 1)");
  if (!(alpha_bar > 0.0)) throw ParameterError("anneal_schedule: alpha_bar must be > 0");
  if (!std::isfinite(alpha0)) throw ParameterError("anneal_schedule: alpha0 must be finite");
  std::vector<Scalar> out;
  Scalar a = std::max(alpha0, alpha_bar);
  out.push_back(a);
  while (a > alpha_bar) {
    a = std::max(delta * a, alpha_bar);
    out.push_back(a);
  }
  return out;
}

Index numerical_rank(const Eigen::MatrixXd& X, Scalar rel_tol) {
  if (X.size() == 0) return 0;
  const Eigen::VectorXd s = detail::singular_values(X);
  if (!(s(0) > 0.0)) return 0;
  return static_cast<Index>((s.array() > rel_tol * s(0)).count());
}

Scalar scaled_single_alpha(const MatCompInstance& inst) {
  // 3.5 on 100 x 100 rank-5 instances with N(3, 1) factors at 40% sampling:
  // E[M_ij^2] = 45^2 + 5 * 19, so |P(M)|_F ~ sqrt(0.4 * 1e4 * 2120).
  const Scalar reference_norm = std::sqrt(0.4 * 100.0 * 100.0 * (45.0 * 45.0 + 5.0 * 19.0));
  return 3.5 / reference_norm * inst.observed_norm();
}

// ---------------------------------------------------------------------------
// Reports

const VariantSummary& RunReport::variant(const std::string& name) const {
  for (const auto& s : summary) {
    if (s.variant == name) return s;
  }
  throw ParameterError("no summary for variant '" + name + "'");
}

std::vector<const RunRecord*> RunReport::runs_of(const std::string& name) const {
  std::vector<const RunRecord*> out;
  for (const auto& r : runs) {
    if (r.variant == name) out.push_back(&r);
  }
  return out;
}

std::pair<Scalar, Scalar> mean_std(const std::vector<Scalar>& values) {
  if (values.empty()) return {std::numeric_limits<Scalar>::quiet_NaN(), 0.0};
  Scalar mean = 0.0;
  for (Scalar v : values) mean += v;
  mean /= static_cast<Scalar>(values.size());
  if (values.size() == 1) return {mean, 0.0};
  Scalar ss = 0.0;
  for (Scalar v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<Scalar>(values.size() - 1))};
}

void summarize(RunReport& report) {
  report.summary.clear();
  std::vector<std::string> order;
  for (const auto& r : report.runs) {
    if (std::find(order.begin(), order.end(), r.variant) == order.end()) order.push_back(r.variant);
  }
  for (const auto& name : order) {
    std::vector<Scalar> iters, errors;
    for (const RunRecord* r : report.runs_of(name)) {
      iters.push_back(static_cast<Scalar>(r->iterations));
      errors.push_back(r->final_error);
    }
    VariantSummary s;
    s.variant = name;
    std::tie(s.mean_iters, s.std_iters) = mean_std(iters);
    std::tie(s.mean_final_error, s.std_final_error) = mean_std(errors);
    report.summary.push_back(s);
  }
}

// ---------------------------------------------------------------------------
// LASSO suite

LassoSuiteConfig LassoSuiteConfig::paper_scale() {
  LassoSuiteConfig cfg;
  cfg.m = 500;
  cfg.n = 2500;
  cfg.seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  return cfg;
}

std::vector<Variant> lasso_variants(Scalar r_decaying, Scalar r_constant) {
  std::vector<Variant> out;
  for (const auto& [base, m] : {std::pair<const char*, Method>{"admm", Method::Admm},
                                {"dr", Method::DavisYin},
                                {"fb", Method::DavisYin},
                                {"tseng", Method::Tseng}}) {
    for (auto& v : three_schedules(base, m, r_decaying, r_constant)) out.push_back(v);
  }
  return out;
}

LassoSplit lasso_split_for(const std::string& variant_name) {
  const std::string base = variant_name.substr(0, variant_name.find('-'));
  if (base == "admm" || base == "dr" || base == "dy") return LassoSplit::LeastSquaresProx;
  if (base == "fb" || base == "tseng") return LassoSplit::LeastSquaresGradient;
  throw ParameterError("unknown LASSO variant '" + variant_name + "'");
}

Scalar lasso_step_for(const LassoSuiteConfig& cfg, const Variant& v, Scalar L) {
  if (v.method != Method::Tseng || !(cfg.tseng_step_fraction > 0.0) || !(L > 0.0)) {
    return cfg.lambda;
  }
  return std::min(cfg.lambda, cfg.tseng_step_fraction / L);
}

RunReport run_lasso_suite(const LassoSuiteConfig& cfg) {
  if (cfg.seeds.empty()) throw ParameterError("run_lasso_suite: no seeds");
  if (!(cfg.tol > 0.0)) throw ParameterError("run_lasso_suite: tol must be > 0");
  const auto variants = select(lasso_variants(cfg.r_decaying, cfg.r_constant), cfg.variants);

  RunReport report;
  for (std::uint64_t seed : cfg.seeds) {
    const LassoInstance inst =
        gen_lasso(cfg.m, cfg.n, cfg.sparsity, cfg.noise_std, seed, cfg.alpha_fraction);
    const ReferenceSolution ref = reference_solution(inst, cfg.reference_tol);
    const Scalar f_ref = ref.objective;
    const Scalar L = largest_eigenvalue_ata(inst.A);
    const Element x0 = Element::vector(Eigen::VectorXd::Zero(cfg.n));
    for (const auto& v : variants) {
      const ProblemSpec p = lasso_problem(inst, lasso_split_for(v.name));
      const StepConfig step_cfg(lasso_step_for(cfg, v, L), v.schedule);
      RunOptions opts;
      RunResult res = run(v.method, p, step_cfg, StoppingRule::objective_gap(f_ref, cfg.tol),
                          cfg.max_iters, x0, std::nullopt, opts);

      RunRecord rec;
      rec.variant = v.name;
      rec.seed = seed;
      rec.status = res.trace.status;
      rec.iterations = res.trace.iterations();
      for (const auto& r : res.trace.records) {
        rec.rel_error.push_back(std::abs(r.objective - f_ref) / std::abs(f_ref));
      }
      rec.final_error = rec.rel_error.back();
      rec.trace = std::move(res.trace);
      report.runs.push_back(std::move(rec));
    }
  }
  summarize(report);
  return report;
}

// ---------------------------------------------------------------------------
// Matrix completion suite

MatCompSuiteConfig MatCompSuiteConfig::paper_scale() {
  MatCompSuiteConfig cfg;
  cfg.n = 100;
  cfg.m = 100;
  cfg.rank = 5;
  cfg.sampling = 0.4;
  return cfg;
}

std::vector<Variant> matcomp_variants(Scalar r_decaying, Scalar r_constant) {
  std::vector<Variant> out = three_schedules("dy", Method::DavisYin, r_decaying, r_constant);
  for (auto& v : three_schedules("admm", Method::Admm, r_decaying, r_constant)) out.push_back(v);
  return out;
}

RunRecord run_matcomp_variant(const MatCompInstance& inst, const Variant& v,
                              const MatCompSuiteConfig& cfg) {
  if (v.method == Method::Tseng) {
    throw ConfigurationError("matrix completion has a nonsmooth f; Tseng's method needs f absent");
  }
  const Scalar m_norm = inst.M.norm();
  const std::vector<Scalar> alphas =
      cfg.anneal ? anneal_schedule(cfg.delta, cfg.delta * inst.observed_norm(), cfg.alpha_floor)
                 : std::vector<Scalar>{cfg.alpha ? *cfg.alpha : scaled_single_alpha(inst)};
  const StepConfig step_cfg(cfg.lambda, v.schedule);

  RunRecord rec;
  rec.variant = v.name;
  rec.seed = inst.seed;
  rec.status = RunStatus::Converged;

  SolverState state = SolverState::initial(Element::zeros(Shape::dense(inst.M.rows(), inst.M.cols())));
  std::int64_t k_offset = 0;
  double t_offset = 0.0;
  for (std::size_t j = 0; j < alphas.size(); ++j) {
    const ProblemSpec p = matcomp_problem(inst, alphas[j]);
    std::vector<Scalar> errors;
    RunOptions opts;
    opts.track_objective = false;
    opts.track_residual = false;
    opts.observer = [&](const SolverState& s) {
      errors.push_back((solution_estimate(s).mat() - inst.M).norm() / m_norm);
    };
    // Warm start: keep x and c, restart the momentum.
    SolverState start = SolverState::initial(state.x, state.c);
    start.last_prox_g = state.last_prox_g;
    RunResult res = run_from(v.method, p, step_cfg, StoppingRule::relative_change(cfg.tol),
                             cfg.max_iters, std::move(start), opts);

    const std::size_t first = j == 0 ? 0 : 1;
    for (std::size_t i = first; i < res.trace.records.size(); ++i) {
      IterRecord r = res.trace.records[i];
      r.k += k_offset;
      r.time_s += t_offset;
      rec.trace.records.push_back(r);
      rec.rel_error.push_back(errors[i]);
    }
    k_offset += res.trace.iterations();
    t_offset = rec.trace.records.back().time_s;

    StageRecord stage;
    stage.alpha = alphas[j];
    stage.iterations = res.trace.iterations();
    stage.final_error = errors.back();
    stage.status = res.trace.status;
    rec.stages.push_back(stage);
    if (res.trace.status != RunStatus::Converged && rec.status == RunStatus::Converged) {
      rec.status = res.trace.status;
    }
    state = std::move(res.state);
    if (res.trace.status == RunStatus::Diverged) break;
  }
  rec.trace.status = rec.status;
  rec.iterations = rec.trace.iterations();
  rec.final_error = rec.rel_error.back();
  rec.rank = numerical_rank(solution_estimate(state).mat(), cfg.rank_tol);
  return rec;
}

RunReport run_matcomp_suite(const MatCompSuiteConfig& cfg) {
  if (cfg.seeds.empty()) throw ParameterError("run_matcomp_suite: no seeds");
  const auto variants = select(matcomp_variants(cfg.r_decaying, cfg.constant_r()), cfg.variants);
  RunReport report;
  for (std::uint64_t seed : cfg.seeds) {
    const MatCompInstance inst =
        gen_matcomp(cfg.n, cfg.m, cfg.rank, cfg.sampling, cfg.entry_mean, seed);
    for (const auto& v : variants) report.runs.push_back(run_matcomp_variant(inst, v, cfg));
  }
  summarize(report);
  return report;
}

}  // namespace accsplit
