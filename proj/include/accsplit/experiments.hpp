#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "accsplit/damping.hpp"
#include "accsplit/element.hpp"
#include "accsplit/solvers.hpp"

namespace accsplit {

// ---------------------------------------------------------------------------
// LASSO: |Ax - b|^2 / 2 + alpha |x|_1.

struct LassoInstance {
  Eigen::MatrixXd A;  // unit-norm columns
  Eigen::VectorXd b;
  Eigen::VectorXd x_true;
  Scalar alpha = 0.0;
  std::uint64_t seed = 0;
};

/// A standard normal with columns scaled to unit norm; x_true standard normal
/// on a uniformly chosen support of round((1 - sparsity) n) entries;
/// b = A x_true + noise. alpha = alpha_fraction * alpha_max(A, b).
LassoInstance gen_lasso(Index m, Index n, Scalar sparsity, Scalar noise_std, std::uint64_t seed,
                        Scalar alpha_fraction = 0.1);

/// |A^T b|_inf, the smallest alpha for which x = 0 solves the LASSO.
Scalar alpha_max(const Eigen::MatrixXd& A, const Eigen::VectorXd& b);

Scalar lasso_objective(const LassoInstance& inst, const Eigen::VectorXd& x);

struct ReferenceSolution {
  Eigen::VectorXd x;
  Scalar objective = 0.0;
  Scalar residual = 0.0;  // last fixed-point residual |x_{k+1} - x_k|
  std::int64_t iterations = 0;
  bool reached_tol = false;
};

/// Plain proximal gradient with step 0.5 / L, L = |A|_2^2 by power iteration,
/// until |x_{k+1} - x_k| <= tol or max_iters. When the cap is hit the result
/// carries the best residual seen and reached_tol = false.
ReferenceSolution reference_solution(const LassoInstance& inst, Scalar tol = 1e-12,
                                     std::int64_t max_iters = 1'000'000,
                                     Scalar step_fraction = 0.5);

/// ADMM and Douglas-Rachford put the least-squares term in f; forward-backward
/// and Tseng put it in w.
enum class LassoSplit { LeastSquaresProx, LeastSquaresGradient };

ProblemSpec lasso_problem(const LassoInstance& inst, LassoSplit split);

// ---------------------------------------------------------------------------
// Nonnegative-style matrix completion:
//   alpha |X|_* + indicator_[a,b](X) + |P(X - M)|_F^2 / 2.

struct MatCompInstance {
  Eigen::MatrixXd M;
  Eigen::MatrixXd mask;  // 1 on observed entries, 0 elsewhere
  Scalar a = 0.0;
  Scalar b = 0.0;
  Index rank = 0;
  std::uint64_t seed = 0;

  Index observed() const;
  /// |P(M)|_F.
  Scalar observed_norm() const;
};

/// M = L1 L2^T with L1 (n x rank), L2 (m x rank) entries N(entry_mean, 1);
/// floor(s n m) entries observed uniformly without replacement; a and b are
/// the observed min and max widened by half the observed standard deviation.
MatCompInstance gen_matcomp(Index n, Index m, Index rank, Scalar s, Scalar entry_mean,
                            std::uint64_t seed);

/// |P(X - M)|_F^2 / 2, gradient P(X - M), L = 1.
GradOracle masked_least_squares_grad(const MatCompInstance& inst);

ProblemSpec matcomp_problem(const MatCompInstance& inst, Scalar alpha);

/// alpha_0, max(delta alpha_0, alpha_bar), ... ending at the first value equal
/// to alpha_bar. alpha_0 <= alpha_bar gives the single value alpha_bar.
std::vector<Scalar> anneal_schedule(Scalar delta, Scalar alpha0, Scalar alpha_bar);

/// Singular values above rel_tol * sigma_1.
Index numerical_rank(const Eigen::MatrixXd& X, Scalar rel_tol = 1e-6);

/// Weight used for 100 x 100 rank-5 instances at 40% sampling, expressed
/// relative to |P(M)|_F so smaller instances get a comparable weight.
Scalar scaled_single_alpha(const MatCompInstance& inst);

// ---------------------------------------------------------------------------
// Suites.

struct Variant {
  std::string name;
  Method method = Method::DavisYin;
  DampingSchedule schedule;
};

struct StageRecord {
  Scalar alpha = 0.0;
  std::int64_t iterations = 0;
  Scalar final_error = 0.0;
  RunStatus status = RunStatus::MaxIters;
};

struct RunRecord {
  std::string variant;
  std::uint64_t seed = 0;
  IterTrace trace;                // concatenated over annealing stages
  std::vector<Scalar> rel_error;  // one entry per trace record
  std::int64_t iterations = 0;
  RunStatus status = RunStatus::MaxIters;
  Scalar final_error = 0.0;
  Index rank = -1;                  // matrix completion only
  std::vector<StageRecord> stages;  // matrix completion only
};

struct VariantSummary {
  std::string variant;
  Scalar mean_iters = 0.0;
  Scalar std_iters = 0.0;
  Scalar mean_final_error = 0.0;
  Scalar std_final_error = 0.0;
};

struct RunReport {
  std::vector<RunRecord> runs;
  std::vector<VariantSummary> summary;  // in variant order

  const VariantSummary& variant(const std::string& name) const;
  std::vector<const RunRecord*> runs_of(const std::string& name) const;
};

/// Sample mean and standard deviation (n - 1 denominator; 0 for one sample).
std::pair<Scalar, Scalar> mean_std(const std::vector<Scalar>& values);

/// Groups runs by variant (keeping first-seen order) and fills `summary`.
void summarize(RunReport& report);

struct LassoSuiteConfig {
  Index m = 50;
  Index n = 250;
  Scalar sparsity = 0.95;
  Scalar noise_std = 1e-3;
  Scalar alpha_fraction = 0.1;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  Scalar lambda = 0.1;
  Scalar r_decaying = 3.0;
  Scalar r_constant = 0.5;
  Scalar tol = 1e-6;  // relative objective error
  std::int64_t max_iters = 200'000;
  Scalar reference_tol = 1e-12;
  /// Tseng's method needs lambda < 1/L; when positive, Tseng variants use
  /// min(lambda, tseng_step_fraction / L). Zero keeps lambda as given.
  Scalar tseng_step_fraction = 0.95;
  std::vector<std::string> variants;  // empty selects all twelve

  static LassoSuiteConfig paper_scale();
};

/// admm, dr, fb, tseng, each as plain, -decaying and -constant.
std::vector<Variant> lasso_variants(Scalar r_decaying, Scalar r_constant);
LassoSplit lasso_split_for(const std::string& variant_name);

/// Step used for a variant on an instance with |A|_2^2 = L.
Scalar lasso_step_for(const LassoSuiteConfig& cfg, const Variant& v, Scalar L);

RunReport run_lasso_suite(const LassoSuiteConfig& cfg);

struct MatCompSuiteConfig {
  Index n = 40;
  Index m = 40;
  Index rank = 3;
  Scalar sampling = 0.5;
  Scalar entry_mean = 3.0;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  bool anneal = false;
  Scalar lambda = 1.0;
  Scalar r_decaying = 3.0;
  /// Defaults to 0.1 for a single weight and 0.5 when annealing.
  std::optional<Scalar> r_constant;
  Scalar tol = 1e-10;  // relative change of x_k
  std::int64_t max_iters = 50'000;  // per stage
  std::optional<Scalar> alpha;       // single-weight mode; scaled default otherwise
  Scalar delta = 0.25;
  Scalar alpha_floor = 1e-8;
  Scalar rank_tol = 1e-6;
  std::vector<std::string> variants;  // empty selects all six

  static MatCompSuiteConfig paper_scale();
  Scalar constant_r() const { return r_constant ? *r_constant : (anneal ? 0.5 : 0.1); }
};

/// dy and admm, each as plain, -decaying and -constant.
std::vector<Variant> matcomp_variants(Scalar r_decaying, Scalar r_constant);

/// Runs one variant on one instance; annealing warm-starts x and c from the
/// previous stage and restarts the momentum.
RunRecord run_matcomp_variant(const MatCompInstance& inst, const Variant& v,
                              const MatCompSuiteConfig& cfg);

RunReport run_matcomp_suite(const MatCompSuiteConfig& cfg);

}  // namespace accsplit
