#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <cstring>
#include <cmath>

#include "accsplit/errors.hpp"
#include "accsplit/experiments.hpp"
#include "accsplit/ode_lab.hpp"
#include "accsplit/solvers.hpp"
#include "support.hpp"

using namespace accsplit;
using accsplit::testing::random_spd;
using accsplit::testing::random_vector;
using accsplit::testing::vec;

namespace {

const StepConfig kPlain(0.1, DampingSchedule::none());

SolverState random_state(Rng& rng, Index n, bool with_c) {
  SolverState s = SolverState::initial(random_vector(rng, n));
  if (with_c) s.c = random_vector(rng, n);
  return s;
}

// Scaled-form ADMM for |Ax - b|^2/2 + alpha |z|_1 subject to x = z with
// penalty rho = 1/lambda, written against Eigen directly:
//   x+ = argmin |Ax - b|^2/2 + |x - z + u|^2 / (2 lambda)
//   z+ = soft(x+ + u, lambda alpha)
//   u+ = u + x+ - z+
struct TextbookAdmm {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  double alpha;
  double lambda;

  void step(Eigen::VectorXd& z, Eigen::VectorXd& u, Eigen::VectorXd& x) const {
    const Eigen::MatrixXd K =
        Eigen::MatrixXd::Identity(A.cols(), A.cols()) + lambda * A.transpose() * A;
    x = K.colPivHouseholderQr().solve(z - u + lambda * A.transpose() * b);
    const Eigen::VectorXd t = x + u;
    const double thr = lambda * alpha;
    z = t.unaryExpr([thr](double v) {
      return v > thr ? v - thr : (v < -thr ? v + thr : 0.0);
    });
    u += x - z;
  }
};

}  // namespace

TEST_CASE("ADMM without w and momentum is textbook ADMM") {
  const LassoInstance inst = gen_lasso(20, 40, 0.8, 1e-3, 17);
  const ProblemSpec p = lasso_problem(inst, LassoSplit::LeastSquaresProx);
  const double lambda = 0.3;
  const TextbookAdmm ref{inst.A, inst.b, inst.alpha, lambda};
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const SolverState s = random_state(rng, 40, true);
    const SolverState next = step_admm(s, p, StepConfig(lambda, DampingSchedule::none()));
    // Dictionary: z = x_k, u = -lambda c_k.
    Eigen::VectorXd z = s.x.to_vector(), u = -lambda * s.c.to_vector(), x;
    ref.step(z, u, x);
    CHECK((next.x.to_vector() - z).norm() <= 1e-12 * std::max(1.0, z.norm()));
    CHECK((next.last_half.to_vector() - x).norm() <= 1e-12 * std::max(1.0, x.norm()));
    CHECK((-lambda * next.c.to_vector() - u).norm() <= 1e-12 * std::max(1.0, u.norm()));
  }
}

TEST_CASE("ADMM with identity resolvents is a gradient step") {
  Rng rng(2);
  const Eigen::MatrixXd Q = random_spd(rng, 4, 0.5, 2);
  const Eigen::VectorXd q = rng.normal_matrix(4, 1).col(0);
  const ProblemSpec p = make_problem(identity_oracle(), identity_oracle(), quadratic_grad(Q, q));
  const SolverState s = SolverState::initial(random_vector(rng, 4));
  const SolverState next = step_admm(s, p, kPlain);
  const Eigen::VectorXd expected = s.x.to_vector() - 0.1 * (Q * s.x.to_vector() - q);
  CHECK((next.last_half.to_vector() - expected).norm() <= 1e-14);
  CHECK(norm(next.x - next.last_half) == 0.0);
  CHECK(norm(next.c) == 0.0);
}

TEST_CASE("ADMM leaves a stationary point unchanged") {
  const QuadraticTriple tri = QuadraticTriple::random(5, 3);
  const ProblemSpec p = tri.problem(true);
  const Element xs = tri.minimizer();
  const Element c = -p.g->gradient(xs);
  for (const auto& sched : {DampingSchedule::none(), DampingSchedule::constant(0.5),
                            DampingSchedule::decaying(3)}) {
    SolverState s = SolverState::initial(xs, c);
    for (int i = 0; i < 5; ++i) s = step_admm(s, p, StepConfig(0.2, sched));
    CHECK(norm(s.x - xs) <= 1e-12);
    CHECK(norm(s.c - c) <= 1e-12);
  }
}

TEST_CASE("Davis-Yin without f and momentum is forward-backward") {
  const LassoInstance inst = gen_lasso(20, 40, 0.8, 1e-3, 18);
  const ProblemSpec p = lasso_problem(inst, LassoSplit::LeastSquaresGradient);
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const SolverState s = random_state(rng, 40, false);
    const Eigen::VectorXd x = s.x.to_vector();
    const Eigen::VectorXd grad = inst.A.transpose() * (inst.A * x - inst.b);
    const Eigen::VectorXd t = x - 0.1 * grad;
    const double thr = 0.1 * inst.alpha;
    const Eigen::VectorXd expected = t.unaryExpr([thr](double v) {
      return v > thr ? v - thr : (v < -thr ? v + thr : 0.0);
    });
    const SolverState next = step_davis_yin(s, p, kPlain);
    CHECK((next.x.to_vector() - expected).norm() <= 1e-12 * std::max(1.0, expected.norm()));
  }
}

TEST_CASE("Davis-Yin without w and momentum is Douglas-Rachford in reflection form") {
  const LassoInstance inst = gen_lasso(20, 40, 0.8, 1e-3, 19);
  const ProblemSpec p = lasso_problem(inst, LassoSplit::LeastSquaresProx);
  const ProxOracle& Jf = *p.f;
  const ProxOracle& Jg = *p.g;
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const SolverState s = random_state(rng, 40, false);
    const Element jf = Jf(s.x, 0.1);
    const Element expected = s.x + Jg(2.0 * jf - s.x, 0.1) - jf;
    const SolverState next = step_davis_yin(s, p, kPlain);
    CHECK(norm(next.x - expected) <= 1e-12 * std::max(1.0, norm(expected)));
  }
}

TEST_CASE("Tseng without momentum matches the operator composition") {
  const LassoInstance inst = gen_lasso(20, 40, 0.8, 1e-3, 20);
  const ProblemSpec p = lasso_problem(inst, LassoSplit::LeastSquaresGradient);
  const double lambda = 0.05;
  auto forward = [&](const Element& x) { return x - lambda * p.w->gradient(x); };
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const SolverState s = random_state(rng, 40, false);
    const Element expected =
        forward((*p.g)(forward(s.x), lambda)) + lambda * p.w->gradient(s.x);
    const SolverState next = step_tseng(s, p, StepConfig(lambda, DampingSchedule::none()));
    CHECK(norm(next.x - expected) <= 1e-12 * std::max(1.0, norm(expected)));
    CHECK(norm(tseng_operator(p, lambda, s.x) - expected) <= 1e-12 * std::max(1.0, norm(expected)));
  }
}

TEST_CASE("Tseng with affine w has no correction") {
  Rng rng(6);
  const ProblemSpec p = forward_backward_problem(l1_oracle(0.3), affine_grad(random_vector(rng, 6)));
  const SolverState s = SolverState::initial(random_vector(rng, 6));
  const SolverState next = step_tseng(s, p, StepConfig(0.4, DampingSchedule::decaying(3)));
  CHECK(norm(next.x - next.last_half) <= 1e-15);
}

TEST_CASE("Tseng leaves the LASSO solution unchanged") {
  const LassoInstance inst = gen_lasso(20, 40, 0.8, 1e-3, 21);
  const ReferenceSolution ref = reference_solution(inst, 1e-13);
  const ProblemSpec p = lasso_problem(inst, LassoSplit::LeastSquaresGradient);
  SolverState s = SolverState::initial(Element::vector(ref.x));
  s = step_tseng(s, p, StepConfig(0.05, DampingSchedule::constant(0.5)));
  CHECK(norm(s.x - Element::vector(ref.x)) <= 1e-10);
}

TEST_CASE("Davis-Yin on a scalar quadratic follows the hand recurrence and contracts") {
  const double a = 1.0, b = 2.0, c = 0.5, lambda = 0.5;
  auto scalar = [](double k) { return quadratic_oracle(Eigen::MatrixXd::Constant(1, 1, k), Eigen::VectorXd::Zero(1)); };
  const ProblemSpec p = make_problem(scalar(a), scalar(b),
                                     quadratic_grad(Eigen::MatrixXd::Constant(1, 1, c), Eigen::VectorXd::Zero(1)));
  double x = 3.0;
  SolverState s = SolverState::initial(vec({x}));
  for (int k = 0; k < 30; ++k) {
    const double q = x / (1 + lambda * a);
    const double half = 2 * q - x;
    const double tq = (half - lambda * c * q) / (1 + lambda * b);
    const double next = x + tq - q;
    s = step_davis_yin(s, p, StepConfig(lambda, DampingSchedule::none()));
    CHECK(s.x[0] == doctest::Approx(next).epsilon(1e-14));
    CHECK(std::abs(next) < std::abs(x));
    x = next;
  }
  CHECK(std::abs(x) < 1e-3);
}

TEST_CASE("dy_fixed_point_operator") {
  Rng rng(7);
  SUBCASE("no terms gives the identity") {
    const Element x = random_vector(rng, 5);
    CHECK(norm(dy_fixed_point_operator(ProblemSpec{}, 0.3, x) - x) == 0.0);
  }
  SUBCASE("matches one Davis-Yin step on LASSO") {
    const LassoInstance inst = gen_lasso(20, 40, 0.8, 1e-3, 22);
    for (auto split : {LassoSplit::LeastSquaresProx, LassoSplit::LeastSquaresGradient}) {
      ProblemSpec p = lasso_problem(inst, split);
      for (int trial = 0; trial < 20; ++trial) {
        const Element x = random_vector(rng, 40);
        const SolverState next = step_davis_yin(SolverState::initial(x), p, kPlain);
        CHECK(norm(dy_fixed_point_operator(p, 0.1, x) - next.x) <= 1e-12 * std::max(1.0, norm(next.x)));
      }
    }
  }
  SUBCASE("three-term problem") {
    const QuadraticTriple tri = QuadraticTriple::random(6, 9);
    const ProblemSpec p = tri.problem(true);
    const Element x = random_vector(rng, 6);
    const SolverState next = step_davis_yin(SolverState::initial(x), p, StepConfig(0.7, DampingSchedule::none()));
    CHECK(norm(dy_fixed_point_operator(p, 0.7, x) - next.x) <= 1e-12);
  }
  SUBCASE("converged run is a fixed point") {
    const LassoInstance inst = gen_lasso(20, 40, 0.8, 1e-3, 23);
    const ProblemSpec p = lasso_problem(inst, LassoSplit::LeastSquaresProx);
    const RunResult r = run(Method::DavisYin, p, kPlain, StoppingRule::residual_below(1e-11), 100000,
                            Element::zeros(Shape::vector(40)));
    REQUIRE(r.trace.status == RunStatus::Converged);
    CHECK(norm(dy_fixed_point_operator(p, 0.1, r.state.x) - r.state.x) <= 1e-8);
  }
}

TEST_CASE("residual") {
  SUBCASE("zero at an exact fixed point") {
    const ProblemSpec p = forward_backward_problem(l1_oracle(1.0), quadratic_grad(Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Zero(3)));
    CHECK(residual(p, 0.5, Element::zeros(Shape::vector(3)), Method::DavisYin) == 0.0);
    CHECK(residual(p, 0.5, Element::zeros(Shape::vector(3)), Method::Tseng) == 0.0);
  }
  SUBCASE("small at the analytic minimizer of a 1-D strongly convex problem") {
    // (x - 1)^2 + 2 (x + 0.5)^2 / 2 + 0.5 x^2: minimizer 0 / 3.5 = 0.
    const ProblemSpec p = make_problem(
        quadratic_oracle(Eigen::MatrixXd::Constant(1, 1, 2.0), Eigen::VectorXd::Constant(1, 2.0)),
        quadratic_oracle(Eigen::MatrixXd::Constant(1, 1, 2.0), Eigen::VectorXd::Constant(1, -1.0)),
        quadratic_grad(Eigen::MatrixXd::Constant(1, 1, 0.5), Eigen::VectorXd::Constant(1, -1.0)));
    const double xs = (2.0 - 1.0 - 1.0) / 4.5 + 0.0;  // (qf + qg + qw) / (Qf + Qg + Qw)
    const double lambda = 0.4;
    // The Davis-Yin fixed point is x* + lambda grad f(x*).
    const Element z = vec({xs + lambda * (2.0 * xs - 2.0)});
    CHECK(residual(p, lambda, z, Method::DavisYin) <= 1e-10);
  }
  SUBCASE("ADMM residual needs a step") {
    const QuadraticTriple tri = QuadraticTriple::random(3, 2);
    const ProblemSpec p = tri.problem(true);
    SolverState s = SolverState::initial(Element::zeros(Shape::vector(3)));
    CHECK(std::isnan(residual(p, 0.1, s, Method::Admm)));
    s = step_admm(s, p, kPlain);
    CHECK(residual(p, 0.1, s, Method::Admm) == doctest::Approx(norm(s.x - s.last_half) + norm(s.x - s.x_prev)));
    CHECK_THROWS_AS(residual(p, 0.1, s.x, Method::Admm), ConfigurationError);
  }
}

TEST_CASE("fixed-point residual bounds stationarity on quadratics") {
  // x - P(x) = lambda (grad f(x1/4) + grad g(x3/4) + grad w(x1/4)), so
  // |grad F(J_f x)| <= (1 + lambda L_g) |x - P(x)| / lambda.
  const QuadraticTriple tri = QuadraticTriple::random(6, 12);
  const ProblemSpec p = tri.problem(true);
  const double lambda = 0.5;
  const double Lg = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(tri.Qg).eigenvalues().maxCoeff();
  Rng rng(8);
  for (double tol : {1e-3, 1e-6, 1e-9}) {
    const RunResult r = run(Method::DavisYin, p, StepConfig(lambda, DampingSchedule::none()),
                            StoppingRule::residual_below(tol), 100000, random_vector(rng, 6));
    REQUIRE(r.trace.status == RunStatus::Converged);
    const double eps = residual(p, lambda, r.state.x, Method::DavisYin);
    const Element xbar = (*p.f)(r.state.x, lambda);
    const Element gradF = p.f->gradient(xbar) + p.g->gradient(xbar) + p.w->gradient(xbar);
    CHECK(norm(gradF) <= (1 + lambda * Lg) * eps / lambda * (1 + 1e-9) + 1e-14);
  }
}

TEST_CASE("configuration errors") {
  Rng rng(9);
  const SolverState s = SolverState::initial(random_vector(rng, 3));
  const ProblemSpec only_g = make_problem(std::nullopt, l1_oracle(1), std::nullopt);
  CHECK_THROWS_AS(step_admm(s, only_g, kPlain), ConfigurationError);
  CHECK_THROWS_AS(step_davis_yin(s, make_problem(l1_oracle(1), std::nullopt, std::nullopt), kPlain),
                  ConfigurationError);
  CHECK_THROWS_AS(step_tseng(s, make_problem(l1_oracle(1), l1_oracle(1), affine_grad(random_vector(rng, 3))), kPlain),
                  ConfigurationError);
  CHECK_THROWS_AS(ProblemSpec{}.validate(), ConfigurationError);
  CHECK_THROWS_AS(StepConfig(0.0, DampingSchedule::none()), ParameterError);
}

TEST_CASE("step sizes") {
  CHECK(StepConfig(0.09, DampingSchedule::none()).h() == 0.09);
  CHECK(StepConfig(0.09, DampingSchedule::decaying(3)).h() == doctest::Approx(0.3));
  CHECK(StepConfig(0.09, DampingSchedule::constant(1)).h() == doctest::Approx(0.3));
}

TEST_CASE("extrapolation uses gamma_{k+1}") {
  // Unit constant drift: x_{k+1} = x_hat_k + lambda, with x_hat_0 = x_0 = 0
  // and gamma_k = k / (k + 3).
  const ProblemSpec p = forward_backward_problem(identity_oracle(), affine_grad(vec({-1.0})));
  const double lambda = 0.25;
  const StepConfig cfg(lambda, DampingSchedule::decaying(3));
  SolverState s = SolverState::initial(vec({0.0}));
  s = step_davis_yin(s, p, cfg);
  CHECK(s.x[0] == doctest::Approx(lambda));
  CHECK(s.x_hat[0] == doctest::Approx(lambda * 1.25));
  s = step_davis_yin(s, p, cfg);
  CHECK(s.x[0] == doctest::Approx(2.25 * lambda));
  s = step_davis_yin(s, p, cfg);
  CHECK(s.x[0] == doctest::Approx(3.75 * lambda));
  CHECK(s.k == 3);
}

TEST_CASE("run loop contract") {
  const QuadraticTriple tri = QuadraticTriple::random(4, 5);
  const ProblemSpec p = tri.problem(true);
  const Element x0 = Element::zeros(Shape::vector(4));
  CHECK_THROWS_AS(run(Method::DavisYin, p, kPlain, StoppingRule::residual_below(), 0, x0), ParameterError);
  const RunResult one = run(Method::DavisYin, p, kPlain, StoppingRule::max_iters_only(), 1, x0);
  CHECK(one.trace.iterations() == 1);
  CHECK(one.trace.records.size() == 2);
  CHECK(one.state.k == 1);
  CHECK(one.trace.status == RunStatus::MaxIters);

  const RunResult conv = run(Method::DavisYin, p, StepConfig(0.5, DampingSchedule::none()),
                             StoppingRule::residual_below(1e-10), 10000, x0);
  CHECK(conv.trace.status == RunStatus::Converged);
  CHECK(conv.trace.records.size() == static_cast<std::size_t>(conv.trace.iterations() + 1));
  for (std::size_t i = 0; i < conv.trace.records.size(); ++i) CHECK(conv.trace.records[i].k == static_cast<std::int64_t>(i));
  CHECK(conv.trace.records.back().residual <= 1e-10);
}

TEST_CASE("divergence is reported") {
  // Forward-backward with lambda L = 25 blows up geometrically.
  const ProblemSpec p = forward_backward_problem(identity_oracle(), quadratic_grad(10.0 * Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2)));
  const RunResult r = run(Method::DavisYin, p, StepConfig(2.5, DampingSchedule::none()),
                          StoppingRule::residual_below(), 1000, vec({1, 1}));
  CHECK(r.trace.status == RunStatus::Diverged);
  CHECK(r.trace.iterations() < 1000);
}

TEST_CASE("LASSO desk instance with ADMM") {
  const LassoInstance inst = gen_lasso(50, 250, 0.95, 1e-3, 1);
  const ReferenceSolution ref = reference_solution(inst);
  const ProblemSpec p = lasso_problem(inst, LassoSplit::LeastSquaresProx);
  const Element x0 = Element::zeros(Shape::vector(250));
  const StoppingRule stop = StoppingRule::objective_gap(ref.objective, 1e-6);
  const RunResult plain = run(Method::Admm, p, StepConfig(0.1, DampingSchedule::none()), stop, 100000, x0);
  const RunResult fast = run(Method::Admm, p, StepConfig(0.1, DampingSchedule::constant(0.5)), stop, 100000, x0);
  REQUIRE(plain.trace.status == RunStatus::Converged);
  REQUIRE(fast.trace.status == RunStatus::Converged);
  CHECK(std::abs(plain.trace.records.back().objective - ref.objective) <= 1e-6 * ref.objective);
  CHECK(fast.trace.iterations() < plain.trace.iterations());
}

TEST_CASE("runs are deterministic") {
  const LassoInstance inst = gen_lasso(30, 60, 0.9, 1e-3, 3);
  for (Method m : {Method::Admm, Method::DavisYin, Method::Tseng}) {
    const ProblemSpec p = lasso_problem(inst, m == Method::Admm ? LassoSplit::LeastSquaresProx
                                                                : LassoSplit::LeastSquaresGradient);
    const StepConfig cfg(0.05, DampingSchedule::decaying(3));
    const Element x0 = Element::vector(Eigen::VectorXd::LinSpaced(60, -1, 1));
    const RunResult a = run(m, p, cfg, StoppingRule::residual_below(1e-9), 500, x0);
    const RunResult b = run(m, p, cfg, StoppingRule::residual_below(1e-9), 500, x0);
    REQUIRE(a.trace.records.size() == b.trace.records.size());
    for (std::size_t i = 0; i < a.trace.records.size(); ++i) {
      const auto& ra = a.trace.records[i];
      const auto& rb = b.trace.records[i];
      CHECK(ra.k == rb.k);
      CHECK(std::memcmp(&ra.objective, &rb.objective, sizeof(double)) == 0);
      CHECK(std::memcmp(&ra.residual, &rb.residual, sizeof(double)) == 0);
    }
    CHECK((a.state.x.mat().array() == b.state.x.mat().array()).all());
  }
}

TEST_CASE("method names") {
  CHECK(parse_method("admm") == Method::Admm);
  CHECK(parse_method("dy") == Method::DavisYin);
  CHECK(parse_method("dr") == Method::DavisYin);
  CHECK(parse_method("fb") == Method::DavisYin);
  CHECK(parse_method("tseng") == Method::Tseng);
  CHECK_THROWS_AS(parse_method("newton"), ParameterError);
}
