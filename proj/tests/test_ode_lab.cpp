#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "accsplit/errors.hpp"
#include "accsplit/ode_lab.hpp"
#include "support.hpp"

using namespace accsplit;
using accsplit::testing::random_vector;
using accsplit::testing::vec;

namespace {

GradOracle scalar_quadratic(double m) {
  return quadratic_grad(Eigen::MatrixXd::Constant(1, 1, m), Eigen::VectorXd::Zero(1));
}

ProblemSpec for_method(const QuadraticTriple& tri, Method m) {
  return m == Method::Tseng ? tri.problem(false) : tri.problem(true);
}

// Same triple with every term translated by a: f(x - a) etc.
QuadraticTriple translated(const QuadraticTriple& tri, const Eigen::VectorXd& a) {
  QuadraticTriple out = tri;
  out.qf += tri.Qf * a;
  out.qg += tri.Qg * a;
  out.qw += tri.Qw * a;
  return out;
}

}  // namespace

TEST_CASE("reference trajectory examples") {
  SUBCASE("zero gradient") {
    const GradOracle zero = affine_grad(vec({0.0, 0.0}));
    const Trajectory gf = reference_trajectory(FlowSpec::gradient_flow(zero), vec({1, 2}), std::nullopt, 0, 3, 30);
    for (const auto& x : gf.x) CHECK(norm(x - vec({1, 2})) == 0.0);
    const Trajectory hb = reference_trajectory(FlowSpec::accelerated(DampingSchedule::constant(0.5), zero),
                                               vec({1, 2}), vec({1, -1}), 0, 2, 2000);
    // v' = -r v: v(t) = v0 exp(-r t), x(t) = x0 + v0 (1 - exp(-r t)) / r.
    const double e = std::exp(-0.5 * 2.0);
    CHECK(norm(hb.v.back() - e * vec({1, -1})) <= 1e-12);
    CHECK(norm(hb.x.back() - (vec({1, 2}) + ((1 - e) / 0.5) * vec({1, -1}))) <= 1e-12);
  }
  SUBCASE("exponential decay") {
    const Trajectory t = reference_trajectory(FlowSpec::gradient_flow(scalar_quadratic(1.0)), vec({1.0}),
                                              std::nullopt, 0, 1, 1000);
    CHECK(std::abs(t.x.back()[0] - std::exp(-1.0)) <= 1e-10);
    CHECK(t.t.back() == 1.0);
  }
  SUBCASE("critically damped oscillator") {
    // x'' + 2x' + x = 0, x(0) = 1, x'(0) = 0: x = (1 + t) e^{-t}.
    const Trajectory t = reference_trajectory(
        FlowSpec::accelerated(DampingSchedule::constant(2.0), scalar_quadratic(1.0)), vec({1.0}), vec({0.0}),
        0, 3, 3000, 1000);
    REQUIRE(t.x.size() == 4);
    for (std::size_t i = 0; i < t.x.size(); ++i) {
      const double s = t.t[i];
      CHECK(std::abs(t.x[i][0] - (1 + s) * std::exp(-s)) <= 1e-8);
      CHECK(std::abs(t.v[i][0] + s * std::exp(-s)) <= 1e-8);
    }
  }
  SUBCASE("argument errors") {
    const FlowSpec nag = FlowSpec::accelerated(DampingSchedule::decaying(3), scalar_quadratic(1.0));
    CHECK_THROWS_AS(reference_trajectory(nag, vec({1}), vec({0}), 0.0, 1, 10), ParameterError);
    CHECK_THROWS_AS(reference_trajectory(nag, vec({1}), std::nullopt, 1.0, 2, 10), ParameterError);
    CHECK_THROWS_AS(reference_trajectory(nag, vec({1}), vec({0}), 1.0, 2, 0), ParameterError);
    CHECK_THROWS_AS(FlowSpec::accelerated(DampingSchedule::none(), scalar_quadratic(1.0)), ParameterError);
  }
  SUBCASE("blow-up is a numerical error") {
    const FlowSpec unstable = FlowSpec::gradient_flow(scalar_quadratic(-50.0));
    CHECK_THROWS_AS(reference_trajectory(unstable, vec({1.0}), std::nullopt, 0, 100, 100), NumericalError);
  }
}

TEST_CASE("RK4 has order 4 on a linear ODE") {
  const FlowSpec flow = FlowSpec::gradient_flow(scalar_quadratic(2.0));
  std::vector<double> lh, le;
  for (int steps : {5, 10, 20, 40}) {
    const Trajectory t = reference_trajectory(flow, vec({1.0}), std::nullopt, 0, 1, steps);
    lh.push_back(std::log(1.0 / steps));
    le.push_back(std::log(std::abs(t.x.back()[0] - std::exp(-2.0))));
  }
  CHECK(fit_line(lh, le).slope >= 3.8);
}

TEST_CASE("fit_line") {
  const LineFit f = fit_line({0, 1, 2, 3}, {1, 3, 5, 7});
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.r2 == doctest::Approx(1.0));
  CHECK(f.points == 4);
  CHECK_THROWS_AS(fit_line({0, 1}, {0, 1}), ParameterError);
}

TEST_CASE("default h grid spans 1e-3 to 1e-1 with 8 points") {
  const auto h = default_h_grid();
  CHECK(h.size() == 8);
  CHECK(h.front() == doctest::Approx(0.1));
  CHECK(h.back() == doctest::Approx(1e-3));
}

TEST_CASE("QuadraticTriple") {
  const QuadraticTriple tri = QuadraticTriple::random(6, 3);
  const ProblemSpec p = tri.problem(true);
  const Element xs = tri.minimizer();
  CHECK(norm(total_gradient(p).gradient(xs)) <= 1e-12);
  const ProblemSpec folded = tri.problem(false);
  CHECK_FALSE(folded.f.has_value());
  CHECK(norm(total_gradient(folded).gradient(xs)) <= 1e-12);
  CHECK(norm(total_gradient(tri.problem_without_w()).gradient(xs)) <= 1e-12);
  CHECK(tri.strong_convexity() >= 0.6 - 1e-12);
  CHECK(tri.lipschitz() <= 3.0 + 1e-12);
  Rng rng(1);
  CHECK(estimate_lipschitz(total_gradient(p), random_vector(rng, 6)) ==
        doctest::Approx(tri.lipschitz()).epsilon(1e-4));
  // Same seed, same instance.
  CHECK((QuadraticTriple::random(6, 3).Qg.array() == tri.Qg.array()).all());
}

TEST_CASE("local error order of the three methods") {
  const QuadraticTriple tri = QuadraticTriple::random(5, 42);
  const Element x0 = Element::vector(Eigen::VectorXd::LinSpaced(5, -1, 2));
  struct Cell {
    Method m;
    DampingSchedule s;
  };
  for (const Cell& c : {Cell{Method::Admm, DampingSchedule::constant(1.0)},
                        Cell{Method::DavisYin, DampingSchedule::decaying(3)},
                        Cell{Method::Tseng, DampingSchedule::none()},
                        Cell{Method::DavisYin, DampingSchedule::none()}}) {
    const OrderResult r = local_error_order(c.m, for_method(tri, c.m), c.s, default_h_grid(), x0);
    CHECK_MESSAGE(r.slope() >= 1.8, to_string(c.m) << " " << c.s.describe());
    CHECK_MESSAGE(r.slope() <= 2.2, to_string(c.m) << " " << c.s.describe());
    CHECK(r.h.size() == 8);
  }
}

TEST_CASE("order estimates are invariant to translation") {
  const QuadraticTriple tri = QuadraticTriple::random(4, 5);
  Eigen::VectorXd a(4);
  a << 3, -1, 0.5, 2;
  const QuadraticTriple moved = translated(tri, a);
  const Element x0 = Element::vector(Eigen::VectorXd::LinSpaced(4, -1, 2));
  const Element x0_moved = Element::vector(x0.to_vector() + a);
  for (Method m : {Method::Admm, Method::DavisYin, Method::Tseng}) {
    const auto sched = DampingSchedule::constant(1.0);
    const OrderResult r0 = local_error_order(m, for_method(tri, m), sched, default_h_grid(), x0);
    const OrderResult r1 = local_error_order(m, for_method(moved, m), sched, default_h_grid(), x0_moved);
    CHECK(std::abs(r0.slope() - r1.slope()) <= 1e-3);
  }
}

TEST_CASE("halving the RK step barely moves the measured error") {
  const QuadraticTriple tri = QuadraticTriple::random(4, 6);
  const Element x0 = Element::vector(Eigen::VectorXd::LinSpaced(4, -1, 2));
  OrderOptions coarse, fine;
  fine.rk_substeps = 2 * coarse.rk_substeps;
  const auto sched = DampingSchedule::decaying(3);
  const OrderResult a = local_error_order(Method::DavisYin, tri.problem(), sched, default_h_grid(), x0, coarse);
  const OrderResult b = local_error_order(Method::DavisYin, tri.problem(), sched, default_h_grid(), x0, fine);
  for (std::size_t i = 0; i < a.error.size(); ++i) {
    CHECK(std::abs(a.error[i] - b.error[i]) <= 0.01 * b.error[i]);
  }
}

TEST_CASE("order harness rejects degenerate grids") {
  const QuadraticTriple tri = QuadraticTriple::random(3, 7);
  const Element x0 = Element::vector(Eigen::VectorXd::Ones(3));
  CHECK_THROWS_AS(local_error_order(Method::DavisYin, tri.problem(), DampingSchedule::none(), {0.01, 0.005}, x0),
                  ParameterError);
  CHECK_THROWS_AS(local_error_order(Method::DavisYin, tri.problem(), DampingSchedule::none(), {0.01, 0.005, 0.002}, x0),
                  ParameterError);
  // Every h outside the window h <= 0.1 / sqrt(L).
  OrderOptions opts;
  opts.lipschitz = 1e6;
  CHECK_THROWS_AS(local_error_order(Method::DavisYin, tri.problem(), DampingSchedule::none(), default_h_grid(), x0, opts),
                  ParameterError);
}

TEST_CASE("continuous rates") {
  const auto rows = standard_rate_checks(0.5);
  REQUIRE(rows.size() == 4);
  for (const auto& r : rows) CHECK_MESSAGE(r.pass, r.name << " fitted " << r.fitted);
  const RateRow& gf = rows[1];
  CHECK(gf.kind == RateKind::Exponential);
  CHECK(std::abs(gf.fitted - 0.5) <= 0.15 * 0.5);
  const RateRow& nag = rows[2];
  CHECK(nag.kind == RateKind::Power);
  CHECK(nag.fitted <= -1.7);
  const RateRow& hb = rows[3];
  CHECK(std::abs(hb.fitted - std::sqrt(0.5)) <= 0.25 * std::sqrt(0.5));
}
