#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "accsplit/cli.hpp"
#include "accsplit/damping.hpp"
#include "accsplit/errors.hpp"
#include "accsplit/experiments.hpp"
#include "accsplit/monotone.hpp"
#include "accsplit/ode_lab.hpp"
#include "accsplit/prox.hpp"
#include "accsplit/solvers.hpp"

namespace py = pybind11;
using namespace accsplit;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// 1-D arrays become vectors, 2-D arrays matrices.
Element to_element(const Array& a) {
  if (a.ndim() == 1) {
    Eigen::VectorXd v(a.shape(0));
    for (py::ssize_t i = 0; i < a.shape(0); ++i) v(i) = a.at(i);
    return Element::vector(std::move(v));
  }
  if (a.ndim() == 2) {
    Eigen::MatrixXd m(a.shape(0), a.shape(1));
    for (py::ssize_t i = 0; i < a.shape(0); ++i)
      for (py::ssize_t j = 0; j < a.shape(1); ++j) m(i, j) = a.at(i, j);
    return Element::matrix(std::move(m));
  }
  throw ShapeError("expected a 1-D or 2-D array");
}

py::array_t<double> to_array(const Element& x) {
  if (!x.is_matrix()) {
    const Eigen::VectorXd v = x.to_vector();
    py::array_t<double> out(v.size());
    std::copy(v.data(), v.data() + v.size(), out.mutable_data());
    return out;
  }
  const Eigen::MatrixXd& m = x.mat();
  py::array_t<double> out({m.rows(), m.cols()});
  auto r = out.mutable_unchecked<2>();
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) r(i, j) = m(i, j);
  return out;
}

py::dict trace_dict(const IterTrace& t) {
  std::vector<std::int64_t> k;
  std::vector<double> obj, res;
  for (const auto& r : t.records) {
    k.push_back(r.k);
    obj.push_back(r.objective);
    res.push_back(r.residual);
  }
  py::dict d;
  d["k"] = k;
  d["objective"] = obj;
  d["residual"] = res;
  d["status"] = to_string(t.status);
  d["iterations"] = t.iterations();
  return d;
}

py::list summary_list(const RunReport& rep) {
  py::list out;
  for (const auto& s : rep.summary) {
    py::dict d;
    d["variant"] = s.variant;
    d["mean_iters"] = s.mean_iters;
    d["std_iters"] = s.std_iters;
    d["mean_final_error"] = s.mean_final_error;
    d["std_final_error"] = s.std_final_error;
    out.append(d);
  }
  return out;
}

py::list runs_list(const RunReport& rep) {
  py::list out;
  for (const auto& r : rep.runs) {
    py::dict d;
    d["variant"] = r.variant;
    d["seed"] = r.seed;
    d["iterations"] = r.iterations;
    d["status"] = to_string(r.status);
    d["final_error"] = r.final_error;
    d["rank"] = r.rank;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Accelerated operator splitting solvers";

  py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
  py::register_exception<ConfigurationError>(m, "ConfigurationError", PyExc_ValueError);
  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<DampingSchedule>(m, "DampingSchedule")
      .def_static("none", &DampingSchedule::none)
      .def_static("decaying", &DampingSchedule::decaying, py::arg("r"))
      .def_static("constant", &DampingSchedule::constant, py::arg("r"))
      .def_static("combined", &DampingSchedule::combined, py::arg("r1"), py::arg("r2"))
      .def("describe", &DampingSchedule::describe)
      .def("eta", &DampingSchedule::eta, py::arg("t"))
      .def("__repr__", [](const DampingSchedule& s) { return "DampingSchedule(" + s.describe() + ")"; });

  m.def("gamma", [](const DampingSchedule& s, std::int64_t k, Scalar h) { return accsplit::gamma(s, k, h); }, py::arg("schedule"), py::arg("k"), py::arg("h"));

  m.def("prox_l1", [](const Array& v, double tau) { return to_array(prox_l1(to_element(v), tau)); },
        py::arg("v"), py::arg("tau"));
  m.def("project_box", [](const Array& x, double a, double b) { return to_array(project_box(to_element(x), a, b)); },
        py::arg("x"), py::arg("a"), py::arg("b"));
  m.def("prox_nuclear", [](const Array& x, double tau) { return to_array(prox_nuclear(to_element(x), tau)); },
        py::arg("x"), py::arg("tau"));
  m.def(
      "prox_least_squares",
      [](const Array& v, double lambda, const Eigen::MatrixXd& A, const Array& b) {
        return to_array(prox_least_squares(to_element(v), lambda, A, to_element(b)));
      },
      py::arg("v"), py::arg("lam"), py::arg("A"), py::arg("b"));
  m.def(
      "resolvent_of_yosida_l1",
      [](const Array& x, double alpha, double lambda, double mu) {
        return to_array(resolvent_of_yosida(MonotoneOracle::from_prox(l1_oracle(alpha)), lambda, mu, to_element(x)));
      },
      py::arg("x"), py::arg("alpha"), py::arg("lam"), py::arg("mu"));

  py::class_<LassoInstance>(m, "LassoInstance")
      .def_readonly("A", &LassoInstance::A)
      .def_readonly("b", &LassoInstance::b)
      .def_readonly("x_true", &LassoInstance::x_true)
      .def_readonly("alpha", &LassoInstance::alpha)
      .def_readonly("seed", &LassoInstance::seed)
      .def("objective", [](const LassoInstance& inst, const Eigen::VectorXd& x) { return lasso_objective(inst, x); });

  m.def("gen_lasso", &gen_lasso, py::arg("m"), py::arg("n"), py::arg("sparsity"), py::arg("noise_std"),
        py::arg("seed"), py::arg("alpha_fraction") = 0.1);

  m.def(
      "solve_lasso",
      [](const LassoInstance& inst, const std::string& method, double lambda, const DampingSchedule& schedule,
         double tol, std::int64_t max_iters) {
        const Method meth = parse_method(method);
        const bool prox_split = method == "admm" || method == "dy" || method == "dr";
        const ProblemSpec p =
            lasso_problem(inst, prox_split ? LassoSplit::LeastSquaresProx : LassoSplit::LeastSquaresGradient);
        RunResult r;
        {
          py::gil_scoped_release release;
          r = run(meth, p, StepConfig(lambda, schedule), StoppingRule::residual_below(tol), max_iters,
                  Element::zeros(Shape::vector(inst.A.cols())));
        }
        py::dict d = trace_dict(r.trace);
        d["x"] = to_array(solution_estimate(r.state));
        return d;
      },
      py::arg("instance"), py::arg("method"), py::arg("lam"), py::arg("schedule") = DampingSchedule::none(),
      py::arg("tol") = 1e-10, py::arg("max_iters") = 100000);

  m.def(
      "order_check",
      [](const std::string& method, const DampingSchedule& schedule, Index dim, std::uint64_t seed) {
        const QuadraticTriple tri = QuadraticTriple::random(dim, seed);
        const Method meth = parse_method(method);
        const ProblemSpec p = method == "fb" || method == "tseng" ? tri.problem(false)
                              : method == "dr"                    ? tri.problem_without_w()
                                                                  : tri.problem(true);
        const Element x0 = Element::vector(Eigen::VectorXd::LinSpaced(dim, -1, 2));
        py::gil_scoped_release release;
        const OrderResult r = local_error_order(meth, p, schedule, default_h_grid(), x0);
        return std::make_tuple(r.slope(), r.h, r.error);
      },
      py::arg("method"), py::arg("schedule"), py::arg("dim") = 5, py::arg("seed") = 42,
      "Returns (slope, h, error) of the one-step local error fit.");

  m.def(
      "rate_checks",
      [](double mu) {
        py::list out;
        for (const RateRow& r : standard_rate_checks(mu)) {
          py::dict d;
          d["name"] = r.name;
          d["kind"] = r.kind == RateKind::Exponential ? "exponential" : "power";
          d["fitted"] = r.fitted;
          d["predicted"] = r.predicted;
          d["pass"] = r.pass;
          out.append(d);
        }
        return out;
      },
      py::arg("m") = 0.5);

  m.def(
      "lasso_suite",
      [](std::vector<std::uint64_t> seeds, std::vector<std::string> variants, bool paper_scale) {
        LassoSuiteConfig cfg = paper_scale ? LassoSuiteConfig::paper_scale() : LassoSuiteConfig{};
        cfg.seeds = std::move(seeds);
        cfg.variants = std::move(variants);
        RunReport rep;
        {
          py::gil_scoped_release release;
          rep = run_lasso_suite(cfg);
        }
        return py::make_tuple(runs_list(rep), summary_list(rep));
      },
      py::arg("seeds") = std::vector<std::uint64_t>{1, 2, 3}, py::arg("variants") = std::vector<std::string>{},
      py::arg("paper_scale") = false, "Returns (runs, summary).");

  m.def(
      "matcomp_suite",
      [](std::vector<std::uint64_t> seeds, std::vector<std::string> variants, bool anneal, std::int64_t max_iters) {
        MatCompSuiteConfig cfg;
        cfg.seeds = std::move(seeds);
        cfg.variants = std::move(variants);
        cfg.anneal = anneal;
        cfg.max_iters = max_iters;
        RunReport rep;
        {
          py::gil_scoped_release release;
          rep = run_matcomp_suite(cfg);
        }
        return py::make_tuple(runs_list(rep), summary_list(rep));
      },
      py::arg("seeds") = std::vector<std::uint64_t>{1, 2, 3}, py::arg("variants") = std::vector<std::string>{},
      py::arg("anneal") = false, py::arg("max_iters") = 50000, "Returns (runs, summary).");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line interface; returns (exit_code, stdout, stderr).");
}
