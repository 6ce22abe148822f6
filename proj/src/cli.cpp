#include "accsplit/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "accsplit/csv.hpp"
#include "accsplit/errors.hpp"
#include "accsplit/experiments.hpp"
#include "accsplit/ode_lab.hpp"
#include "accsplit/prox.hpp"
#include "accsplit/solvers.hpp"

namespace accsplit {

namespace {

namespace fs = std::filesystem;

// Flags shared by solve and order-check.
struct ScheduleFlags {
  std::string damping = "none";
  std::optional<double> r;
  std::optional<double> r1;
  std::optional<double> r2;

  void add_to(CLI::App* app) {
    app->add_option("--damping", damping, "Momentum schedule")
        ->check(CLI::IsMember({"none", "decaying", "constant", "combined"}))
        ->capture_default_str();
    app->add_option("--r", r, "Damping parameter r (decaying: r >= 3, constant: r > 0)");
    app->add_option("--r1", r1, "Decaying part of combined damping");
    app->add_option("--r2", r2, "Constant part of combined damping");
  }

  DampingSchedule build() const {
    if (damping == "none") return DampingSchedule::none();
    if (damping == "decaying") return DampingSchedule::decaying(r.value_or(3.0));
    if (damping == "constant") {
      if (!r) throw ParameterError("--damping constant needs --r");
      return DampingSchedule::constant(*r);
    }
    if (!r1 || !r2) throw ParameterError("--damping combined needs --r1 and --r2");
    return DampingSchedule::combined(*r1, *r2);
  }
};

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

// Reads `key = value` lines with CLI11's parser and turns them into
// `--key=value` arguments placed before the explicit ones.
std::vector<std::string> expand_config(const std::vector<std::string>& args, CLI::App* sub) {
  std::vector<std::string> rest;
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw ConfigurationError("--config needs a file name");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (!path) return args;

  std::ifstream in(*path);
  if (!in) throw ConfigurationError("cannot read config file " + *path);
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_config(in);
  } catch (const CLI::ParseError& e) {
    throw ConfigurationError(*path + ": " + e.what());
  }

  std::vector<std::string> expanded;
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    if (!item.parents.empty()) {
      throw ConfigurationError(*path + ": sections are not supported (key '" +
                               item.fullname() + "')");
    }
    const std::string flag = "--" + item.name;
    if (item.name == "config" || sub->get_option_no_throw(flag) == nullptr) {
      throw ConfigurationError(*path + ": unknown key '" + item.name + "' for " +
                               sub->get_name());
    }
    const bool explicit_flag = std::any_of(rest.begin(), rest.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
    if (!explicit_flag) expanded.push_back(flag + "=" + join(item.inputs, ','));
  }
  expanded.insert(expanded.end(), rest.begin(), rest.end());
  return expanded;
}

int exit_for(RunStatus s) {
  switch (s) {
    case RunStatus::Converged:
      return kExitOk;
    case RunStatus::MaxIters:
      return kExitMaxIters;
    case RunStatus::Diverged:
      return kExitDiverged;
  }
  return kExitDiverged;
}

int worst_exit(const RunReport& report) {
  int code = kExitOk;
  for (const auto& r : report.runs) code = std::max(code, exit_for(r.status));
  return code;
}

std::vector<std::uint64_t> seed_list(int count, const std::vector<std::uint64_t>& explicit_list) {
  if (!explicit_list.empty()) return explicit_list;
  if (count < 1) throw ParameterError("--seeds must be at least 1");
  std::vector<std::uint64_t> seeds;
  for (int i = 1; i <= count; ++i) seeds.push_back(static_cast<std::uint64_t>(i));
  return seeds;
}

fs::path output_path(const std::string& dir, const std::string& name) {
  return fs::path(dir) / name;
}

// ---------------------------------------------------------------------------

struct SolveCmd {
  std::string method;
  ScheduleFlags schedule;
  std::optional<double> lambda;
  std::string instance = "lasso-desk";
  std::uint64_t seed = 1;
  std::string stop = "auto";
  double tol = 1e-10;
  std::int64_t max_iters = 100000;
  std::optional<double> alpha;
  std::string trace_file;

  void add_to(CLI::App* app) {
    app->add_option("--method", method, "admm, dy, dr, fb or tseng")
        ->required()
        ->check(CLI::IsMember({"admm", "dy", "dr", "fb", "tseng"}));
    schedule.add_to(app);
    app->add_option("--lambda", lambda, "Resolvent step lambda > 0")->required();
    app->add_option("--instance", instance, "Built-in instance")
        ->check(CLI::IsMember(
            {"lasso-desk", "lasso-paper", "matcomp-desk", "matcomp-paper", "quadratic"}))
        ->capture_default_str();
    app->add_option("--seed", seed, "Instance seed")->capture_default_str();
    app->add_option("--stop", stop, "Stopping rule")
        ->check(CLI::IsMember({"auto", "residual", "relative-change", "objective-gap"}))
        ->capture_default_str();
    app->add_option("--tol", tol, "Stopping tolerance")->capture_default_str();
    app->add_option("--max-iters", max_iters, "Iteration cap")->capture_default_str();
    app->add_option("--alpha", alpha, "Nuclear-norm weight for matrix completion");
    app->add_option("--trace-file", trace_file, "Trace file name inside the output directory");
  }

  int run(const std::string& out_dir, std::ostream& out) const {
    const Method m = parse_method(method);
    const DampingSchedule sched = schedule.build();
    const StepConfig cfg(*lambda, sched);

    ProblemSpec p;
    Element x0;
    std::optional<Scalar> f_ref;
    std::string kind = "residual";
    if (instance.rfind("lasso", 0) == 0) {
      const bool paper = instance == "lasso-paper";
      const LassoInstance inst = gen_lasso(paper ? 500 : 50, paper ? 2500 : 250, 0.95, 1e-3, seed);
      if (method == "admm" || method == "dy" || method == "dr") {
        p = lasso_problem(inst, LassoSplit::LeastSquaresProx);
      } else {
        p = lasso_problem(inst, LassoSplit::LeastSquaresGradient);
      }
      x0 = Element::vector(Eigen::VectorXd::Zero(inst.A.cols()));
      if (stop == "objective-gap") f_ref = reference_solution(inst).objective;
    } else if (instance.rfind("matcomp", 0) == 0) {
      if (method != "admm" && method != "dy") {
        throw ConfigurationError("matrix completion supports --method admm or dy");
      }
      const bool paper = instance == "matcomp-paper";
      const MatCompInstance inst = paper ? gen_matcomp(100, 100, 5, 0.4, 3.0, seed)
                                         : gen_matcomp(40, 40, 3, 0.5, 3.0, seed);
      p = matcomp_problem(inst, alpha ? *alpha : scaled_single_alpha(inst));
      x0 = Element::zeros(Shape::dense(inst.M.rows(), inst.M.cols()));
      kind = "relative-change";
    } else {
      const QuadraticTriple tri = QuadraticTriple::random(5, seed);
      if (method == "fb" || method == "tseng") {
        p = tri.problem(false);
      } else if (method == "dr") {
        p = tri.problem_without_w();
      } else {
        p = tri.problem(true);
      }
      x0 = Element::vector(Eigen::VectorXd::Zero(5));
    }
    if (stop != "auto") kind = stop;

    StoppingRule rule;
    if (kind == "residual") {
      rule = StoppingRule::residual_below(tol);
    } else if (kind == "relative-change") {
      rule = StoppingRule::relative_change(tol);
    } else {
      if (!f_ref) throw ConfigurationError("--stop objective-gap needs a LASSO instance");
      rule = StoppingRule::objective_gap(*f_ref, tol);
    }

    RunOptions opts;
    opts.track_objective = p.has_objective() && instance.rfind("matcomp", 0) != 0;
    const RunResult res = accsplit::run(m, p, cfg, rule, max_iters, x0, std::nullopt, opts);

    const std::string name = trace_file.empty()
                                 ? "trace_" + method + "_" + schedule.damping + "_seed" +
                                       std::to_string(seed) + ".csv"
                                 : trace_file;
    const fs::path path = output_path(out_dir, name);
    csv::write_atomic(path, csv::trace_csv(res.trace));

    const IterRecord& last = res.trace.records.back();
    Scalar final_objective = last.objective;
    if (std::isnan(final_objective) && p.has_objective()) {
      final_objective = p.objective(solution_estimate(res.state));
    }
    const Scalar final_residual = std::isnan(last.residual) && m != Method::Admm
                                      ? residual(p, cfg.lambda, res.state, m)
                                      : last.residual;
    out << "method=" << method << " damping=" << sched.describe() << " lambda=" << cfg.lambda
        << "\n";
    out << "status=" << to_string(res.trace.status) << " iterations=" << res.trace.iterations()
        << " objective=" << csv::format_number(final_objective)
        << " residual=" << csv::format_number(final_residual) << "\n";
    out << "trace=" << path.string() << "\n";
    return exit_for(res.trace.status);
  }
};

struct OrderCmd {
  std::string method;
  ScheduleFlags schedule;
  Index dim = 5;
  std::uint64_t seed = 42;

  void add_to(CLI::App* app) {
    app->add_option("--method", method, "admm, dy, dr, fb or tseng")
        ->required()
        ->check(CLI::IsMember({"admm", "dy", "dr", "fb", "tseng"}));
    schedule.add_to(app);
    app->add_option("--dim", dim, "Dimension of the quadratic instance")->capture_default_str();
    app->add_option("--seed", seed, "Instance seed")->capture_default_str();
  }

  int run(const std::string& out_dir, std::ostream& out) const {
    const Method m = parse_method(method);
    const DampingSchedule sched = schedule.build();
    if (dim < 1) throw ParameterError("--dim must be positive");
    const QuadraticTriple tri = QuadraticTriple::random(dim, seed);
    ProblemSpec p;
    if (method == "fb" || method == "tseng") {
      p = tri.problem(false);
    } else if (method == "dr") {
      p = tri.problem_without_w();
    } else {
      p = tri.problem(true);
    }
    const Element x0 = Element::vector(Eigen::VectorXd::LinSpaced(dim, -1.0, 2.0));
    OrderOptions opts;
    opts.lipschitz = tri.lipschitz();

    OrderResult result;
    try {
      result = local_error_order(m, p, sched, default_h_grid(), x0, opts);
    } catch (const ParameterError& e) {
      out << "fit failed: " << e.what() << "\n";
      return kExitDiverged;
    }
    const fs::path path =
        output_path(out_dir, "order_" + method + "_" + schedule.damping + ".csv");
    csv::write_atomic(path, csv::order_csv(result));
    const bool ok = result.slope() >= 1.8 && result.slope() <= 2.2;
    out << "method=" << method << " damping=" << sched.describe() << "\n";
    out << "slope=" << std::setprecision(4) << result.slope() << " intercept="
        << result.fit.intercept << " r2=" << result.fit.r2 << " points=" << result.fit.points
        << " expected=[1.8, 2.2] " << (ok ? "PASS" : "FAIL") << "\n";
    out << "data=" << path.string() << "\n";
    return ok ? kExitOk : kExitMaxIters;
  }
};

struct RatesCmd {
  double m = 0.5;

  void add_to(CLI::App* app) {
    app->add_option("--m", m, "Curvature of the strongly convex quadratic")
        ->capture_default_str();
  }

  int run(const std::string& out_dir, std::ostream& out) const {
    const auto rows = standard_rate_checks(m);
    std::ostringstream csv_text;
    csv_text << csv::kRatesHeader << "\nrow,kind,fitted,predicted,pass\n";
    bool all = true;
    for (const auto& r : rows) {
      const char* kind = r.kind == RateKind::Exponential ? "exponential-rate" : "loglog-slope";
      csv_text << r.name << ',' << kind << ',' << csv::format_number(r.fitted) << ','
               << csv::format_number(r.predicted) << ',' << (r.pass ? 1 : 0) << '\n';
      out << std::left << std::setw(40) << r.name << std::setw(18) << kind
          << " fitted=" << std::setprecision(4) << r.fitted << " predicted=" << r.predicted
          << " " << (r.pass ? "PASS" : "FAIL") << "\n";
      all = all && r.pass;
    }
    const fs::path path = output_path(out_dir, "rates.csv");
    csv::write_atomic(path, csv_text.str());
    out << "data=" << path.string() << "\n";
    return all ? kExitOk : kExitMaxIters;
  }
};

void print_report(const RunReport& report, std::ostream& out) {
  out << std::left << std::setw(18) << "variant" << std::setw(14) << "mean_iters"
      << std::setw(14) << "std_iters" << "mean_final_error\n";
  for (const auto& s : report.summary) {
    out << std::left << std::setw(18) << s.variant << std::setw(14) << std::setprecision(6)
        << s.mean_iters << std::setw(14) << s.std_iters << s.mean_final_error << "\n";
  }
  for (const auto& r : report.runs) {
    if (r.status != RunStatus::Converged) {
      out << "seed " << r.seed << " " << r.variant << ": " << to_string(r.status) << " after "
          << r.iterations << " iterations\n";
    }
  }
}

void write_runs(const RunReport& report, const std::string& out_dir, const std::string& prefix) {
  for (const auto& r : report.runs) {
    csv::write_atomic(
        output_path(out_dir, prefix + "_" + r.variant + "_seed" + std::to_string(r.seed) + ".csv"),
        csv::run_csv(r));
  }
  csv::write_atomic(output_path(out_dir, prefix + "_aggregate.csv"), csv::aggregate_csv(report));
}

struct LassoCmd {
  bool desk = false;
  bool paper = false;
  int seeds = 3;
  std::vector<std::uint64_t> seed_values;
  std::vector<std::string> variants;
  LassoSuiteConfig cfg;

  void add_to(CLI::App* app) {
    auto* d = app->add_flag("--desk", desk, "50 x 250 instances (default)");
    app->add_flag("--paper-scale", paper, "500 x 2500 instances with 10 seeds (slow)")
        ->excludes(d);
    app->add_option("--seeds", seeds, "Number of seeds, 1..N")->capture_default_str();
    app->add_option("--seed-list", seed_values, "Explicit seeds")->delimiter(',');
    app->add_option("--variants", variants, "Subset of variants")->delimiter(',');
    app->add_option("--lambda", cfg.lambda, "Resolvent step")->capture_default_str();
    app->add_option("--r-decaying", cfg.r_decaying)->capture_default_str();
    app->add_option("--r-constant", cfg.r_constant)->capture_default_str();
    app->add_option("--tol", cfg.tol, "Relative objective error target")->capture_default_str();
    app->add_option("--max-iters", cfg.max_iters)->capture_default_str();
    app->add_option("--tseng-step-fraction", cfg.tseng_step_fraction,
                    "Cap Tseng's step at this fraction of 1/L (0 disables)")
        ->capture_default_str();
  }

  int run(const std::string& out_dir, std::ostream& out, CLI::App* app) const {
    LassoSuiteConfig c = cfg;
    if (paper) {
      const LassoSuiteConfig big = LassoSuiteConfig::paper_scale();
      c.m = big.m;
      c.n = big.n;
      c.seeds = big.seeds;
    }
    if (!paper || app->count("--seeds") || !seed_values.empty()) {
      c.seeds = seed_list(seeds, seed_values);
    }
    c.variants = variants;
    const RunReport report = run_lasso_suite(c);
    write_runs(report, out_dir, "lasso");
    print_report(report, out);
    out << "output=" << out_dir << "\n";
    return worst_exit(report);
  }
};

struct MatCompCmd {
  bool desk = false;
  bool paper = false;
  bool anneal = false;
  int seeds = 3;
  std::vector<std::uint64_t> seed_values;
  std::vector<std::string> variants;
  std::optional<double> r_constant;
  std::optional<double> alpha;
  MatCompSuiteConfig cfg;

  void add_to(CLI::App* app) {
    auto* d = app->add_flag("--desk", desk, "40 x 40 rank-3 instances (default)");
    app->add_flag("--paper-scale", paper, "100 x 100 rank-5 instances at 40% sampling (slow)")
        ->excludes(d);
    app->add_flag("--anneal", anneal, "Decrease the weight geometrically with warm starts");
    app->add_option("--seeds", seeds, "Number of seeds, 1..N")->capture_default_str();
    app->add_option("--seed-list", seed_values, "Explicit seeds")->delimiter(',');
    app->add_option("--variants", variants, "Subset of variants")->delimiter(',');
    app->add_option("--lambda", cfg.lambda)->capture_default_str();
    app->add_option("--r-decaying", cfg.r_decaying)->capture_default_str();
    app->add_option("--r-constant", r_constant, "Default 0.1, or 0.5 with --anneal");
    app->add_option("--alpha", alpha, "Single weight; scaled from the instance by default");
    app->add_option("--delta", cfg.delta)->capture_default_str();
    app->add_option("--alpha-floor", cfg.alpha_floor)->capture_default_str();
    app->add_option("--tol", cfg.tol, "Relative change tolerance")->capture_default_str();
    app->add_option("--max-iters", cfg.max_iters, "Iteration cap per stage")
        ->capture_default_str();
  }

  int run(const std::string& out_dir, std::ostream& out) const {
    MatCompSuiteConfig c = cfg;
    if (paper) {
      const MatCompSuiteConfig big = MatCompSuiteConfig::paper_scale();
      c.n = big.n;
      c.m = big.m;
      c.rank = big.rank;
      c.sampling = big.sampling;
    }
    c.anneal = anneal;
    c.r_constant = r_constant;
    c.alpha = alpha;
    c.seeds = seed_list(seeds, seed_values);
    c.variants = variants;
    const RunReport report = run_matcomp_suite(c);
    const std::string prefix = anneal ? "matcomp_anneal" : "matcomp";
    write_runs(report, out_dir, prefix);
    if (anneal) csv::write_atomic(output_path(out_dir, prefix + "_stages.csv"), csv::stages_csv(report));
    print_report(report, out);
    for (const auto& r : report.runs) {
      out << "seed " << r.seed << " " << r.variant << ": rank=" << r.rank
          << " final_error=" << csv::format_number(r.final_error);
      if (anneal) out << " stages=" << r.stages.size();
      out << "\n";
    }
    out << "output=" << out_dir << "\n";
    return worst_exit(report);
  }
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Accelerated operator-splitting solvers and experiments", "accsplit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "accsplit 0.1.0");

  std::string out_dir = kDefaultOutputDir;
  auto add_output = [&](CLI::App* sub) {
    sub->add_option("--output-dir", out_dir, "Directory for CSV output")
        ->envname("ACCSPLIT_OUTPUT_DIR")
        ->capture_default_str();
    sub->add_option("--config", "Key-value configuration file (keys are long option names)");
  };

  SolveCmd solve;
  OrderCmd order;
  RatesCmd rates;
  LassoCmd lasso;
  MatCompCmd matcomp;
  auto* s_solve = app.add_subcommand("solve", "Run one method on a built-in instance");
  solve.add_to(s_solve);
  add_output(s_solve);
  auto* s_order = app.add_subcommand("order-check", "Fit the one-step local error order");
  order.add_to(s_order);
  add_output(s_order);
  auto* s_rates = app.add_subcommand("rates", "Fit continuous convergence rates");
  rates.add_to(s_rates);
  add_output(s_rates);
  auto* s_lasso = app.add_subcommand("lasso", "LASSO comparison of all twelve variants");
  lasso.add_to(s_lasso);
  add_output(s_lasso);
  auto* s_matcomp = app.add_subcommand("matcomp", "Matrix completion study");
  matcomp.add_to(s_matcomp);
  add_output(s_matcomp);

  std::vector<std::string> argv = args;
  try {
    if (!argv.empty()) {
      if (CLI::App* sub = app.get_subcommand_no_throw(argv.front())) {
        std::vector<std::string> tail(argv.begin() + 1, argv.end());
        tail = expand_config(tail, sub);
        argv.assign(1, argv.front());
        argv.insert(argv.end(), tail.begin(), tail.end());
      }
    }
    std::vector<std::string> reversed(argv.rbegin(), argv.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << "accsplit 0.1.0\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    err << "Run with --help for more information.\n";
    return kExitBadArgs;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitBadArgs;
  }

  try {
    if (s_solve->parsed()) return solve.run(out_dir, out);
    if (s_order->parsed()) return order.run(out_dir, out);
    if (s_rates->parsed()) return rates.run(out_dir, out);
    if (s_lasso->parsed()) return lasso.run(out_dir, out, s_lasso);
    if (s_matcomp->parsed()) return matcomp.run(out_dir, out);
  } catch (const std::invalid_argument& e) {
    // ParameterError, ConfigurationError and ShapeError: bad input.
    err << "error: " << e.what() << "\n";
    return kExitBadArgs;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDiverged;
  }
  return kExitBadArgs;
}

}  // namespace accsplit
