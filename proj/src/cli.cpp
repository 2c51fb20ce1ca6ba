#include "l2elogit/cli.hpp"

#include "l2elogit/baselines.hpp"
#include "l2elogit/io.hpp"
#include "l2elogit/path.hpp"
#include "l2elogit/sim.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>

namespace l2e {

namespace {

struct DataArgs {
  std::string path;
  std::string label;
  std::string delimiter = ",";
  std::string positive;
  std::string na = "error";
  bool no_header = false;
  bool standardize = false;
};

struct SolverArgs {
  int max_iter = SolverOptions{}.max_mm_iterations;
  int max_sweeps = SolverOptions{}.max_cd_sweeps;
  double mm_tol = SolverOptions{}.mm_tolerance;
  double cd_tol = SolverOptions{}.cd_tolerance;
  double kkt_tol = SolverOptions{}.kkt_tolerance;
  double eta_inflation = 1.0;
};

struct Args {
  std::string loss = "l2e";
  double alpha = 1.0;
  bool alpha_set = false;
  double lambda = 0.0;
  std::vector<double> lambdas;
  std::size_t nlambda = 100;
  double eps = 0.05;
  double hinge_t = -1.0;
  std::size_t top_k = 0;
  double lambda_refit = 0.0;
  std::string rule = "min";
  std::size_t folds = 10;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  bool strict = false;
  std::string out = "-";
  std::string plot;
  std::string tsv;
  std::string traversal;
  bool both_directions = false;
  // simulate
  std::string scenario = "low-dim-shift";
  double shift = 3.0;
  int outliers = 1;
  int replicates = 1000;
  std::vector<std::string> estimators;
  DataArgs data;
  SolverArgs solver;
};

void add_data_options(CLI::App* cmd, DataArgs& d) {
  cmd->add_option("--data", d.path, "Input table (CSV by default)")->required();
  cmd->add_option("--label", d.label,
                  "Label column name (or 1-based index with --no-header); default last column");
  cmd->add_option("--delimiter", d.delimiter, "Field separator: a character, 'tab' or 'space'");
  cmd->add_option("--positive", d.positive, "Label value coded as 1 when labels are strings");
  cmd->add_option("--na", d.na, "Missing value policy")
      ->check(CLI::IsMember({"error", "drop_row"}));
  cmd->add_flag("--no-header", d.no_header, "First row holds data, not column names");
  cmd->add_flag("--standardize", d.standardize, "Scale covariates to unit variance");
}

void add_solver_options(CLI::App* cmd, SolverArgs& s) {
  cmd->add_option("--max-iter", s.max_iter, "Maximum MM iterations per fit")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-sweeps", s.max_sweeps, "Maximum coordinate sweeps per MM step")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--mm-tol", s.mm_tol, "Relative objective change for convergence")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--cd-tol", s.cd_tol, "Coordinate change tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--kkt-tol", s.kkt_tol, "Stationarity tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--eta-inflation", s.eta_inflation, "Multiplier (>= 1) on the curvature bound");
}

void add_model_options(CLI::App* cmd, Args& a) {
  cmd->add_option("--loss", a.loss, "Loss: l2e, mle or hhsvm")
      ->check(CLI::IsMember({"l2e", "mle", "hhsvm"}));
  cmd->add_option("--alpha", a.alpha, "Elastic Net mixing weight in [0, 1]");
  cmd->add_option("--hinge-t", a.hinge_t, "Knee of the smooth hinge (t < 1)");
  cmd->add_option("--top-k", a.top_k, "Heuristic start size for L2E (0: min(n, p))");
}

void add_output_options(CLI::App* cmd, Args& a) {
  cmd->add_option("--out", a.out, "Output file ('-' for stdout)");
  cmd->add_flag("--strict", a.strict, "Exit with status 3 if any fit fails to converge");
}

char parse_delimiter(const std::string& d) {
  if (d == "tab" || d == "\\t" || d == "\t") return '\t';
  if (d == "space" || d == "whitespace" || d == " ") return ' ';
  if (d.size() != 1) throw ConfigError("delimiter must be a single character, 'tab' or 'space'");
  if (d[0] == '"' || d[0] == '\n' || d[0] == '\r') throw ConfigError("invalid delimiter");
  return d[0];
}

SolverOptions solver_options(const SolverArgs& s) {
  SolverOptions o;
  o.max_mm_iterations = s.max_iter;
  o.max_cd_sweeps = s.max_sweeps;
  o.mm_tolerance = s.mm_tol;
  o.cd_tolerance = s.cd_tol;
  o.kkt_tolerance = s.kkt_tol;
  o.eta_inflation = s.eta_inflation;
  o.validate();
  return o;
}

LoadedData read_data(const DataArgs& d) {
  TabularInput in;
  in.path = d.path;
  in.delimiter = parse_delimiter(d.delimiter);
  in.header = !d.no_header;
  in.label_name = d.label;
  in.na_policy = na_policy_from_string(d.na);
  if (!d.positive.empty()) in.positive = d.positive;
  in.standardize = d.standardize;
  LoadedData loaded = load_dataset(in);
  loaded.data.require_nondegenerate();
  return loaded;
}

HingeSpec hinge_spec(const Args& a) {
  HingeSpec h{a.hinge_t};
  h.validate();
  return h;
}

// Writes to the named file, or to `fallback` for "-".
void emit(const std::string& target, std::ostream& fallback,
          const std::function<void(std::ostream&)>& body) {
  if (target.empty() || target == "-") {
    body(fallback);
    fallback.flush();
    return;
  }
  std::ofstream f(target, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write '" + target + "'");
  body(f);
  if (!f) throw DataError("failed writing '" + target + "'");
}

Json names_json(const LoadedData& d) {
  Json names = Json::array();
  for (const auto& s : d.feature_names) names.push_back(s);
  return names;
}

LambdaGrid grid_for(const Args& a, const Dataset& data, const SmoothLoss& loss) {
  if (!a.lambdas.empty()) {
    LambdaGrid g;
    g.values = a.lambdas;
    for (double v : g.values)
      if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("lambda values must be finite and >= 0");
    std::sort(g.values.begin(), g.values.end(), std::greater<>());
    g.values.erase(std::unique(g.values.begin(), g.values.end()), g.values.end());
    g.count = g.values.size();
    g.epsilon = g.values.front() > 0.0 ? g.values.back() / g.values.front() : 0.0;
    return g;
  }
  if (a.alpha <= 0.0 || a.alpha > 1.0)
    throw ConfigError("a generated grid needs alpha in (0, 1]; pass --lambda values for ridge paths");
  return lambda_grid(lambda_max(data, a.alpha, loss), a.eps, a.nlambda);
}

int run_fit(const Args& a, std::ostream& out, std::ostream& err) {
  LossKind kind = loss_kind_from_string(a.loss);
  SolverOptions opts = solver_options(a.solver);
  HingeSpec hinge = hinge_spec(a);
  PenaltySpec penalty(a.lambda, a.alpha);
  LoadedData loaded = read_data(a.data);
  const Dataset& data = loaded.data;

  Coefficients init;
  if (kind == LossKind::L2E) {
    std::size_t k = a.top_k == 0 ? static_cast<std::size_t>(std::min(data.n(), data.p())) : a.top_k;
    init = init_heuristic(data, k);
  } else {
    init = null_coefficients(data, kind, hinge);
  }
  FitResult fit = fit_estimator(data, SmoothLoss(kind, hinge), penalty, init, opts);

  Json j = to_json(fit, &data);
  if (kind == LossKind::HHSVM) j["hinge_t"] = hinge.t;
  j["n"] = data.n();
  j["p"] = data.p();
  j["features"] = names_json(loaded);
  emit(a.out, out, [&](std::ostream& s) { s << dump_json(j); });

  if (!fit.diagnostics.converged) {
    err << "warning: fit did not converge after " << fit.diagnostics.iterations
        << " iterations (KKT violation " << format_double(fit.diagnostics.kkt_max_violation)
        << ")\n";
    if (a.strict) return kExitNonConvergence;
  }
  return kExitOk;
}

int run_path(const Args& a, std::ostream& out, std::ostream& err) {
  LossKind kind = loss_kind_from_string(a.loss);
  SolverOptions opts = solver_options(a.solver);
  HingeSpec hinge = hinge_spec(a);
  PenaltySpec(0.0, a.alpha);  // validates alpha
  LoadedData loaded = read_data(a.data);
  const Dataset& data = loaded.data;
  SmoothLoss loss(kind, hinge);
  LambdaGrid grid = grid_for(a, data, loss);

  PathOptions popts;
  popts.top_k = a.top_k;
  popts.hinge = hinge;
  if (a.traversal == "increasing") popts.traversal = Traversal::Increasing;
  if (a.traversal == "decreasing") popts.traversal = Traversal::Decreasing;

  std::vector<RegularizationPath> paths;
  if (a.both_directions) {
    for (Traversal t : {Traversal::Increasing, Traversal::Decreasing}) {
      popts.traversal = t;
      paths.push_back(fit_path(data, a.alpha, grid, kind, opts, popts));
    }
  } else {
    paths.push_back(fit_path(data, a.alpha, grid, kind, opts, popts));
  }

  // With both directions every table gains a leading traversal column.
  auto tabulate = [&](std::ostream& s, auto&& writer) {
    if (!a.both_directions) return writer(s, paths.front());
    bool first = true;
    for (const auto& p : paths) {
      std::ostringstream buf;
      writer(buf, p);
      std::istringstream lines(buf.str());
      std::string line;
      std::getline(lines, line);
      if (first) s << "traversal\t" << line << '\n';
      first = false;
      while (std::getline(lines, line)) s << to_string(p.traversal) << '\t' << line << '\n';
    }
  };
  emit(a.out, out, [&](std::ostream& s) {
    tabulate(s, [](std::ostream& o, const RegularizationPath& p) { write_path_tsv(o, p); });
  });
  if (!a.plot.empty())
    emit(a.plot, out, [&](std::ostream& s) {
      tabulate(s, [](std::ostream& o, const RegularizationPath& p) { emit_plot_data(o, p); });
    });

  int bad = 0;
  std::size_t total = 0;
  for (const auto& p : paths) {
    total += p.records.size();
    for (const auto& rec : p.records) bad += rec.diagnostics.converged ? 0 : 1;
  }
  if (bad > 0) {
    err << "warning: " << bad << " of " << total << " path fits did not converge\n";
    if (a.strict) return kExitNonConvergence;
  }
  return kExitOk;
}

int run_cv(const Args& a, std::ostream& out, std::ostream& err) {
  LossKind kind = loss_kind_from_string(a.loss);
  SolverOptions opts = solver_options(a.solver);
  HingeSpec hinge = hinge_spec(a);
  PenaltySpec(0.0, a.alpha);
  LoadedData loaded = read_data(a.data);
  const Dataset& data = loaded.data;
  SmoothLoss loss(kind, hinge);
  LambdaGrid grid = grid_for(a, data, loss);

  CvOptions cv;
  cv.folds = a.folds;
  cv.seed = a.seed;
  cv.loss_kind = kind;
  cv.hinge = hinge;
  cv.lambda_refit = a.lambda_refit;
  cv.top_k = a.top_k;
  cv.rule = selection_rule_from_string(a.rule);
  cv.threads = std::max(1u, a.threads);
  if (cv.folds < 2) throw ConfigError("need at least 2 folds");
  if (cv.folds > static_cast<std::size_t>(data.n()))
    throw ConfigError("more folds than observations");
  CVResult res = robust_cv(data, a.alpha, grid, cv, opts);

  Json j = to_json(res, &data);
  if (kind == LossKind::HHSVM) j["hinge_t"] = hinge.t;
  j["features"] = names_json(loaded);
  emit(a.out, out, [&](std::ostream& s) { s << dump_json(j); });
  if (!a.plot.empty()) emit(a.plot, out, [&](std::ostream& s) { emit_plot_data(s, res); });

  if (res.nonconverged > 0) {
    err << "warning: " << res.nonconverged << " fits did not converge during cross-validation\n";
    if (a.strict) return kExitNonConvergence;
  }
  return kExitOk;
}

int run_simulate(const Args& a, std::ostream& out, std::ostream& err) {
  ScenarioSpec spec;
  spec.kind = scenario_kind_from_string(a.scenario);
  spec.shift = a.shift;
  spec.outliers = a.outliers;
  spec.seed = a.seed;
  if (a.outliers < 0) throw ConfigError("outlier count must be >= 0");
  if (a.replicates < 1) throw ConfigError("need at least one replicate");

  ExperimentOptions opts;
  opts.replicates = a.replicates;
  opts.seed = a.seed;
  opts.solver = solver_options(a.solver);
  opts.threads = std::max(1u, a.threads);
  opts.hinge = hinge_spec(a);
  opts.rule = selection_rule_from_string(a.rule);
  opts.folds = a.folds;
  opts.nlambda = a.nlambda;
  opts.epsilon = a.eps;
  if (a.alpha_set) opts.alpha = a.alpha;
  if (a.top_k > 0) opts.top_k = a.top_k;
  if (!a.estimators.empty()) {
    opts.estimators.clear();
    for (const auto& e : a.estimators) opts.estimators.push_back(loss_kind_from_string(e));
  } else if (spec.kind == ScenarioKind::HighDimSelection) {
    opts.estimators = {LossKind::MLE, LossKind::L2E, LossKind::HHSVM};
  }
  ReplicateReport report = run_experiment(spec, opts);

  emit(a.out, out, [&](std::ostream& s) { s << dump_json(to_json(report)); });
  if (!a.tsv.empty()) emit(a.tsv, out, [&](std::ostream& s) { write_report_tsv(s, report); });

  int bad = 0;
  for (const auto& e : report.estimators) bad += e.nonconverged;
  if (bad > 0) {
    err << "warning: " << bad << " replicate fits did not converge\n";
    if (a.strict) return kExitNonConvergence;
  }
  return kExitOk;
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv) {
  return cli_dispatch(argc, argv, std::cout, std::cerr);
}

int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robust sparse logistic regression by the L2 criterion"};
  app.name("l2elogit");
  app.require_subcommand(1);
  Args a;

  auto* fit = app.add_subcommand("fit", "Single (lambda, alpha) fit; JSON output");
  add_data_options(fit, a.data);
  add_model_options(fit, a);
  fit->add_option("--lambda", a.lambda, "Penalty level");
  add_solver_options(fit, a.solver);
  add_output_options(fit, a);

  auto add_grid = [&](CLI::App* cmd) {
    auto* lam = cmd->add_option("--lambda", a.lambdas, "Explicit penalty values (comma separated)")
                    ->delimiter(',');
    auto* nl = cmd->add_option("--nlambda", a.nlambda, "Grid size")->check(CLI::PositiveNumber);
    auto* ep = cmd->add_option("--eps", a.eps, "Smallest lambda as a fraction of lambda_max")
                   ->check(CLI::Range(std::numeric_limits<double>::min(), 1.0));
    lam->excludes(nl);
    lam->excludes(ep);
  };

  auto* path = app.add_subcommand("path", "Regularization path; TSV output");
  add_data_options(path, a.data);
  add_model_options(path, a);
  add_grid(path);
  auto* trav = path->add_option("--traversal", a.traversal,
                                "Override the fitting direction along the grid")
                   ->check(CLI::IsMember({"increasing", "decreasing"}));
  path->add_flag("--both-directions", a.both_directions,
                 "Fit the grid in both directions and report both paths")
      ->excludes(trav);
  path->add_option("--plot", a.plot, "Also write plot data (lambda, l1 norm, index, value)");
  add_solver_options(path, a.solver);
  add_output_options(path, a);

  auto* cv = app.add_subcommand("cv", "Robust cross-validation; JSON output");
  add_data_options(cv, a.data);
  add_model_options(cv, a);
  add_grid(cv);
  cv->add_option("--folds", a.folds, "Number of folds");
  cv->add_option("--seed", a.seed, "Fold assignment seed");
  cv->add_option("--threads", a.threads, "Worker threads");
  cv->add_option("--rule", a.rule, "Selection rule")->check(CLI::IsMember({"min", "one_mad"}));
  cv->add_option("--lambda-refit", a.lambda_refit, "Ridge level of the support refit");
  cv->add_option("--plot", a.plot, "Also write the criterion with its MAD band");
  add_solver_options(cv, a.solver);
  add_output_options(cv, a);

  auto* sim = app.add_subcommand("simulate", "Simulation scenarios; JSON report");
  sim->add_option("--scenario", a.scenario, "Scenario")
      ->check(CLI::IsMember({"low-dim-shift", "low-dim-count", "high-dim"}));
  sim->add_option("--shift", a.shift, "Outlier position for low-dim-shift");
  sim->add_option("--outliers", a.outliers, "Outlier count for low-dim-count");
  sim->add_option("--replicates", a.replicates, "Number of replicates");
  sim->add_option("--seed", a.seed, "Master seed");
  sim->add_option("--threads", a.threads, "Worker threads");
  sim->add_option("--estimators", a.estimators, "Estimators (comma separated)")
      ->delimiter(',')
      ->check(CLI::IsMember({"l2e", "mle", "hhsvm"}));
  auto* sim_alpha = sim->add_option("--alpha", a.alpha, "Elastic Net mixing weight (high-dim)");
  sim->add_option("--nlambda", a.nlambda, "Grid size (high-dim)")->check(CLI::PositiveNumber);
  sim->add_option("--eps", a.eps, "Grid ratio (high-dim)");
  sim->add_option("--folds", a.folds, "Folds (high-dim)");
  sim->add_option("--top-k", a.top_k, "Heuristic start size for L2E (high-dim)");
  sim->add_option("--rule", a.rule, "Selection rule")->check(CLI::IsMember({"min", "one_mad"}));
  sim->add_option("--hinge-t", a.hinge_t, "Knee of the smooth hinge");
  sim->add_option("--tsv", a.tsv, "Also write a long-format TSV summary");
  add_solver_options(sim, a.solver);
  add_output_options(sim, a);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }
  a.alpha_set = sim_alpha->count() > 0;

  try {
    if (*fit) return run_fit(a, out, err);
    if (*path) return run_path(a, out, err);
    if (*cv) return run_cv(a, out, err);
    return run_simulate(a, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace l2e
