#include "l2elogit/baselines.hpp"
#include "l2elogit/io.hpp"
#include "l2elogit/model.hpp"
#include "l2elogit/path.hpp"
#include "l2elogit/sim.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

namespace py = pybind11;
using namespace l2e;

namespace {

SolverOptions solver_options(int max_iter, double mm_tol, double kkt_tol) {
  SolverOptions o;
  o.max_mm_iterations = max_iter;
  o.mm_tolerance = mm_tol;
  o.kkt_tolerance = kkt_tol;
  o.validate();
  return o;
}

// Results cross the boundary as JSON text and are decoded on the Python side,
// so both surfaces share one schema.
std::string fit_json(const Matrix& x, const Vector& y, const std::string& loss, double lambda,
                     double alpha, double hinge_t, std::size_t top_k, bool standardize,
                     int max_iter, double mm_tol, double kkt_tol) {
  Dataset data = Dataset::from_raw(x, y, standardize);
  data.require_nondegenerate();
  LossKind kind = loss_kind_from_string(loss);
  HingeSpec hinge{hinge_t};
  Coefficients init;
  if (kind == LossKind::L2E) {
    std::size_t k = top_k ? top_k : static_cast<std::size_t>(std::min(data.n(), data.p()));
    init = init_heuristic(data, k);
  } else {
    init = null_coefficients(data, kind, hinge);
  }
  FitResult fit = fit_estimator(data, SmoothLoss(kind, hinge), PenaltySpec(lambda, alpha), init,
                                solver_options(max_iter, mm_tol, kkt_tol));
  return dump_json(to_json(fit, &data), -1);
}

py::dict path_dict(const Matrix& x, const Vector& y, const std::string& loss, double alpha,
                   std::size_t nlambda, double eps, std::optional<std::vector<double>> lambdas,
                   double hinge_t, std::size_t top_k, bool standardize, int max_iter,
                   double mm_tol, double kkt_tol) {
  Dataset data = Dataset::from_raw(x, y, standardize);
  LossKind kind = loss_kind_from_string(loss);
  HingeSpec hinge{hinge_t};
  LambdaGrid grid;
  if (lambdas) {
    grid.values = *lambdas;
    std::sort(grid.values.begin(), grid.values.end(), std::greater<>());
  } else {
    grid = lambda_grid(lambda_max(data, alpha, SmoothLoss(kind, hinge)), eps, nlambda);
  }
  PathOptions popts;
  popts.top_k = top_k;
  popts.hinge = hinge;
  RegularizationPath path =
      fit_path(data, alpha, grid, kind, solver_options(max_iter, mm_tol, kkt_tol), popts);

  const auto m = static_cast<Index>(path.records.size());
  Vector lam(m), b0(m), obj(m);
  Matrix beta(m, data.p());
  std::vector<bool> converged;
  for (Index k = 0; k < m; ++k) {
    const auto& rec = path.records[static_cast<std::size_t>(k)];
    lam[k] = rec.lambda;
    b0[k] = rec.coefficients.beta0;
    beta.row(k) = rec.coefficients.beta.transpose();
    obj[k] = rec.objective();
    converged.push_back(rec.diagnostics.converged);
  }
  py::dict d;
  d["lambda"] = lam;
  d["beta0"] = b0;
  d["beta"] = beta;
  d["objective"] = obj;
  d["converged"] = converged;
  d["traversal"] = to_string(path.traversal);
  return d;
}

std::string cv_json(const Matrix& x, const Vector& y, const std::string& loss, double alpha,
                    std::size_t nlambda, double eps, std::size_t folds, std::uint64_t seed,
                    const std::string& rule, double lambda_refit, double hinge_t,
                    std::size_t top_k, unsigned threads) {
  Dataset data = Dataset::from_raw(x, y);
  LossKind kind = loss_kind_from_string(loss);
  HingeSpec hinge{hinge_t};
  LambdaGrid grid = lambda_grid(lambda_max(data, alpha, SmoothLoss(kind, hinge)), eps, nlambda);
  CvOptions cv;
  cv.folds = folds;
  cv.seed = seed;
  cv.loss_kind = kind;
  cv.hinge = hinge;
  cv.rule = selection_rule_from_string(rule);
  cv.lambda_refit = lambda_refit;
  cv.top_k = top_k;
  cv.threads = threads;
  return dump_json(to_json(robust_cv(data, alpha, grid, cv), &data), -1);
}

py::tuple simulate_low_dim(const std::string& scenario, double shift, int outliers,
                           std::uint64_t seed, int replicate) {
  ScenarioSpec spec;
  spec.kind = scenario_kind_from_string(scenario);
  spec.shift = shift;
  spec.outliers = outliers;
  spec.seed = seed;
  spec.replicate = replicate;
  SimulatedData sim = spec.kind == ScenarioKind::HighDimSelection ? gen_high_dim(seed, replicate)
                                                                  : gen_low_dim(spec);
  std::vector<bool> mask = sim.contaminated;
  return py::make_tuple(sim.data.raw_x(), sim.data.y(), mask, sim.true_support);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Robust sparse logistic regression by the L2 criterion";

  py::register_exception<Error>(m, "L2EError", PyExc_RuntimeError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("curvature_bound", [] {
    EtaConstant c = curvature_bound();
    return py::make_tuple(c.value, c.q_star);
  });
  m.def("logistic", [](double u) { return logistic(u); });
  m.def("lambda_max",
        [](const Matrix& x, const Vector& y, double alpha, const std::string& loss) {
          Dataset data = Dataset::from_raw(x, y);
          return lambda_max(data, alpha, SmoothLoss(loss_kind_from_string(loss)));
        },
        py::arg("x"), py::arg("y"), py::arg("alpha"), py::arg("loss") = "l2e");
  m.def("lambda_grid",
        [](double lmax, double eps, std::size_t count) { return lambda_grid(lmax, eps, count).values; },
        py::arg("lmax"), py::arg("eps") = 0.05, py::arg("count") = 100);
  m.def("fit_json", &fit_json, py::arg("x"), py::arg("y"), py::arg("loss") = "l2e",
        py::arg("lam") = 0.0, py::arg("alpha") = 1.0, py::arg("hinge_t") = -1.0,
        py::arg("top_k") = 0, py::arg("standardize") = false, py::arg("max_iter") = 10000,
        py::arg("mm_tol") = 1e-8, py::arg("kkt_tol") = 1e-6,
        py::call_guard<py::gil_scoped_release>());
  m.def("path", &path_dict, py::arg("x"), py::arg("y"), py::arg("loss") = "l2e",
        py::arg("alpha") = 1.0, py::arg("nlambda") = 100, py::arg("eps") = 0.05,
        py::arg("lambdas") = py::none(), py::arg("hinge_t") = -1.0, py::arg("top_k") = 0,
        py::arg("standardize") = false, py::arg("max_iter") = 10000, py::arg("mm_tol") = 1e-8,
        py::arg("kkt_tol") = 1e-6);
  m.def("cv_json", &cv_json, py::arg("x"), py::arg("y"), py::arg("loss") = "l2e",
        py::arg("alpha") = 1.0, py::arg("nlambda") = 100, py::arg("eps") = 0.05,
        py::arg("folds") = 10, py::arg("seed") = 1, py::arg("rule") = "min",
        py::arg("lambda_refit") = 0.0, py::arg("hinge_t") = -1.0, py::arg("top_k") = 0,
        py::arg("threads") = 1, py::call_guard<py::gil_scoped_release>());
  m.def("simulate", &simulate_low_dim, py::arg("scenario") = "low-dim-shift",
        py::arg("shift") = 3.0, py::arg("outliers") = 1, py::arg("seed") = 1,
        py::arg("replicate") = 0);
}
