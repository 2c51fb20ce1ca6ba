#include "l2elogit/path.hpp"

#include "l2elogit/model.hpp"
#include "l2elogit/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace l2e {

double lambda_max(const Dataset& data, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw ConfigError("lambda_max needs alpha in (0, 1]; no finite lambda zeroes a ridge fit");
  data.require_nondegenerate();
  const double n = static_cast<double>(data.n());
  const double ybar = data.y_mean();
  const double score = (data.x().transpose() * data.y()).cwiseAbs().maxCoeff();
  return 2.0 / (n * alpha) * ybar * (1.0 - ybar) * score;
}

double lambda_max(const Dataset& data, double alpha, const SmoothLoss& loss) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw ConfigError("lambda_max needs alpha in (0, 1]; no finite lambda zeroes a ridge fit");
  Coefficients null = null_coefficients(data, loss.kind(), loss.hinge());
  Vector u = Vector::Constant(data.n(), null.beta0);
  Vector z;
  loss.working_gradient(data.y(), u, z);
  const double n = static_cast<double>(data.n());
  return (data.x().transpose() * z).cwiseAbs().maxCoeff() / (n * alpha);
}

LambdaGrid lambda_grid(double lmax, double epsilon, std::size_t count) {
  if (!(lmax > 0.0) || !std::isfinite(lmax)) throw ConfigError("lambda_max must be positive");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must lie in (0, 1)");
  if (count < 2) throw ConfigError("lambda grid needs at least 2 points");
  LambdaGrid g;
  g.epsilon = epsilon;
  g.count = count;
  g.values.resize(count);
  const double step = std::log(epsilon) / static_cast<double>(count - 1);
  for (std::size_t k = 0; k < count; ++k)
    g.values[k] = lmax * std::exp(step * static_cast<double>(k));
  g.values.front() = lmax;
  g.values.back() = lmax * epsilon;
  return g;
}

Vector heuristic_scores(const Dataset& data) {
  data.require_nondegenerate();
  const double ybar = data.y_mean();
  Vector resid = (data.y().array() - ybar).matrix();
  return (ybar * (1.0 - ybar) * (data.x().transpose() * resid)).cwiseAbs();
}

Coefficients init_heuristic(const Dataset& data, std::size_t top_k) {
  if (top_k < 1 || top_k > static_cast<std::size_t>(data.p()))
    throw ConfigError("top_k must lie in [1, p]");
  Vector scores = heuristic_scores(data);
  std::vector<Index> order(static_cast<std::size_t>(data.p()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return scores[a] > scores[b]; });
  const double ybar = data.y_mean();
  Coefficients theta(std::log(ybar / (1.0 - ybar)), Vector::Zero(data.p()));
  for (std::size_t k = 0; k < top_k; ++k) theta.beta[order[k]] = 1.0;
  return theta;
}

std::string to_string(Traversal t) { return t == Traversal::Increasing ? "increasing" : "decreasing"; }

RegularizationPath fit_path(const Dataset& data, double alpha, const LambdaGrid& grid,
                            LossKind kind, const SolverOptions& opts,
                            const PathOptions& path_opts) {
  if (grid.values.empty()) throw ConfigError("empty lambda grid");
  for (std::size_t k = 1; k < grid.values.size(); ++k)
    if (!(grid.values[k] < grid.values[k - 1]))
      throw ConfigError("lambda grid must be strictly decreasing");
  SmoothLoss loss(kind, path_opts.hinge);

  RegularizationPath path;
  path.alpha = alpha;
  path.loss_kind = kind;
  path.traversal = path_opts.traversal.value_or(kind == LossKind::L2E ? Traversal::Increasing
                                                                       : Traversal::Decreasing);
  Coefficients current;
  if (path_opts.init) {
    current = *path_opts.init;
  } else if (kind == LossKind::L2E) {
    std::size_t k = path_opts.top_k ? path_opts.top_k
                                    : static_cast<std::size_t>(std::min(data.n(), data.p()));
    current = init_heuristic(data, k);
  } else {
    current = null_coefficients(data, kind, path_opts.hinge);
  }

  const std::size_t m = grid.values.size();
  path.records.resize(m);
  for (std::size_t step = 0; step < m; ++step) {
    const std::size_t k = path.traversal == Traversal::Increasing ? m - 1 - step : step;
    FitResult fit = fit_mm(data, loss, PenaltySpec(grid.values[k], alpha), current, opts);
    current = fit.coefficients;
    path.records[k] = {grid.values[k], std::move(fit.coefficients), std::move(fit.diagnostics)};
  }
  return path;
}

FitResult refit_support_fit(const Dataset& data, const std::vector<Index>& support,
                            double lambda_refit, const SolverOptions& opts, LossKind kind,
                            const HingeSpec& hinge, const std::optional<Coefficients>& init) {
  if (lambda_refit < 0.0) throw ConfigError("lambda_refit must be >= 0");
  FitResult out;
  out.loss_kind = kind;
  out.penalty = PenaltySpec(lambda_refit, 0.0);
  if (support.empty()) {
    out.coefficients = null_coefficients(data, kind, hinge);
    out.diagnostics.converged = true;
    return out;
  }
  Dataset reduced = data.subset_columns(support);
  Coefficients start = null_coefficients(data, kind, hinge);
  start.beta = Vector::Zero(static_cast<Index>(support.size()));
  if (init) {
    if (init->size() != data.p()) throw DimensionError("refit init has the wrong length");
    start.beta0 = init->beta0;
    for (std::size_t k = 0; k < support.size(); ++k)
      start.beta[static_cast<Index>(k)] = init->beta[support[k]];
  }
  SmoothLoss loss(kind, hinge);
  FitResult fit = opts.refit_solver == RefitSolver::Newton
                      ? fit_ridge_newton(reduced, loss, lambda_refit, start, opts)
                      : fit_mm(reduced, loss, out.penalty, start, opts);
  out.diagnostics = std::move(fit.diagnostics);
  out.coefficients = Coefficients(fit.coefficients.beta0, Vector::Zero(data.p()));
  for (std::size_t k = 0; k < support.size(); ++k)
    out.coefficients.beta[support[k]] = fit.coefficients.beta[static_cast<Index>(k)];
  return out;
}

Coefficients refit_on_support(const Dataset& data, const std::vector<Index>& support,
                              double lambda_refit, const SolverOptions& opts, LossKind kind,
                              const HingeSpec& hinge, const std::optional<Coefficients>& init) {
  return refit_support_fit(data, support, lambda_refit, opts, kind, hinge, init).coefficients;
}

std::string to_string(SelectionRule rule) { return rule == SelectionRule::Min ? "min" : "one_mad"; }

SelectionRule selection_rule_from_string(const std::string& name) {
  if (name == "min") return SelectionRule::Min;
  if (name == "one_mad" || name == "1mad") return SelectionRule::OneMad;
  throw ConfigError("unknown selection rule '" + name + "' (expected min or one_mad)");
}

double median(std::vector<double> values) {
  if (values.empty()) throw Error("median of an empty sequence");
  const std::size_t n = values.size();
  const std::size_t mid = n / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  double hi = values[mid];
  if (n % 2 == 1) return hi;
  double lo = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

std::vector<int> assign_folds(const Vector& y, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
  if (static_cast<std::size_t>(y.size()) < folds)
    throw DataError("fewer observations than folds");
  std::mt19937_64 rng(seed);
  std::vector<int> fold_of(static_cast<std::size_t>(y.size()), 0);
  std::size_t next = 0;
  for (double cls : {0.0, 1.0}) {
    std::vector<Index> rows;
    for (Index i = 0; i < y.size(); ++i)
      if (y[i] == cls) rows.push_back(i);
    std::shuffle(rows.begin(), rows.end(), rng);
    for (Index i : rows) fold_of[static_cast<std::size_t>(i)] = static_cast<int>(next++ % folds);
  }
  return fold_of;
}

namespace {

bool folds_usable(const Vector& y, const std::vector<int>& fold_of, std::size_t folds) {
  for (std::size_t f = 0; f < folds; ++f) {
    double ones = 0.0, count = 0.0, test = 0.0;
    for (Index i = 0; i < y.size(); ++i) {
      if (fold_of[static_cast<std::size_t>(i)] == static_cast<int>(f)) {
        test += 1.0;
        continue;
      }
      ones += y[i];
      count += 1.0;
    }
    if (test == 0.0 || count < 2.0 || ones == 0.0 || ones == count) return false;
  }
  return true;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t attempt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (attempt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

CVResult robust_cv(const Dataset& data, double alpha, const LambdaGrid& grid, const CvOptions& cv,
                   const SolverOptions& opts) {
  data.require_nondegenerate();
  if (grid.values.empty()) throw ConfigError("empty lambda grid");
  CVResult res;
  res.lambdas = grid.values;
  res.folds = cv.folds;
  res.seed = cv.seed;
  res.rule = cv.rule;
  res.loss_kind = cv.loss_kind;
  res.alpha = alpha;
  res.lambda_refit = cv.lambda_refit > 0.0 ? cv.lambda_refit : 1e-4 * grid.max();

  bool ok = false;
  for (int attempt = 0; attempt < 10 && !ok; ++attempt) {
    std::uint64_t s = attempt == 0 ? cv.seed : mix_seed(cv.seed, static_cast<std::uint64_t>(attempt));
    res.fold_of = assign_folds(data.y(), cv.folds, s);
    res.assignment_attempts = attempt + 1;
    ok = folds_usable(data.y(), res.fold_of, cv.folds);
  }
  if (!ok)
    throw DataError("could not find a fold assignment with both classes in every training part "
                    "after 10 attempts; use fewer folds");

  const std::size_t m = grid.values.size();
  const std::size_t folds = cv.folds;
  SmoothLoss loss(cv.loss_kind, cv.hinge);
  PathOptions popts;
  popts.top_k = cv.top_k;
  popts.hinge = cv.hinge;
  const Matrix raw = data.raw_x();

  res.discrepancies.resize(folds);
  std::vector<int> fold_nonconverged(folds, 0);
  res.fold_medians.resize(static_cast<Index>(folds), static_cast<Index>(m));

  parallel_for(folds, cv.threads, [&](std::size_t f) {
    std::vector<Index> train, test;
    for (Index i = 0; i < data.n(); ++i)
      (res.fold_of[static_cast<std::size_t>(i)] == static_cast<int>(f) ? test : train).push_back(i);
    Dataset part = data.subset_rows(train);
    Matrix test_x(static_cast<Index>(test.size()), data.p());
    for (std::size_t k = 0; k < test.size(); ++k) test_x.row(static_cast<Index>(k)) = raw.row(test[k]);

    RegularizationPath path = fit_path(part, alpha, grid, cv.loss_kind, opts, popts);
    int& bad = fold_nonconverged[f];
    for (const auto& rec : path.records) bad += rec.diagnostics.converged ? 0 : 1;
    Matrix& d = res.discrepancies[f];
    d.resize(static_cast<Index>(test.size()), static_cast<Index>(m));
    std::vector<Index> last_support;
    Coefficients last_refit;
    bool have_last = false;
    for (std::size_t k = 0; k < m; ++k) {
      std::vector<Index> support = path.records[k].coefficients.support();
      if (!have_last || support != last_support) {
        FitResult r = refit_support_fit(part, support, res.lambda_refit, opts, cv.loss_kind,
                                        cv.hinge, path.records[k].coefficients);
        bad += r.diagnostics.converged ? 0 : 1;
        last_refit = std::move(r.coefficients);
        last_support = std::move(support);
        have_last = true;
      }
      Vector u = part.predict_raw(test_x, last_refit);
      std::vector<double> col(test.size());
      for (std::size_t j = 0; j < test.size(); ++j) {
        double v = loss.discrepancy(data.y()[test[j]], u[static_cast<Index>(j)]);
        d(static_cast<Index>(j), static_cast<Index>(k)) = v;
        col[j] = v;
      }
      res.fold_medians(static_cast<Index>(f), static_cast<Index>(k)) = median(std::move(col));
    }
  });

  for (int b : fold_nonconverged) res.nonconverged += b;
  res.criterion.resize(m);
  res.mad.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    std::vector<double> med(folds);
    for (std::size_t f = 0; f < folds; ++f)
      med[f] = res.fold_medians(static_cast<Index>(f), static_cast<Index>(k));
    const double c = median(med);
    for (double& v : med) v = std::abs(v - c);
    res.criterion[k] = c;
    res.mad[k] = kMadScale * median(std::move(med));
  }
  // Grid is decreasing, so the first minimizer is the largest lambda.
  res.index_min = 0;
  for (std::size_t k = 1; k < m; ++k)
    if (res.criterion[k] < res.criterion[res.index_min]) res.index_min = k;
  const double bound = res.criterion[res.index_min] + res.mad[res.index_min];
  res.index_one_mad = res.index_min;
  for (std::size_t k = 0; k < res.index_min; ++k) {
    if (res.criterion[k] <= bound) {
      res.index_one_mad = k;
      break;
    }
  }
  const std::size_t chosen = cv.rule == SelectionRule::Min ? res.index_min : res.index_one_mad;
  res.lambda_star = grid.values[chosen];

  RegularizationPath full = fit_path(data, alpha, grid, cv.loss_kind, opts, popts);
  for (const auto& rec : full.records) res.nonconverged += rec.diagnostics.converged ? 0 : 1;
  res.penalized_min = full.records[res.index_min].coefficients;
  res.penalized_one_mad = full.records[res.index_one_mad].coefficients;
  res.penalized = full.records[chosen].coefficients;
  res.support = res.penalized.support();
  FitResult refit = refit_support_fit(data, res.support, res.lambda_refit, opts, cv.loss_kind,
                                      cv.hinge, res.penalized);
  res.nonconverged += refit.diagnostics.converged ? 0 : 1;
  res.refit = std::move(refit.coefficients);
  return res;
}

}  // namespace l2e
