#include "l2elogit/sim.hpp"

#include "l2elogit/baselines.hpp"
#include "l2elogit/model.hpp"
#include "l2elogit/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace l2e {

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::LowDimShift:
      return "low-dim-shift";
    case ScenarioKind::LowDimCount:
      return "low-dim-count";
    case ScenarioKind::HighDimSelection:
      return "high-dim";
  }
  return "unknown";
}

ScenarioKind scenario_kind_from_string(const std::string& name) {
  if (name == "low-dim-shift") return ScenarioKind::LowDimShift;
  if (name == "low-dim-count") return ScenarioKind::LowDimCount;
  if (name == "high-dim") return ScenarioKind::HighDimSelection;
  throw ConfigError("unknown scenario '" + name +
                    "' (expected low-dim-shift, low-dim-count or high-dim)");
}

bool ScenarioSpec::custom() const {
  switch (kind) {
    case ScenarioKind::LowDimShift:
      return std::find(std::begin(kShiftValues), std::end(kShiftValues), shift) ==
             std::end(kShiftValues);
    case ScenarioKind::LowDimCount:
      return std::find(std::begin(kOutlierCounts), std::end(kOutlierCounts), outliers) ==
             std::end(kOutlierCounts);
    case ScenarioKind::HighDimSelection:
      return false;
  }
  return true;
}

std::mt19937_64 replicate_engine(std::uint64_t seed, std::uint64_t replicate) {
  // splitmix64 finalizer over (seed, replicate)
  auto mix = [](std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  };
  std::uint64_t a = mix(seed);
  std::uint64_t b = mix(a ^ mix(replicate + 0x632BE59BD9B4E019ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

SimulatedData gen_low_dim(const ScenarioSpec& spec) {
  if (spec.kind == ScenarioKind::HighDimSelection)
    throw ConfigError("gen_low_dim called with a high-dimensional scenario");
  if (spec.outliers < 0) throw ConfigError("outlier count must be >= 0");
  constexpr Index clean = 200;
  constexpr Index p = 4;
  const Vector beta = (Vector(p) << 1.0, 0.5, 1.0, 2.0).finished();
  const int extra = spec.kind == ScenarioKind::LowDimShift ? 1 : spec.outliers;
  const double where = spec.kind == ScenarioKind::LowDimShift ? spec.shift : 3.0;

  auto rng = replicate_engine(spec.seed, static_cast<std::uint64_t>(spec.replicate));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double sd = 0.4;  // variance 0.16

  Matrix x(clean + extra, p);
  Vector y(clean + extra);
  for (Index i = 0; i < clean; ++i) {
    const double mu = i < clean / 2 ? 0.25 : -0.25;
    for (Index j = 0; j < p; ++j) x(i, j) = mu + sd * normal(rng);
    y[i] = unif(rng) < logistic(x.row(i).dot(beta)) ? 1.0 : 0.0;
  }
  for (Index i = clean; i < clean + extra; ++i) {
    x.row(i).setConstant(where);
    y[i] = 0.0;
  }
  SimulatedData out;
  out.data = Dataset::from_raw(x, y);
  out.truth = Coefficients(0.0, beta);
  out.contaminated.assign(static_cast<std::size_t>(clean + extra), false);
  for (Index i = clean; i < clean + extra; ++i) out.contaminated[static_cast<std::size_t>(i)] = true;
  out.true_support = {0, 1, 2, 3};
  return out;
}

SimulatedData gen_high_dim(std::uint64_t seed, int replicate) {
  constexpr Index n = 500;
  constexpr Index p = 500;
  constexpr Index relevant = 50;
  auto rng = replicate_engine(seed, static_cast<std::uint64_t>(replicate));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double sd_clean = std::sqrt(0.75);
  const double sd_out = 0.5;  // variance 0.25

  Vector beta = Vector::Zero(p);
  beta.head(relevant).setOnes();
  Matrix x(n, p);
  Vector y(n);
  for (Index i = 0; i < n; ++i) {
    const bool outlier = i >= 400;
    const double sign = i < 200 ? 1.0 : -1.0;
    for (Index j = 0; j < p; ++j) {
      double center = 0.0;
      if (j < relevant) center = outlier ? 1.0 : 0.3 * sign;
      x(i, j) = center + (outlier ? sd_out : sd_clean) * normal(rng);
    }
    if (outlier)
      y[i] = 0.0;
    else
      y[i] = unif(rng) < logistic(x.row(i).dot(beta)) ? 1.0 : 0.0;
  }
  SimulatedData out;
  out.data = Dataset::from_raw(x, y);
  out.truth = Coefficients(0.0, beta);
  out.contaminated.assign(static_cast<std::size_t>(n), false);
  for (Index i = 400; i < n; ++i) out.contaminated[static_cast<std::size_t>(i)] = true;
  for (Index j = 0; j < relevant; ++j) out.true_support.push_back(j);
  return out;
}

CoefficientSummary coef_summary(const std::vector<Coefficients>& fits, const Coefficients& truth) {
  if (fits.empty()) throw Error("coef_summary needs at least one fit");
  const Index p = truth.size();
  const std::size_t dim = static_cast<std::size_t>(p) + 1;
  const double m = static_cast<double>(fits.size());
  CoefficientSummary s;
  s.mean.assign(dim, 0.0);
  s.std.assign(dim, 0.0);
  s.mse.assign(dim, 0.0);
  auto entry = [](const Coefficients& c, std::size_t k) {
    return k == 0 ? c.beta0 : c.beta[static_cast<Index>(k - 1)];
  };
  for (const auto& f : fits) {
    if (f.size() != p) throw DimensionError("coef_summary: fit has the wrong length");
    for (std::size_t k = 0; k < dim; ++k) {
      const double v = entry(f, k);
      const double err = v - entry(truth, k);
      s.mean[k] += v / m;
      s.mse[k] += err * err / m;
    }
    s.norms.push_back(f.beta.norm());
  }
  if (fits.size() > 1) {
    for (const auto& f : fits)
      for (std::size_t k = 0; k < dim; ++k) {
        const double d = entry(f, k) - s.mean[k];
        s.std[k] += d * d / (m - 1.0);
      }
    for (double& v : s.std) v = std::sqrt(v);
  }
  for (double v : s.norms) s.norm_mean += v / m;
  if (fits.size() > 1) {
    for (double v : s.norms) s.norm_std += (v - s.norm_mean) * (v - s.norm_mean) / (m - 1.0);
    s.norm_std = std::sqrt(s.norm_std);
  }
  return s;
}

SelectionCounts selection_counts(const Coefficients& fit, std::span<const Index> true_support) {
  std::vector<bool> truth(static_cast<std::size_t>(fit.size()), false);
  for (Index j : true_support) {
    if (j < 0 || j >= fit.size()) throw DimensionError("true support index out of range");
    truth[static_cast<std::size_t>(j)] = true;
  }
  SelectionCounts c;
  for (Index j = 0; j < fit.size(); ++j) {
    const bool selected = fit.beta[j] != 0.0;
    const bool relevant = truth[static_cast<std::size_t>(j)];
    if (selected && relevant) ++c.tp;
    if (selected && !relevant) ++c.fp;
    if (!selected && relevant) ++c.fn;
    if (!selected && !relevant) ++c.tn;
  }
  return c;
}

const EstimatorReport& ReplicateReport::estimator(LossKind kind) const {
  for (const auto& e : estimators)
    if (e.kind == kind) return e;
  throw Error("report has no estimator '" + to_string(kind) + "'");
}

FitResult fit_low_dim(const Dataset& data, LossKind kind, const SolverOptions& opts) {
  SmoothLoss loss(kind);
  Coefficients init = kind == LossKind::L2E
                          ? init_heuristic(data, static_cast<std::size_t>(data.p()))
                          : null_coefficients(data, kind);
  try {
    return fit_mm(data, loss, PenaltySpec(0.0, 0.0), init, opts);
  } catch (const RankDeficientError&) {
    return fit_mm(data, loss, PenaltySpec(1e-8, 0.0), init, opts);
  }
}

ReplicateReport run_experiment(const ScenarioSpec& spec, const ExperimentOptions& opts) {
  if (opts.replicates < 1) throw ConfigError("replicates must be >= 1");
  if (opts.estimators.empty()) throw ConfigError("no estimators requested");
  ReplicateReport report;
  report.spec = spec;
  report.replicates = opts.replicates;
  const auto reps = static_cast<std::size_t>(opts.replicates);
  const std::size_t kinds = opts.estimators.size();
  const bool high = spec.kind == ScenarioKind::HighDimSelection;

  if (high) {
    report.truth = Coefficients(0.0, Vector::Zero(500));
    report.truth.beta.head(50).setOnes();
  } else {
    report.truth = Coefficients(0.0, (Vector(4) << 1.0, 0.5, 1.0, 2.0).finished());
  }
  report.estimators.resize(kinds);
  for (std::size_t e = 0; e < kinds; ++e) {
    auto& er = report.estimators[e];
    er.kind = opts.estimators[e];
    er.fits.resize(reps);
    er.converged.assign(reps, false);
    if (high) {
      er.selection.resize(reps);
      er.selection_min.resize(reps);
      er.selection_one_mad.resize(reps);
      er.lambda_min.resize(reps);
      er.lambda_one_mad.resize(reps);
    }
  }

  parallel_for(reps, opts.threads, [&](std::size_t r) {
    ScenarioSpec rs = spec;
    rs.replicate = spec.replicate + static_cast<int>(r);
    SimulatedData sim = high ? gen_high_dim(spec.seed, rs.replicate) : gen_low_dim(rs);
    for (std::size_t e = 0; e < kinds; ++e) {
      auto& er = report.estimators[e];
      if (!high) {
        FitResult fit = fit_low_dim(sim.data, er.kind, opts.solver);
        er.fits[r] = sim.data.to_original_scale(fit.coefficients);
        er.converged[r] = fit.diagnostics.converged;
        continue;
      }
      SmoothLoss loss(er.kind, opts.hinge);
      LambdaGrid grid = lambda_grid(lambda_max(sim.data, opts.alpha, loss), opts.epsilon, opts.nlambda);
      CvOptions cv;
      cv.folds = opts.folds;
      cv.seed = replicate_engine(spec.seed ^ 0xC0FFEEULL, static_cast<std::uint64_t>(rs.replicate))();
      cv.loss_kind = er.kind;
      cv.hinge = opts.hinge;
      cv.top_k = std::min<std::size_t>(opts.top_k, static_cast<std::size_t>(sim.data.p()));
      cv.rule = opts.rule;
      CVResult res = robust_cv(sim.data, opts.alpha, grid, cv, opts.solver);
      er.fits[r] = sim.data.to_original_scale(res.refit);
      er.converged[r] = res.nonconverged == 0;
      er.selection[r] = selection_counts(res.penalized, sim.true_support);
      er.selection_min[r] = selection_counts(res.penalized_min, sim.true_support);
      er.selection_one_mad[r] = selection_counts(res.penalized_one_mad, sim.true_support);
      er.lambda_min[r] = res.lambdas[res.index_min];
      er.lambda_one_mad[r] = res.lambdas[res.index_one_mad];
    }
  });

  for (auto& er : report.estimators) {
    er.nonconverged = static_cast<int>(std::count(er.converged.begin(), er.converged.end(), false));
    er.summary = coef_summary(er.fits, report.truth);
  }
  return report;
}

}  // namespace l2e
