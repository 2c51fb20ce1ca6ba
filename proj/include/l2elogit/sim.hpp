#pragma once

#include "l2elogit/mm_solver.hpp"
#include "l2elogit/path.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace l2e {

enum class ScenarioKind { LowDimShift, LowDimCount, HighDimSelection };

std::string to_string(ScenarioKind kind);
ScenarioKind scenario_kind_from_string(const std::string& name);

/// Low-dimensional designs: 200 clean rows (n = 200, p = 4) plus outliers with
/// y = 0, either one at (shift, ..., shift) or `outliers` copies at (3, 3, 3, 3).
/// High-dimensional design: n = p = 500 with 100 contaminating rows.
struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::LowDimShift;
  double shift = 3.0;
  int outliers = 1;
  std::uint64_t seed = 1;
  int replicate = 0;

  /// True when the parameters fall outside the published sweep values.
  bool custom() const;
};

inline constexpr double kShiftValues[] = {-0.25, 1.5, 3.0, 6.0, 12.0, 24.0};
inline constexpr int kOutlierCounts[] = {0, 1, 5, 10, 15, 20};

struct SimulatedData {
  Dataset data;
  Coefficients truth;  // original scale
  std::vector<bool> contaminated;
  std::vector<Index> true_support;
};

/// Independent stream for (seed, replicate), unaffected by execution order.
std::mt19937_64 replicate_engine(std::uint64_t seed, std::uint64_t replicate);

SimulatedData gen_low_dim(const ScenarioSpec& spec);
SimulatedData gen_high_dim(std::uint64_t seed, int replicate = 0);

struct CoefficientSummary {
  // Index 0 is the intercept, then beta_1..beta_p.
  std::vector<double> mean;
  std::vector<double> std;
  std::vector<double> mse;
  std::vector<double> norms;  // |beta|_2 per fit, intercept excluded
  double norm_mean = 0.0;
  double norm_std = 0.0;
};

CoefficientSummary coef_summary(const std::vector<Coefficients>& fits, const Coefficients& truth);

struct SelectionCounts {
  int tp = 0;
  int fp = 0;
  int fn = 0;
  int tn = 0;
};

SelectionCounts selection_counts(const Coefficients& fit, std::span<const Index> true_support);

struct ExperimentOptions {
  std::vector<LossKind> estimators{LossKind::MLE, LossKind::L2E};
  int replicates = 1000;
  std::uint64_t seed = 1;
  SolverOptions solver;
  unsigned threads = 1;
  // High-dimensional selection settings.
  double alpha = 0.6;
  std::size_t nlambda = 100;
  double epsilon = 0.05;
  std::size_t folds = 10;
  std::size_t top_k = 100;
  SelectionRule rule = SelectionRule::Min;
  HingeSpec hinge;
};

struct EstimatorReport {
  LossKind kind = LossKind::L2E;
  std::vector<Coefficients> fits;  // original scale
  std::vector<bool> converged;
  CoefficientSummary summary;
  // High-dimensional runs only. `selection` follows the configured rule; the
  // min and 1-MAD variants are both kept.
  std::vector<SelectionCounts> selection;
  std::vector<SelectionCounts> selection_min;
  std::vector<SelectionCounts> selection_one_mad;
  std::vector<double> lambda_min;
  std::vector<double> lambda_one_mad;
  int nonconverged = 0;
};

struct ReplicateReport {
  ScenarioSpec spec;
  int replicates = 0;
  Coefficients truth;
  std::vector<EstimatorReport> estimators;

  const EstimatorReport& estimator(LossKind kind) const;
};

/// Unpenalized fits for the low-dimensional scenarios; robust-CV Elastic Net
/// selection for the high-dimensional one.
ReplicateReport run_experiment(const ScenarioSpec& spec, const ExperimentOptions& opts);

/// Fits one low-dimensional replicate: MLE from the null model, L2E from the
/// all-ones heuristic start. Falls back to a 1e-8 ridge when X'X is singular.
FitResult fit_low_dim(const Dataset& data, LossKind kind, const SolverOptions& opts);

}  // namespace l2e
