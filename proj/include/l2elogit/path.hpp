#pragma once

#include "l2elogit/baselines.hpp"
#include "l2elogit/loss.hpp"
#include "l2elogit/mm_solver.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace l2e {

/// Smallest lambda at which the null-initialized L2E fit keeps beta = 0:
///   (2 / (n alpha)) ybar (1 - ybar) max_j |x_j' y|.
double lambda_max(const Dataset& data, double alpha);

/// Same threshold for any loss: max_j |d loss / d beta_j| at the null model, over alpha.
double lambda_max(const Dataset& data, double alpha, const SmoothLoss& loss);

/// Log-spaced penalty values, stored in decreasing order.
struct LambdaGrid {
  std::vector<double> values;
  double epsilon = 0.05;
  std::size_t count = 100;

  double max() const { return values.front(); }
  double min() const { return values.back(); }
};

LambdaGrid lambda_grid(double lmax, double epsilon = 0.05, std::size_t count = 100);

/// Null-model scores |x_j' G0 (y - ybar 1)| with G0 = ybar (1 - ybar) I.
Vector heuristic_scores(const Dataset& data);

/// beta0 = logit(ybar), beta_j = 1 on the top_k scores (ties to the lower index), 0 elsewhere.
Coefficients init_heuristic(const Dataset& data, std::size_t top_k);

enum class Traversal { Increasing, Decreasing };

std::string to_string(Traversal t);

struct PathRecord {
  double lambda = 0.0;
  Coefficients coefficients;
  FitDiagnostics diagnostics;

  double objective() const {
    return diagnostics.objective_trace.empty() ? 0.0 : diagnostics.objective_trace.back();
  }
};

/// Records are always stored in decreasing lambda order regardless of the
/// order in which they were computed.
struct RegularizationPath {
  std::vector<PathRecord> records;
  double alpha = 1.0;
  LossKind loss_kind = LossKind::L2E;
  Traversal traversal = Traversal::Increasing;
};

struct PathOptions {
  /// Heuristic support size for the first L2E fit; 0 means min(n, p).
  std::size_t top_k = 0;
  HingeSpec hinge;
  /// Overrides the default direction (increasing for L2E, decreasing otherwise).
  std::optional<Traversal> traversal;
  /// Overrides the default first-fit initialization.
  std::optional<Coefficients> init;
};

/// Default traversal: L2E goes from the smallest lambda up, the convex
/// baselines go from lambda_max down. Each fit warm-starts from its neighbor.
RegularizationPath fit_path(const Dataset& data, double alpha, const LambdaGrid& grid,
                            LossKind kind, const SolverOptions& opts = {},
                            const PathOptions& path_opts = {});

/// Ridge (alpha = 0) refit restricted to `support`; off-support entries are 0.
/// An empty support gives the intercept-only model.
Coefficients refit_on_support(const Dataset& data, const std::vector<Index>& support,
                              double lambda_refit, const SolverOptions& opts = {},
                              LossKind kind = LossKind::L2E, const HingeSpec& hinge = {},
                              const std::optional<Coefficients>& init = std::nullopt);

/// refit_on_support with the solver diagnostics of the reduced fit.
FitResult refit_support_fit(const Dataset& data, const std::vector<Index>& support,
                            double lambda_refit, const SolverOptions& opts = {},
                            LossKind kind = LossKind::L2E, const HingeSpec& hinge = {},
                            const std::optional<Coefficients>& init = std::nullopt);

enum class SelectionRule { Min, OneMad };

std::string to_string(SelectionRule rule);
SelectionRule selection_rule_from_string(const std::string& name);

struct CvOptions {
  std::size_t folds = 10;
  std::uint64_t seed = 1;
  LossKind loss_kind = LossKind::L2E;
  HingeSpec hinge;
  /// Ridge level of the support refit; <= 0 means 1e-4 * grid.max().
  double lambda_refit = 0.0;
  std::size_t top_k = 0;
  SelectionRule rule = SelectionRule::Min;
  unsigned threads = 1;
};

constexpr double kMadScale = 1.4826;

struct CVResult {
  std::vector<double> lambdas;  // decreasing
  std::size_t folds = 0;
  std::uint64_t seed = 0;
  int assignment_attempts = 1;
  std::vector<int> fold_of;  // fold index per observation
  /// discrepancies[f] is (held-out rows of fold f) x (lambdas).
  std::vector<Matrix> discrepancies;
  Matrix fold_medians;             // folds x lambdas
  std::vector<double> criterion;   // median over folds of fold_medians
  std::vector<double> mad;         // kMadScale * MAD over folds
  std::size_t index_min = 0;
  std::size_t index_one_mad = 0;
  SelectionRule rule = SelectionRule::Min;
  double lambda_star = 0.0;
  double lambda_refit = 0.0;

  // Model refit on the full data at lambda_star.
  Coefficients penalized;
  Coefficients penalized_min;       // full-data fit at lambdas[index_min]
  Coefficients penalized_one_mad;   // full-data fit at lambdas[index_one_mad]
  std::vector<Index> support;
  Coefficients refit;
  LossKind loss_kind = LossKind::L2E;
  double alpha = 1.0;
  /// Fits (fold paths, refits, full path) that hit an iteration limit.
  int nonconverged = 0;
};

/// K-fold robust cross-validation: fit the path on each training part,
/// refit each support with a ridge penalty, score held-out observations by
/// their discrepancy, and pick the lambda minimizing the median over folds of
/// the median held-out discrepancy (ties to the larger lambda).
CVResult robust_cv(const Dataset& data, double alpha, const LambdaGrid& grid,
                   const CvOptions& cv = {}, const SolverOptions& opts = {});

/// Stratified fold labels; deterministic in seed.
std::vector<int> assign_folds(const Vector& y, std::size_t folds, std::uint64_t seed);

double median(std::vector<double> values);

}  // namespace l2e
