#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace l2e {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

enum class LossKind { L2E, MLE, HHSVM };

std::string to_string(LossKind kind);
LossKind loss_kind_from_string(const std::string& name);

// Error hierarchy. DataError covers anything wrong with the inputs themselves
// (degenerate labels, NaN, malformed files); the CLI maps it to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class RankDeficientError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Intercept plus coefficient vector, theta = (beta0, beta).
struct Coefficients {
  double beta0 = 0.0;
  Vector beta;

  Coefficients() = default;
  Coefficients(double b0, Vector b) : beta0(b0), beta(std::move(b)) {}
  static Coefficients zeros(Index p) { return {0.0, Vector::Zero(p)}; }

  Index size() const { return beta.size(); }
  bool all_finite() const;
  Index nonzero_count() const;
  std::vector<Index> support() const;
};

/// Elastic Net penalty lambda * (alpha |b|_1 + (1 - alpha)/2 |b|_2^2).
struct PenaltySpec {
  double lambda = 0.0;
  double alpha = 1.0;

  PenaltySpec() = default;
  PenaltySpec(double lam, double a);

  double value(const Vector& beta) const;
  double l1_weight() const { return lambda * alpha; }
  double l2_weight() const { return lambda * (1.0 - alpha); }
  void validate() const;
};

/// Centered design and binary responses. X columns sum to zero; the raw
/// column means (and optional scales) are kept for original-scale reporting.
class Dataset {
 public:
  Dataset() = default;

  /// Centers (and optionally scales to unit variance) the raw design.
  static Dataset from_raw(const Matrix& raw, const Vector& y, bool standardize = false);

  const Matrix& x() const { return x_; }
  const Vector& y() const { return y_; }
  const Vector& column_means() const { return means_; }
  const Vector& column_scales() const { return scales_; }
  const std::vector<bool>& constant_columns() const { return constant_; }
  bool standardized() const { return standardized_; }

  Index n() const { return x_.rows(); }
  Index p() const { return x_.cols(); }
  double y_mean() const;

  /// Throws DataError unless 0 < mean(y) < 1.
  void require_nondegenerate() const;

  /// Raw (uncentered, unscaled) design reconstructed from the stored parts.
  Matrix raw_x() const;

  /// Rows re-centered on their own means; used for CV training folds.
  Dataset subset_rows(std::span<const Index> rows) const;

  /// Columns kept as-is (already centered); used for support refits.
  Dataset subset_columns(std::span<const Index> cols) const;

  /// beta0 + x beta for raw covariate rows, using this dataset's centering.
  Vector predict_raw(const Matrix& raw_rows, const Coefficients& theta) const;

  /// Intercept and coefficients on the original covariate scale.
  Coefficients to_original_scale(const Coefficients& theta) const;

 private:
  Matrix x_;
  Vector y_;
  Vector means_;
  Vector scales_;
  std::vector<bool> constant_;
  bool standardized_ = false;
};

/// Per-fit trace and certificates.
struct FitDiagnostics {
  std::vector<double> objective_trace;
  int iterations = 0;
  bool converged = false;
  double kkt_max_violation = 0.0;
};

}  // namespace l2e
