#include "l2elogit/types.hpp"

#include <cmath>
#include <sstream>

namespace l2e {

std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::L2E:
      return "l2e";
    case LossKind::MLE:
      return "mle";
    case LossKind::HHSVM:
      return "hhsvm";
  }
  return "unknown";
}

LossKind loss_kind_from_string(const std::string& name) {
  if (name == "l2e") return LossKind::L2E;
  if (name == "mle") return LossKind::MLE;
  if (name == "hhsvm") return LossKind::HHSVM;
  throw ConfigError("unknown loss '" + name + "' (expected l2e, mle or hhsvm)");
}

bool Coefficients::all_finite() const { return std::isfinite(beta0) && beta.allFinite(); }

Index Coefficients::nonzero_count() const { return (beta.array() != 0.0).count(); }

std::vector<Index> Coefficients::support() const {
  std::vector<Index> s;
  for (Index j = 0; j < beta.size(); ++j)
    if (beta[j] != 0.0) s.push_back(j);
  return s;
}

PenaltySpec::PenaltySpec(double lam, double a) : lambda(lam), alpha(a) { validate(); }

void PenaltySpec::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw ConfigError("lambda must be finite and >= 0");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
}

double PenaltySpec::value(const Vector& beta) const {
  if (lambda == 0.0) return 0.0;
  return lambda * (alpha * beta.lpNorm<1>() + 0.5 * (1.0 - alpha) * beta.squaredNorm());
}

Dataset Dataset::from_raw(const Matrix& raw, const Vector& y, bool standardize) {
  if (raw.rows() != y.size())
    throw DimensionError("design has " + std::to_string(raw.rows()) + " rows but y has " +
                         std::to_string(y.size()) + " entries");
  if (raw.rows() < 2) throw DataError("need at least 2 observations");
  if (raw.cols() < 1) throw DataError("need at least 1 covariate");
  if (!raw.allFinite()) throw DataError("design contains NaN or infinite values");
  for (Index i = 0; i < y.size(); ++i) {
    if (y[i] != 0.0 && y[i] != 1.0) {
      std::ostringstream msg;
      msg << "label at row " << (i + 1) << " is " << y[i] << ", expected 0 or 1";
      throw DataError(msg.str());
    }
  }

  Dataset ds;
  ds.y_ = y;
  ds.means_ = raw.colwise().mean().transpose();
  ds.x_ = raw.rowwise() - ds.means_.transpose();
  ds.scales_ = Vector::Ones(raw.cols());
  ds.constant_.assign(static_cast<std::size_t>(raw.cols()), false);
  const double n = static_cast<double>(raw.rows());
  for (Index j = 0; j < raw.cols(); ++j) {
    double ss = ds.x_.col(j).squaredNorm();
    double scale = std::max(1.0, ds.means_[j] * ds.means_[j]);
    if (ss <= 1e-24 * n * scale) {
      ds.constant_[static_cast<std::size_t>(j)] = true;
      ds.x_.col(j).setZero();
    } else if (standardize) {
      double sd = std::sqrt(ss / n);
      ds.scales_[j] = sd;
      ds.x_.col(j) /= sd;
    }
  }
  ds.standardized_ = standardize;
  return ds;
}

double Dataset::y_mean() const { return y_.size() ? y_.mean() : 0.0; }

void Dataset::require_nondegenerate() const {
  double m = y_mean();
  if (!(m > 0.0 && m < 1.0))
    throw DataError("labels are degenerate (all observations belong to one class)");
}

Matrix Dataset::raw_x() const {
  Matrix raw = x_ * scales_.asDiagonal();
  raw.rowwise() += means_.transpose();
  return raw;
}

Dataset Dataset::subset_rows(std::span<const Index> rows) const {
  Matrix raw(static_cast<Index>(rows.size()), p());
  Vector y(static_cast<Index>(rows.size()));
  Matrix full = raw_x();
  for (std::size_t k = 0; k < rows.size(); ++k) {
    raw.row(static_cast<Index>(k)) = full.row(rows[k]);
    y[static_cast<Index>(k)] = y_[rows[k]];
  }
  return from_raw(raw, y, standardized_);
}

Dataset Dataset::subset_columns(std::span<const Index> cols) const {
  Dataset ds;
  const auto q = static_cast<Index>(cols.size());
  ds.x_.resize(n(), q);
  ds.means_.resize(q);
  ds.scales_.resize(q);
  ds.constant_.resize(cols.size());
  for (Index k = 0; k < q; ++k) {
    Index j = cols[static_cast<std::size_t>(k)];
    if (j < 0 || j >= p()) throw DimensionError("column index out of range");
    ds.x_.col(k) = x_.col(j);
    ds.means_[k] = means_[j];
    ds.scales_[k] = scales_[j];
    ds.constant_[static_cast<std::size_t>(k)] = constant_[static_cast<std::size_t>(j)];
  }
  ds.y_ = y_;
  ds.standardized_ = standardized_;
  return ds;
}

Vector Dataset::predict_raw(const Matrix& raw_rows, const Coefficients& theta) const {
  if (raw_rows.cols() != p() || theta.size() != p())
    throw DimensionError("predict_raw: dimension mismatch");
  Coefficients orig = to_original_scale(theta);
  return (raw_rows * orig.beta).array() + orig.beta0;
}

Coefficients Dataset::to_original_scale(const Coefficients& theta) const {
  if (theta.size() != p()) throw DimensionError("to_original_scale: dimension mismatch");
  Vector b = theta.beta.array() / scales_.array();
  return {theta.beta0 - means_.dot(b), b};
}

}  // namespace l2e
