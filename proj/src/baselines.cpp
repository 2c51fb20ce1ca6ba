#include "l2elogit/baselines.hpp"

#include <cmath>

namespace l2e {

FitResult fit_mle_logistic(const Dataset& data, const PenaltySpec& penalty,
                           const Coefficients& init, const SolverOptions& opts) {
  return fit_mm(data, SmoothLoss(LossKind::MLE), penalty, init, opts);
}

FitResult fit_hhsvm(const Dataset& data, const PenaltySpec& penalty, const HingeSpec& spec,
                    const Coefficients& init, const SolverOptions& opts) {
  return fit_mm(data, SmoothLoss(LossKind::HHSVM, spec), penalty, init, opts);
}

FitResult fit_estimator(const Dataset& data, const SmoothLoss& loss, const PenaltySpec& penalty,
                        const Coefficients& init, const SolverOptions& opts) {
  return fit_mm(data, loss, penalty, init, opts);
}

double null_intercept(const Dataset& data, LossKind kind, const HingeSpec& spec) {
  data.require_nondegenerate();
  const double ybar = data.y_mean();
  if (kind != LossKind::HHSVM) return std::log(ybar / (1.0 - ybar));

  spec.validate();
  const Vector& y = data.y();
  auto slope = [&](double b) {
    double g = 0.0;
    for (Index i = 0; i < y.size(); ++i) {
      double s = 2.0 * y[i] - 1.0;
      g += s * smooth_hinge_deriv(s * b, spec);
    }
    return g;
  };
  // slope is nondecreasing; outside [-m, m] every term sits on a linear or flat piece.
  const double m = std::max(1.0, -spec.t) + 1.0;
  double lo = -m, hi = m;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    double mid = 0.5 * (lo + hi);
    if (slope(mid) > 0.0)
      hi = mid;
    else
      lo = mid;
  }
  double b = 0.5 * (lo + hi);
  return std::abs(b) < 1e-14 ? 0.0 : b;
}

Coefficients null_coefficients(const Dataset& data, LossKind kind, const HingeSpec& spec) {
  return {null_intercept(data, kind, spec), Vector::Zero(data.p())};
}

}  // namespace l2e
