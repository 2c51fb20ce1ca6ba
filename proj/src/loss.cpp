#include "l2elogit/loss.hpp"

#include "l2elogit/model.hpp"

#include <algorithm>
#include <cmath>

namespace l2e {

void HingeSpec::validate() const {
  if (!(t < 1.0) || !std::isfinite(t)) throw ConfigError("hinge knee t must be finite and < 1");
}

double smooth_hinge(double u, const HingeSpec& spec) {
  const double t = spec.t;
  if (u <= t) return (1.0 - t) * (1.0 - t) + 2.0 * (1.0 - t) * (t - u);
  if (u <= 1.0) return (1.0 - u) * (1.0 - u);
  return 0.0;
}

double smooth_hinge_deriv(double u, const HingeSpec& spec) {
  const double t = spec.t;
  if (u <= t) return -2.0 * (1.0 - t);
  if (u <= 1.0) return -2.0 * (1.0 - u);
  return 0.0;
}

double smooth_hinge_second(double u, const HingeSpec& spec) {
  return (u > spec.t && u <= 1.0) ? 2.0 : 0.0;
}

double hinge_majorizer(double u, double u_tilde, const HingeSpec& spec) {
  double d = u - u_tilde;
  return smooth_hinge(u_tilde, spec) + smooth_hinge_deriv(u_tilde, spec) * d + d * d;
}

double hinge_majorizer_argmin(double u_tilde, const HingeSpec& spec) {
  return u_tilde + 1.0 - std::min(std::max(u_tilde, spec.t), 1.0);
}

double softplus(double u) {
  if (u > 0.0) return u + std::log1p(std::exp(-u));
  return std::log1p(std::exp(u));
}

SmoothLoss::SmoothLoss(LossKind kind, HingeSpec hinge) : kind_(kind), hinge_(hinge) {
  hinge_.validate();
}

double SmoothLoss::curvature() const {
  switch (kind_) {
    case LossKind::L2E:
      return curvature_bound().value;
    case LossKind::MLE:
      return 0.25;
    case LossKind::HHSVM:
      return 1.0;
  }
  return 1.0;
}

double SmoothLoss::value(const Vector& y, const Vector& u) const {
  const Index n = y.size();
  double s = 0.0;
  switch (kind_) {
    case LossKind::L2E:
      for (Index i = 0; i < n; ++i) {
        double r = y[i] - logistic(u[i]);
        s += r * r;
      }
      return s / static_cast<double>(n);
    case LossKind::MLE:
      for (Index i = 0; i < n; ++i) s += softplus(u[i]) - y[i] * u[i];
      return s / static_cast<double>(n);
    case LossKind::HHSVM:
      for (Index i = 0; i < n; ++i) s += smooth_hinge((2.0 * y[i] - 1.0) * u[i], hinge_);
      return s / (2.0 * static_cast<double>(n));
  }
  return s;
}

void SmoothLoss::working_gradient(const Vector& y, const Vector& u, Vector& z) const {
  const Index n = y.size();
  z.resize(n);
  switch (kind_) {
    case LossKind::L2E:
      for (Index i = 0; i < n; ++i) z[i] = 2.0 * logistic_weight(u[i]) * (logistic(u[i]) - y[i]);
      break;
    case LossKind::MLE:
      for (Index i = 0; i < n; ++i) z[i] = logistic(u[i]) - y[i];
      break;
    case LossKind::HHSVM:
      for (Index i = 0; i < n; ++i) {
        double s = 2.0 * y[i] - 1.0;
        z[i] = 0.5 * s * smooth_hinge_deriv(s * u[i], hinge_);
      }
      break;
  }
}

void SmoothLoss::curvature_weights(const Vector& y, const Vector& u, Vector& w) const {
  const Index n = y.size();
  w.resize(n);
  switch (kind_) {
    case LossKind::L2E:
      for (Index i = 0; i < n; ++i) {
        double g = logistic_weight(u[i]);
        w[i] = 2.0 * g * g;
      }
      break;
    case LossKind::MLE:
      for (Index i = 0; i < n; ++i) w[i] = logistic_weight(u[i]);
      break;
    case LossKind::HHSVM:
      for (Index i = 0; i < n; ++i)
        w[i] = 0.5 * smooth_hinge_second((2.0 * y[i] - 1.0) * u[i], hinge_);
      break;
  }
}

double SmoothLoss::discrepancy(double y, double u) const {
  if (kind_ == LossKind::HHSVM) return smooth_hinge((2.0 * y - 1.0) * u, hinge_);
  double r = y - logistic(u);
  return r * r;
}

}  // namespace l2e
