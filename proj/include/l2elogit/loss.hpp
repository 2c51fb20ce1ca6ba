#pragma once

#include "l2elogit/types.hpp"

namespace l2e {

/// Knee parameter of the smooth hinge; t < 1.
struct HingeSpec {
  double t = -1.0;
  void validate() const;
};

double smooth_hinge(double u, const HingeSpec& spec = {});
double smooth_hinge_deriv(double u, const HingeSpec& spec = {});
double smooth_hinge_second(double u, const HingeSpec& spec = {});

/// Quadratic majorizer phi(u~) + phi'(u~)(u - u~) + (u - u~)^2 of the smooth hinge.
double hinge_majorizer(double u, double u_tilde, const HingeSpec& spec = {});

/// Minimizer of hinge_majorizer in u: u~ + 1 - min(max(u~, t), 1).
double hinge_majorizer_argmin(double u_tilde, const HingeSpec& spec = {});

/// log(1 + exp(u)) without overflow.
double softplus(double u);

/// A smooth loss of the linear predictor with bounded curvature, written so
/// that its gradient in theta is (1/n) X~' z and its Hessian in theta is
/// dominated by (eta/n) X~' X~. All three estimators share the MM machinery
/// through this description.
///
///   L2E:   (1/n)  sum (y - F(u))^2,               z = 2 F(1-F) (F - y),  eta ~ 0.1541
///   MLE:   (1/n)  sum log(1 + e^u) - y u,         z = F - y,             eta = 1/4
///   HHSVM: (1/2n) sum phi(s u), s = 2y - 1,       z = s phi'(s u) / 2,   eta = 1
class SmoothLoss {
 public:
  explicit SmoothLoss(LossKind kind, HingeSpec hinge = {});

  LossKind kind() const { return kind_; }
  const HingeSpec& hinge() const { return hinge_; }

  /// Smallest curvature constant for which the quadratic surrogate is valid.
  double curvature() const;

  double value(const Vector& y, const Vector& u) const;
  void working_gradient(const Vector& y, const Vector& u, Vector& z) const;

  /// Nonnegative second-order weights w with Hessian ~ (1/n) X~' diag(w) X~:
  /// the exact Hessian for MLE and HHSVM, the Gauss-Newton part 2 F'(u)^2 for L2E.
  void curvature_weights(const Vector& y, const Vector& u, Vector& w) const;

  /// Held-out discrepancy of one observation, used by cross-validation.
  double discrepancy(double y, double u) const;

 private:
  LossKind kind_;
  HingeSpec hinge_;
};

}  // namespace l2e
