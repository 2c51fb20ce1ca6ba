#pragma once

#include "l2elogit/types.hpp"

namespace l2e {

/// Logistic link 1 / (1 + exp(-u)), evaluated without overflow for any finite u.
double logistic(double u);

/// F(u) (1 - F(u)) computed from exp(-|u|), accurate in the saturated tails.
double logistic_weight(double u);

/// Elementwise logistic of a linear predictor.
Vector logistic(const Vector& u);

/// beta0 + X beta.
Vector linear_predictor(const Dataset& data, const Coefficients& theta);

/// (1/n) |y - F(X~ theta)|^2, the compact logistic L2E loss.
double l2e_loss(const Dataset& data, const Coefficients& theta);

/// Exact gradient of l2e_loss with respect to (beta0, beta):
/// (2/n) X~' G (p - y) with G = diag(p (1 - p)).
Coefficients l2e_gradient(const Dataset& data, const Coefficients& theta);

/// Per-observation weights p_i (1 - p_i) from the L2E estimating equations.
/// Values near zero mark observations the fit has effectively discarded.
Vector estimating_weights(const Dataset& data, const Coefficients& theta);

/// Residual-weighted score sum_i gamma_i x~_i (y_i - p_i), zero at stationary points.
Coefficients estimating_equations(const Dataset& data, const Coefficients& theta);

/// Second-derivative factor of (y - F(u))^2 in u, written in terms of
/// p = F(u) and the signed label u_label = 2y - 1.
double curvature_factor(double p, double u_label);

/// Uniform upper bound on the L2E curvature factor.
struct EtaConstant {
  double value;
  double q_star;
};

/// eta = max_p curvature_factor(p, 1), attained at p = (1 + q_star) / 2 where
/// q_star = (-3 + sqrt(33)) / 12.
EtaConstant curvature_bound();

/// The bound as a polynomial in q = 2p - 1:
/// (3/8) q^4 - (1/4) q^3 - (1/2) q^2 + (1/4) q + 1/8.
double curvature_polynomial(double q);

}  // namespace l2e
