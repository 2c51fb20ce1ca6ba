#include "l2elogit/model.hpp"

#include <cmath>

namespace l2e {

double logistic(double u) {
  if (u >= 0.0) {
    return 1.0 / (1.0 + std::exp(-u));
  }
  double e = std::exp(u);
  return e / (1.0 + e);
}

double logistic_weight(double u) {
  double e = std::exp(-std::abs(u));
  double d = 1.0 + e;
  return e / (d * d);
}

Vector logistic(const Vector& u) {
  Vector p(u.size());
  for (Index i = 0; i < u.size(); ++i) p[i] = logistic(u[i]);
  return p;
}

namespace {

void check_dims(const Dataset& data, const Coefficients& theta) {
  if (theta.size() != data.p())
    throw DimensionError("coefficient vector has " + std::to_string(theta.size()) +
                         " entries but the design has " + std::to_string(data.p()) + " columns");
}

}  // namespace

Vector linear_predictor(const Dataset& data, const Coefficients& theta) {
  check_dims(data, theta);
  Vector u = data.x() * theta.beta;
  u.array() += theta.beta0;
  return u;
}

double l2e_loss(const Dataset& data, const Coefficients& theta) {
  Vector p = logistic(linear_predictor(data, theta));
  return (data.y() - p).squaredNorm() / static_cast<double>(data.n());
}

Coefficients l2e_gradient(const Dataset& data, const Coefficients& theta) {
  Vector u = linear_predictor(data, theta);
  // z = 2 G (p - y); gradient = (1/n) X~' z
  Vector z(u.size());
  for (Index i = 0; i < u.size(); ++i)
    z[i] = 2.0 * logistic_weight(u[i]) * (logistic(u[i]) - data.y()[i]);
  const double n = static_cast<double>(data.n());
  return {z.sum() / n, data.x().transpose() * z / n};
}

Vector estimating_weights(const Dataset& data, const Coefficients& theta) {
  Vector u = linear_predictor(data, theta);
  return u.unaryExpr([](double v) { return logistic_weight(v); });
}

Coefficients estimating_equations(const Dataset& data, const Coefficients& theta) {
  Vector u = linear_predictor(data, theta);
  Vector w(u.size());
  for (Index i = 0; i < u.size(); ++i)
    w[i] = logistic_weight(u[i]) * (data.y()[i] - logistic(u[i]));
  return {w.sum(), data.x().transpose() * w};
}

double curvature_factor(double p, double u_label) {
  double q = 2.0 * p - 1.0;
  return (2.0 * p * (1.0 - p) - q * (q - u_label)) * p * (1.0 - p);
}

double curvature_polynomial(double q) {
  double q2 = q * q;
  return 0.375 * q2 * q2 - 0.25 * q2 * q - 0.5 * q2 + 0.25 * q + 0.125;
}

EtaConstant curvature_bound() {
  const double q = (-3.0 + std::sqrt(33.0)) / 12.0;
  return {curvature_polynomial(q), q};
}

}  // namespace l2e
