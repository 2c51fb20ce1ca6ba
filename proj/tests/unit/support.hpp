#pragma once

#include "l2elogit/types.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

namespace l2e::test {

// Gaussian design with logistic labels; both classes guaranteed present.
inline Dataset random_dataset(std::mt19937_64& rng, Index n, Index p, double signal = 1.0) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix x(n, p);
  Vector beta(p);
  for (Index j = 0; j < p; ++j) beta[j] = signal * normal(rng);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j) x(i, j) = normal(rng);
  Vector y(n);
  for (Index i = 0; i < n; ++i) {
    double u = x.row(i).dot(beta);
    y[i] = unif(rng) < 1.0 / (1.0 + std::exp(-u)) ? 1.0 : 0.0;
  }
  y[0] = 1.0;
  y[1] = 0.0;
  return Dataset::from_raw(x, y);
}

inline Coefficients random_theta(std::mt19937_64& rng, Index p, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Coefficients c(normal(rng), Vector(p));
  for (Index j = 0; j < p; ++j) c.beta[j] = normal(rng);
  return c;
}

// Central differences of f over (beta0, beta).
template <class F>
Coefficients numeric_gradient(F&& f, const Coefficients& at, double h = 1e-6) {
  Coefficients g(0.0, Vector::Zero(at.size()));
  Coefficients t = at;
  t.beta0 = at.beta0 + h;
  double up = f(t);
  t.beta0 = at.beta0 - h;
  double dn = f(t);
  g.beta0 = (up - dn) / (2.0 * h);
  t.beta0 = at.beta0;
  for (Index j = 0; j < at.size(); ++j) {
    t.beta[j] = at.beta[j] + h;
    up = f(t);
    t.beta[j] = at.beta[j] - h;
    dn = f(t);
    t.beta[j] = at.beta[j];
    g.beta[j] = (up - dn) / (2.0 * h);
  }
  return g;
}

inline double max_abs_diff(const Coefficients& a, const Coefficients& b) {
  return std::max(std::abs(a.beta0 - b.beta0), (a.beta - b.beta).cwiseAbs().maxCoeff());
}

// Relative error with an absolute floor so that near-zero components do not blow up.
inline double rel_error(const Coefficients& got, const Coefficients& want, double floor = 1e-3) {
  double scale = std::max({floor, std::abs(want.beta0), want.beta.cwiseAbs().maxCoeff()});
  return max_abs_diff(got, want) / scale;
}

inline void check_descent(const std::vector<double>& trace, double slack = 1e-12) {
  for (std::size_t k = 1; k < trace.size(); ++k) REQUIRE(trace[k] <= trace[k - 1] + slack);
}

}  // namespace l2e::test
