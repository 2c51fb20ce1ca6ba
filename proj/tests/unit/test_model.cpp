#include "l2elogit/model.hpp"

#include "support.hpp"

#include <cmath>
#include <random>

using namespace l2e;

namespace {

long double logistic_ld(long double u) { return 1.0L / (1.0L + std::exp(-u)); }

}  // namespace

TEST_CASE("logistic agrees with an extended-precision evaluation") {
  for (double u = -745.0; u <= 745.0; u += 0.37) {
    const long double want = logistic_ld(u);
    const double got = logistic(u);
    if (want < 1e-300L) {
      CHECK(got >= 0.0);
      CHECK(got < 1e-300);
      continue;
    }
    CHECK(std::abs(static_cast<long double>(got) - want) / want < 4e-16L);
  }
  CHECK(logistic(0.0) == 0.5);
  CHECK(logistic(1e6) == 1.0);
  CHECK(logistic(-1e6) == 0.0);
  for (double u : {-30.0, -2.5, 0.1, 4.0, 17.0})
    CHECK(logistic(u) + logistic(-u) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("logistic weight stays accurate in the tails") {
  for (double u = -700.0; u <= 700.0; u += 1.3) {
    const long double want = std::exp(-std::abs(static_cast<long double>(u))) /
                             std::pow(1.0L + std::exp(-std::abs(static_cast<long double>(u))), 2);
    const double got = logistic_weight(u);
    if (want < 1e-300L) continue;
    CHECK(std::abs(static_cast<long double>(got) - want) / want < 1e-14L);
  }
  CHECK(logistic_weight(0.0) == 0.25);
}

TEST_CASE("loss and gradient at theta = 0") {
  std::mt19937_64 rng(3);
  Dataset d = test::random_dataset(rng, 40, 3);
  Coefficients zero = Coefficients::zeros(3);
  CHECK(l2e_loss(d, zero) == doctest::Approx(0.25).epsilon(1e-15));
  // z_i = 2 * 0.25 * (0.5 - y_i) = 0.25 - 0.5 y_i; intercept gradient is its mean.
  Coefficients g = l2e_gradient(d, zero);
  CHECK(g.beta0 == doctest::Approx(0.25 - 0.5 * d.y_mean()).epsilon(1e-14));
  Vector z = (0.25 - 0.5 * d.y().array()).matrix();
  Vector want = d.x().transpose() * z / static_cast<double>(d.n());
  CHECK((g.beta - want).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("gradient matches central differences") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 50; ++rep) {
    Dataset d = test::random_dataset(rng, 30, 4);
    Coefficients theta = test::random_theta(rng, 4, 0.7);
    Coefficients g = l2e_gradient(d, theta);
    Coefficients fd = test::numeric_gradient([&](const Coefficients& t) { return l2e_loss(d, t); },
                                             theta);
    CHECK(test::rel_error(g, fd) < 1e-6);
  }
}

TEST_CASE("loss range and label-flip symmetry") {
  std::mt19937_64 rng(13);
  for (int rep = 0; rep < 100; ++rep) {
    Dataset d = test::random_dataset(rng, 20, 3);
    Coefficients theta = test::random_theta(rng, 3, 3.0);
    double v = l2e_loss(d, theta);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    Dataset flipped = Dataset::from_raw(d.raw_x(), (1.0 - d.y().array()).matrix());
    Coefficients neg(-theta.beta0, -theta.beta);
    CHECK(l2e_loss(flipped, neg) == doctest::Approx(v).epsilon(1e-15));
    Vector w = estimating_weights(d, theta), wn = estimating_weights(d, neg);
    CHECK((w - wn).cwiseAbs().maxCoeff() < 1e-17);
  }
  CHECK(logistic_weight(40.0) < 1e-17);
}

TEST_CASE("curvature factor is the second derivative of the squared residual") {
  const double h = 1e-4;
  for (double y : {0.0, 1.0}) {
    for (double u = -6.0; u <= 6.0; u += 0.25) {
      auto r2 = [&](double v) {
        double e = y - logistic(v);
        return e * e;
      };
      double fd = (r2(u + h) - 2.0 * r2(u) + r2(u - h)) / (h * h);
      double psi = curvature_factor(logistic(u), 2.0 * y - 1.0);
      CHECK(std::abs(psi - fd) < 1e-6);
    }
  }
}

TEST_CASE("curvature bound") {
  EtaConstant eta = curvature_bound();
  const double q = (-3.0 + std::sqrt(33.0)) / 12.0;
  CHECK(eta.q_star == doctest::Approx(q).epsilon(1e-15));
  CHECK(std::abs(eta.value - curvature_polynomial(q)) < 1e-12);
  CHECK(eta.value == doctest::Approx(0.1540587).epsilon(1e-6));
  CHECK(curvature_factor(0.5 * (1.0 + q), 1.0) == doctest::Approx(eta.value).epsilon(1e-13));

  double worst = -1.0;
  for (int k = 0; k <= 1000000; ++k) {
    double p = k / 1e6;
    worst = std::max({worst, curvature_factor(p, 1.0), curvature_factor(p, -1.0)});
  }
  CHECK(worst <= eta.value + 1e-15);
  CHECK(worst > eta.value - 1e-9);
}

TEST_CASE("estimating equations vanish at a stationary fit") {
  std::mt19937_64 rng(5);
  Dataset d = test::random_dataset(rng, 200, 2, 1.5);
  // Crude gradient descent to a stationary point of the unpenalized loss.
  Coefficients theta = Coefficients::zeros(2);
  for (int it = 0; it < 200000; ++it) {
    Coefficients g = l2e_gradient(d, theta);
    theta.beta0 -= 3.0 * g.beta0;
    theta.beta -= 3.0 * g.beta;
    if (std::max(std::abs(g.beta0), g.beta.cwiseAbs().maxCoeff()) < 1e-12) break;
  }
  Coefficients e = estimating_equations(d, theta);
  CHECK(std::abs(e.beta0) < 1e-8);
  CHECK(e.beta.cwiseAbs().maxCoeff() < 1e-8);
  Vector w = estimating_weights(d, theta);
  CHECK(w.minCoeff() >= 0.0);
  CHECK(w.maxCoeff() <= 0.25);
}

TEST_CASE("dataset centering and validation") {
  Matrix raw(3, 2);
  raw << 1.0, 10.0, 2.0, 20.0, 6.0, 60.0;
  Vector y(3);
  y << 0.0, 1.0, 1.0;
  Dataset d = Dataset::from_raw(raw, y);
  CHECK(d.x().colwise().sum().cwiseAbs().maxCoeff() < 1e-12);
  CHECK(d.column_means()[0] == doctest::Approx(3.0));
  CHECK((d.raw_x() - raw).cwiseAbs().maxCoeff() < 1e-12);

  Vector bad = y;
  bad[1] = 2.0;
  try {
    Dataset::from_raw(raw, bad);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
  }
  Matrix nan = raw;
  nan(0, 0) = std::nan("");
  CHECK_THROWS_AS(Dataset::from_raw(nan, y), DataError);
  CHECK_THROWS_AS(Dataset::from_raw(raw, Vector::Zero(2)), DimensionError);
  CHECK_THROWS_AS(Dataset::from_raw(raw, Vector::Zero(3)).require_nondegenerate(), DataError);

  Matrix with_const(3, 2);
  with_const << 1.0, 5.0, 2.0, 5.0, 3.0, 5.0;
  Dataset c = Dataset::from_raw(with_const, y);
  CHECK(c.constant_columns()[1]);
  CHECK(!c.constant_columns()[0]);
}

TEST_CASE("original-scale coefficients reproduce the linear predictor") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix raw(25, 3);
  for (Index i = 0; i < 25; ++i)
    for (Index j = 0; j < 3; ++j) raw(i, j) = 5.0 + (j + 1) * normal(rng);
  Vector y(25);
  for (Index i = 0; i < 25; ++i) y[i] = i % 2;
  for (bool standardize : {false, true}) {
    Dataset d = Dataset::from_raw(raw, y, standardize);
    Coefficients theta = test::random_theta(rng, 3);
    Vector centered = linear_predictor(d, theta);
    Coefficients orig = d.to_original_scale(theta);
    Vector direct = (raw * orig.beta).array() + orig.beta0;
    CHECK((centered - direct).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((d.predict_raw(raw, theta) - centered).cwiseAbs().maxCoeff() < 1e-10);
  }
}
