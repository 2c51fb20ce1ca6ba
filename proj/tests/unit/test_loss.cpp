#include "l2elogit/loss.hpp"
#include "l2elogit/model.hpp"

#include "support.hpp"

#include <random>

using namespace l2e;

namespace {

double loss_at(const Dataset& d, const SmoothLoss& loss, const Coefficients& theta) {
  return loss.value(d.y(), linear_predictor(d, theta));
}

Coefficients loss_gradient(const Dataset& d, const SmoothLoss& loss, const Coefficients& theta) {
  Vector z;
  loss.working_gradient(d.y(), linear_predictor(d, theta), z);
  const double n = static_cast<double>(d.n());
  return {z.sum() / n, d.x().transpose() * z / n};
}

}  // namespace

TEST_CASE("smooth hinge pieces and derivatives") {
  HingeSpec h{-1.0};
  CHECK(smooth_hinge(2.0, h) == 0.0);
  CHECK(smooth_hinge(1.0, h) == 0.0);
  CHECK(smooth_hinge(0.0, h) == 1.0);
  CHECK(smooth_hinge(-1.0, h) == 4.0);
  CHECK(smooth_hinge(-2.0, h) == 8.0);
  for (double t : {-1.0, 0.0, 0.5}) {
    HingeSpec s{t};
    for (double u = -3.0; u <= 3.0; u += 0.0173) {
      const double e = 1e-6;
      double fd = (smooth_hinge(u + e, s) - smooth_hinge(u - e, s)) / (2 * e);
      CHECK(smooth_hinge_deriv(u, s) == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
    }
    // Continuity at the knots.
    CHECK(smooth_hinge(t - 1e-12, s) == doctest::Approx(smooth_hinge(t + 1e-12, s)));
    CHECK(smooth_hinge_deriv(t - 1e-12, s) == doctest::Approx(smooth_hinge_deriv(t + 1e-12, s)));
  }
  CHECK_THROWS_AS(HingeSpec{1.0}.validate(), ConfigError);
  CHECK_THROWS_AS(SmoothLoss(LossKind::HHSVM, HingeSpec{2.0}), ConfigError);
}

TEST_CASE("hinge majorizer dominates and its minimizer matches a grid search") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> unif(-4.0, 4.0);
  for (double t : {-1.0, 0.25}) {
    HingeSpec s{t};
    for (int k = 0; k < 200; ++k) {
      double ut = unif(rng);
      CHECK(hinge_majorizer(ut, ut, s) == doctest::Approx(smooth_hinge(ut, s)).epsilon(1e-15));
      const double step = k <= 5 ? 1e-4 : 0.05;
      double best_u = 0.0, best = 1e300;
      for (double u = -8.0; u <= 8.0; u += step) {
        double v = hinge_majorizer(u, ut, s);
        CHECK(v >= smooth_hinge(u, s) - 1e-12);
        if (v < best) {
          best = v;
          best_u = u;
        }
      }
      if (k <= 5) CHECK(std::abs(hinge_majorizer_argmin(ut, s) - best_u) < 2e-4);
      CHECK(hinge_majorizer(hinge_majorizer_argmin(ut, s), ut, s) <= best + 1e-12);
    }
  }
}

TEST_CASE("softplus") {
  CHECK(softplus(0.0) == doctest::Approx(std::log(2.0)));
  CHECK(softplus(800.0) == 800.0);
  CHECK(softplus(-800.0) == 0.0);
  CHECK(softplus(3.0) == doctest::Approx(std::log1p(std::exp(3.0))).epsilon(1e-15));
}

TEST_CASE("each loss has gradient (1/n) X~' z") {
  std::mt19937_64 rng(4);
  for (LossKind kind : {LossKind::L2E, LossKind::MLE, LossKind::HHSVM}) {
    SmoothLoss loss(kind, HingeSpec{-0.5});
    for (int rep = 0; rep < 20; ++rep) {
      Dataset d = test::random_dataset(rng, 40, 3);
      Coefficients theta = test::random_theta(rng, 3, 0.6);
      Coefficients fd = test::numeric_gradient(
          [&](const Coefficients& t) { return loss_at(d, loss, t); }, theta);
      CHECK(test::rel_error(loss_gradient(d, loss, theta), fd) < 1e-5);
    }
  }
  std::mt19937_64 r2(4);
  Dataset d = test::random_dataset(r2, 30, 2);
  Coefficients theta = test::random_theta(r2, 2);
  CHECK(loss_at(d, SmoothLoss(LossKind::L2E), theta) == doctest::Approx(l2e_loss(d, theta)));
}

TEST_CASE("curvature constants bound the second derivative in the linear predictor") {
  const double h = 1e-4;
  for (LossKind kind : {LossKind::L2E, LossKind::MLE, LossKind::HHSVM}) {
    SmoothLoss loss(kind);
    double worst = 0.0;
    for (double y : {0.0, 1.0}) {
      Vector yy(1);
      yy[0] = y;
      auto f = [&](double u) {
        Vector uu(1);
        uu[0] = u;
        return loss.value(yy, uu);
      };
      for (double u = -8.0; u <= 8.0; u += 0.01) {
        double second = (f(u + h) - 2.0 * f(u) + f(u - h)) / (h * h);
        worst = std::max(worst, second);
      }
    }
    CHECK(worst <= loss.curvature() * (1.0 + 1e-4));
    CHECK(worst >= loss.curvature() * 0.98);
  }
}

TEST_CASE("curvature weights") {
  std::mt19937_64 rng(9);
  Dataset d = test::random_dataset(rng, 60, 2);
  Vector u = linear_predictor(d, test::random_theta(rng, 2));
  Vector w;
  SmoothLoss(LossKind::MLE).curvature_weights(d.y(), u, w);
  for (Index i = 0; i < d.n(); ++i) CHECK(w[i] == doctest::Approx(logistic_weight(u[i])));
  SmoothLoss(LossKind::L2E).curvature_weights(d.y(), u, w);
  for (Index i = 0; i < d.n(); ++i) {
    double g = logistic_weight(u[i]);
    CHECK(w[i] == doctest::Approx(2.0 * g * g));
  }
  SmoothLoss(LossKind::HHSVM).curvature_weights(d.y(), u, w);
  CHECK(w.minCoeff() >= 0.0);
  CHECK(w.maxCoeff() <= 1.0);
}

TEST_CASE("discrepancy") {
  SmoothLoss l2e(LossKind::L2E), mle(LossKind::MLE), svm(LossKind::HHSVM);
  CHECK(l2e.discrepancy(1.0, 0.0) == 0.25);
  CHECK(mle.discrepancy(0.0, 0.0) == 0.25);
  CHECK(l2e.discrepancy(1.0, 40.0) < 1e-17);
  CHECK(svm.discrepancy(1.0, 2.0) == 0.0);
  CHECK(svm.discrepancy(0.0, 2.0) == doctest::Approx(smooth_hinge(-2.0)));
  for (double u = -5; u <= 5; u += 0.5) {
    CHECK(l2e.discrepancy(0.0, u) >= 0.0);
    CHECK(l2e.discrepancy(0.0, u) <= 1.0);
  }
}
