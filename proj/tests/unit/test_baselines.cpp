#include "l2elogit/baselines.hpp"
#include "l2elogit/model.hpp"
#include "l2elogit/path.hpp"

#include "support.hpp"

#include <random>

using namespace l2e;

namespace {

// Plain Newton-Raphson on the (ridge) logistic likelihood.
Coefficients newton_logistic(const Dataset& d, double ridge) {
  const Index n = d.n(), p = d.p();
  Matrix xt(n, p + 1);
  xt.col(0).setOnes();
  xt.rightCols(p) = d.x();
  Vector th = Vector::Zero(p + 1);
  Matrix pen = Matrix::Identity(p + 1, p + 1) * ridge;
  pen(0, 0) = 0.0;
  for (int it = 0; it < 100; ++it) {
    Vector u = xt * th;
    Vector pr(n), w(n);
    for (Index i = 0; i < n; ++i) {
      pr[i] = logistic(u[i]);
      w[i] = pr[i] * (1.0 - pr[i]);
    }
    Vector g = xt.transpose() * (pr - d.y()) / static_cast<double>(n) + pen * th;
    Matrix h = xt.transpose() * w.asDiagonal() * xt / static_cast<double>(n) + pen;
    Vector step = h.ldlt().solve(g);
    th -= step;
    if (step.cwiseAbs().maxCoeff() < 1e-14) break;
  }
  return {th[0], th.tail(p)};
}

// Accelerated proximal gradient on loss + J, over (beta0, beta).
Coefficients fista_loss(const Dataset& d, const SmoothLoss& loss, const PenaltySpec& pen,
                        int iters = 60000) {
  const double n = static_cast<double>(d.n());
  Matrix xt(d.n(), d.p() + 1);
  xt.col(0).setOnes();
  xt.rightCols(d.p()) = d.x();
  Eigen::SelfAdjointEigenSolver<Matrix> es(xt.transpose() * xt);
  const double lip = loss.curvature() / n * es.eigenvalues().maxCoeff() + pen.l2_weight();
  Vector th = Vector::Zero(d.p() + 1), prev = th, v = th, z;
  double t = 1.0;
  for (int k = 0; k < iters; ++k) {
    loss.working_gradient(d.y(), xt * v, z);
    Vector g = xt.transpose() * z / n;
    g.tail(d.p()) += pen.l2_weight() * v.tail(d.p());
    Vector a = v - g / lip;
    th[0] = a[0];
    for (Index j = 0; j < d.p(); ++j) th[j + 1] = soft_threshold(a[j + 1], pen.l1_weight() / lip);
    double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    v = th + ((t - 1.0) / tn) * (th - prev);
    prev = th;
    t = tn;
  }
  return {th[0], th.tail(d.p())};
}

SolverOptions tight() {
  SolverOptions o;
  o.kkt_tolerance = 1e-10;
  o.mm_tolerance = 1e-15;
  o.cd_tolerance = 1e-12;
  o.max_mm_iterations = 200000;
  return o;
}

}  // namespace

TEST_CASE("MLE matches Newton-Raphson") {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 10; ++rep) {
    Dataset d = test::random_dataset(rng, 120, 3, 0.8);
    for (double ridge : {0.0, 0.05}) {
      FitResult f = fit_mle_logistic(d, PenaltySpec(ridge, 0.0),
                                     null_coefficients(d, LossKind::MLE), tight());
      CHECK(f.diagnostics.converged);
      test::check_descent(f.diagnostics.objective_trace);
      CHECK(test::max_abs_diff(f.coefficients, newton_logistic(d, ridge)) < 1e-7);
    }
  }
}

TEST_CASE("Elastic Net baselines match proximal gradient") {
  std::mt19937_64 rng(15);
  for (LossKind kind : {LossKind::MLE, LossKind::HHSVM}) {
    SmoothLoss loss(kind);
    for (int rep = 0; rep < 4; ++rep) {
      Dataset d = test::random_dataset(rng, 60, 6);
      double lmax = lambda_max(d, 0.7, loss);
      PenaltySpec pen(0.2 * lmax, 0.7);
      FitResult f = fit_estimator(d, loss, pen, null_coefficients(d, kind), tight());
      CHECK(f.diagnostics.converged);
      test::check_descent(f.diagnostics.objective_trace);
      CHECK(kkt_violation(d, loss, pen, f.coefficients) <= 1e-10);
      Coefficients oracle = fista_loss(d, loss, pen);
      CHECK(penalized_objective(d, loss, pen, f.coefficients) <=
            penalized_objective(d, loss, pen, oracle) + 1e-12);
      if (kind == LossKind::MLE) CHECK(test::max_abs_diff(f.coefficients, oracle) < 1e-6);
    }
  }
}

TEST_CASE("null intercepts") {
  Matrix x(10, 1);
  for (Index i = 0; i < 10; ++i) x(i, 0) = static_cast<double>(i);
  Vector y = Vector::Zero(10);
  y.head(3).setOnes();
  Dataset d = Dataset::from_raw(x, y);
  CHECK(null_intercept(d, LossKind::MLE) == doctest::Approx(std::log(0.3 / 0.7)));
  CHECK(null_intercept(d, LossKind::L2E) == doctest::Approx(std::log(0.3 / 0.7)));

  for (double t : {-1.0, 0.0, 0.5}) {
    HingeSpec s{t};
    auto obj = [&](double b) {
      double v = 0.0;
      for (Index i = 0; i < 10; ++i) v += smooth_hinge((2.0 * y[i] - 1.0) * b, s);
      return v;
    };
    double best = 1e300;
    for (double b = -5.0; b <= 5.0; b += 1e-5) best = std::min(best, obj(b));
    double b = null_intercept(d, LossKind::HHSVM, s);
    CHECK(obj(b) <= best + 1e-9);
  }
  Vector balanced = Vector::Zero(10);
  balanced.head(5).setOnes();
  CHECK(null_intercept(Dataset::from_raw(x, balanced), LossKind::HHSVM) == 0.0);
  CHECK_THROWS_AS(null_intercept(Dataset::from_raw(x, Vector::Zero(10)), LossKind::MLE), DataError);
}

TEST_CASE("null model is stationary for every loss") {
  std::mt19937_64 rng(25);
  Dataset d = test::random_dataset(rng, 40, 3);
  for (LossKind kind : {LossKind::L2E, LossKind::MLE, LossKind::HHSVM}) {
    SmoothLoss loss(kind);
    double lmax = lambda_max(d, 1.0, loss);
    CHECK(kkt_violation(d, loss, PenaltySpec(lmax, 1.0), null_coefficients(d, kind)) < 1e-9);
    CHECK(kkt_violation(d, loss, PenaltySpec(0.9 * lmax, 1.0), null_coefficients(d, kind)) > 0.0);
  }
}
