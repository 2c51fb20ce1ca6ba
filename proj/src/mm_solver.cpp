#include "l2elogit/mm_solver.hpp"

#include "l2elogit/model.hpp"

#include <algorithm>
#include <cmath>

namespace l2e {

void SolverOptions::validate() const {
  if (max_mm_iterations < 1 || max_cd_sweeps < 1)
    throw ConfigError("iteration limits must be positive");
  if (!(mm_tolerance > 0.0) || !(cd_tolerance > 0.0) || !(kkt_tolerance > 0.0))
    throw ConfigError("solver tolerances must be positive");
  if (!(eta_inflation >= 1.0)) throw ConfigError("eta_inflation must be >= 1");
}

namespace {

void check_theta(const Dataset& data, const Coefficients& theta) {
  if (theta.size() != data.p())
    throw DimensionError("coefficient vector has " + std::to_string(theta.size()) +
                         " entries but the design has " + std::to_string(data.p()) + " columns");
}

// beta0 + X beta, skipping zero coefficients.
void sparse_predictor(const Matrix& x, const Coefficients& theta, Vector& u) {
  u.setConstant(x.rows(), theta.beta0);
  for (Index j = 0; j < theta.beta.size(); ++j) {
    double b = theta.beta[j];
    if (b != 0.0) u.noalias() += b * x.col(j);
  }
}

// Factorization of (eta/n) X'X + ridge I restricted to non-constant columns.
// Built once per fit: the surrogate curvature does not depend on the iterate.
class NormalSystem {
 public:
  NormalSystem(const Dataset& data, double eta, double ridge) {
    const auto& constant = data.constant_columns();
    for (Index j = 0; j < data.p(); ++j)
      if (!constant[static_cast<std::size_t>(j)]) cols_.push_back(j);
    p_ = data.p();
    const auto q = static_cast<Index>(cols_.size());
    Matrix xs(data.n(), q);
    for (Index k = 0; k < q; ++k) xs.col(k) = data.x().col(cols_[static_cast<std::size_t>(k)]);
    const double n = static_cast<double>(data.n());
    Matrix a = Matrix::Zero(q, q);
    a.selfadjointView<Eigen::Lower>().rankUpdate(xs.transpose(), eta / n);
    a = a.selfadjointView<Eigen::Lower>();
    if (ridge > 0.0) a.diagonal().array() += ridge;
    ldlt_.compute(a);
    if (ldlt_.info() != Eigen::Success || !ldlt_.isPositive() || ldlt_.rcond() < 1e-13) {
      if (ridge > 0.0) throw Error("ridge normal equations could not be factorized");
      throw RankDeficientError(
          "X'X is singular or numerically rank deficient; use a ridge penalty "
          "(alpha = 0, lambda > 0) instead of the unpenalized update");
    }
  }

  // Solves the system for rhs given over all p columns; constant columns get 0.
  Vector solve(const Vector& rhs) const {
    const auto q = static_cast<Index>(cols_.size());
    Vector r(q);
    for (Index k = 0; k < q; ++k) r[k] = rhs[cols_[static_cast<std::size_t>(k)]];
    Vector s = ldlt_.solve(r);
    Vector out = Vector::Zero(p_);
    for (Index k = 0; k < q; ++k) out[cols_[static_cast<std::size_t>(k)]] = s[k];
    return out;
  }

 private:
  std::vector<Index> cols_;
  Index p_ = 0;
  Eigen::LDLT<Matrix> ldlt_;
};

struct CdWorkspace {
  const Matrix& x;
  Vector col_sq;  // (1/n) |x_j|^2
  double inv_n;
};

CdWorkspace make_workspace(const Dataset& data) {
  const double inv_n = 1.0 / static_cast<double>(data.n());
  Vector col_sq = data.x().colwise().squaredNorm().transpose() * inv_n;
  const auto& constant = data.constant_columns();
  for (Index j = 0; j < data.p(); ++j)
    if (constant[static_cast<std::size_t>(j)]) col_sq[j] = 0.0;
  return {data.x(), std::move(col_sq), inv_n};
}

// Coordinate descent on (eta/2n)|r|^2 + J(beta) where r = zeta - X beta is
// maintained in place. Returns the number of sweeps and whether it settled.
std::pair<int, bool> cd_minimize(const CdWorkspace& ws, Vector& r, Vector& beta, double eta,
                                 const PenaltySpec& penalty, const SolverOptions& opts) {
  const double l1 = penalty.l1_weight();
  const double l2 = penalty.l2_weight();
  const Index p = beta.size();

  auto update = [&](Index j) -> double {
    const double cj = eta * ws.col_sq[j];
    const double bj = beta[j];
    if (cj == 0.0) {
      if (bj != 0.0) {
        beta[j] = 0.0;
        return std::abs(bj);
      }
      return 0.0;
    }
    const double a = eta * ws.inv_n * ws.x.col(j).dot(r) + cj * bj;
    const double nb = soft_threshold(a, l1) / (cj + l2);
    if (nb != bj) {
      r.noalias() -= (nb - bj) * ws.x.col(j);
      beta[j] = nb;
    }
    return std::abs(nb - bj);
  };

  int sweeps = 0;
  std::vector<Index> active;
  while (sweeps < opts.max_cd_sweeps) {
    active.clear();
    for (Index j = 0; j < p; ++j)
      if (beta[j] != 0.0) active.push_back(j);

    int quiet = 0;
    while (!active.empty() && quiet < 2 && sweeps < opts.max_cd_sweeps) {
      double change = 0.0;
      for (Index j : active) change = std::max(change, update(j));
      ++sweeps;
      quiet = change < opts.cd_tolerance ? quiet + 1 : 0;
    }
    // Full sweep, also when the budget ran out: zero coordinates that move are KKT violations.
    bool expanded = false;
    double change = 0.0;
    for (Index j = 0; j < p; ++j) {
      const bool was_zero = beta[j] == 0.0;
      change = std::max(change, update(j));
      if (was_zero && beta[j] != 0.0) expanded = true;
    }
    ++sweeps;
    if (!expanded && change < opts.cd_tolerance) return {sweeps, true};
  }
  return {sweeps, false};
}

Vector gradient_vector(const Dataset& data, const Vector& z) {
  return data.x().transpose() * z / static_cast<double>(data.n());
}

double kkt_from_gradient(const Dataset& data, double grad0, const Vector& grad,
                         const PenaltySpec& penalty, const Vector& beta) {
  const double l1 = penalty.l1_weight();
  const double l2 = penalty.l2_weight();
  const auto& constant = data.constant_columns();
  double worst = std::abs(grad0);
  for (Index j = 0; j < beta.size(); ++j) {
    if (constant[static_cast<std::size_t>(j)]) continue;
    const double g = grad[j] + l2 * beta[j];
    double v;
    if (beta[j] > 0.0)
      v = std::abs(g + l1);
    else if (beta[j] < 0.0)
      v = std::abs(g - l1);
    else
      v = std::max(0.0, std::abs(g) - l1);
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace

MajorizationState majorize(const Dataset& data, const Coefficients& theta_tilde,
                           const SmoothLoss& loss, double eta) {
  check_theta(data, theta_tilde);
  if (!(eta >= loss.curvature()))
    throw ConfigError("eta = " + std::to_string(eta) + " is below the curvature bound " +
                      std::to_string(loss.curvature()));
  MajorizationState st;
  st.anchor = theta_tilde;
  st.eta = eta;
  Vector u;
  sparse_predictor(data.x(), theta_tilde, u);
  st.anchor_loss = loss.value(data.y(), u);
  loss.working_gradient(data.y(), u, st.z);
  st.z_bar = st.z.mean();
  Vector xb = u.array() - theta_tilde.beta0;
  st.zeta = xb - (st.z.array() - st.z_bar).matrix() / eta;
  return st;
}

MajorizationState majorize(const Dataset& data, const Coefficients& theta_tilde, double eta) {
  return majorize(data, theta_tilde, SmoothLoss(LossKind::L2E), eta);
}

double surrogate_value(const Dataset& data, const MajorizationState& state,
                       const Coefficients& theta) {
  check_theta(data, theta);
  const double n = static_cast<double>(data.n());
  const double d0 = theta.beta0 - state.anchor.beta0;
  Vector d = data.x() * (theta.beta - state.anchor.beta);
  d.array() += d0;
  return state.anchor_loss + state.z.dot(d) / n + 0.5 * state.eta * d.squaredNorm() / n;
}

Coefficients mm_step_full_rank(const Dataset& data, const Coefficients& theta,
                               const MajorizationState& state) {
  check_theta(data, theta);
  // sys holds (1/n) X'X and the rhs is (1/n) X'z, so dir = (X'X)^{-1} X'z.
  NormalSystem sys(data, 1.0, 0.0);
  Vector dir = sys.solve(gradient_vector(data, state.z));
  Coefficients out = theta;
  out.beta0 -= state.z_bar / state.eta;
  out.beta -= dir / state.eta;
  return out;
}

Coefficients mm_step_ridge(const Dataset& data, const Coefficients& theta,
                           const MajorizationState& state, const PenaltySpec& penalty) {
  check_theta(data, theta);
  if (!(penalty.lambda > 0.0)) throw ConfigError("ridge update requires lambda > 0");
  if (penalty.alpha != 0.0) throw ConfigError("ridge update requires alpha = 0");
  NormalSystem sys(data, state.eta, penalty.lambda);
  Vector rhs = gradient_vector(data, state.z) + penalty.lambda * theta.beta;
  Coefficients out = theta;
  out.beta0 -= state.z_bar / state.eta;
  out.beta -= sys.solve(rhs);
  return out;
}

double penalized_ls_objective(const Dataset& data, const Vector& zeta, const PenaltySpec& penalty,
                              const Vector& beta, double eta) {
  const double n = static_cast<double>(data.n());
  return 0.5 * eta * (zeta - data.x() * beta).squaredNorm() / n + penalty.value(beta);
}

CdResult solve_penalized_ls_cd(const Dataset& data, const Vector& zeta, const PenaltySpec& penalty,
                               const Vector& beta_init, double eta, const SolverOptions& opts) {
  penalty.validate();
  opts.validate();
  if (zeta.size() != data.n() || beta_init.size() != data.p())
    throw DimensionError("solve_penalized_ls_cd: dimension mismatch");
  if (!(eta > 0.0)) throw ConfigError("eta must be positive");
  CdWorkspace ws = make_workspace(data);
  CdResult res;
  res.beta = beta_init;
  Vector r = zeta - data.x() * beta_init;
  auto [sweeps, ok] = cd_minimize(ws, r, res.beta, eta, penalty, opts);
  res.sweeps = sweeps;
  res.converged = ok;
  return res;
}

double penalized_objective(const Dataset& data, const SmoothLoss& loss, const PenaltySpec& penalty,
                           const Coefficients& theta) {
  check_theta(data, theta);
  Vector u;
  sparse_predictor(data.x(), theta, u);
  return loss.value(data.y(), u) + penalty.value(theta.beta);
}

double kkt_violation(const Dataset& data, const SmoothLoss& loss, const PenaltySpec& penalty,
                     const Coefficients& theta) {
  check_theta(data, theta);
  Vector u, z;
  sparse_predictor(data.x(), theta, u);
  loss.working_gradient(data.y(), u, z);
  return kkt_from_gradient(data, z.mean(), gradient_vector(data, z), penalty, theta.beta);
}

FitResult fit_mm(const Dataset& data, const SmoothLoss& loss, const PenaltySpec& penalty,
                 const Coefficients& init, const SolverOptions& opts) {
  penalty.validate();
  opts.validate();
  check_theta(data, init);
  data.require_nondegenerate();
  if (!data.x().allFinite()) throw DataError("design contains NaN or infinite values");
  if (!init.all_finite()) throw DataError("initial coefficients are not finite");

  const bool closed_form_ok = penalty.lambda == 0.0 || penalty.alpha == 0.0;
  bool closed_form = false;
  switch (opts.rule) {
    case UpdateRule::Auto:
      closed_form = closed_form_ok;
      break;
    case UpdateRule::CoordinateDescent:
      closed_form = false;
      break;
    case UpdateRule::ClosedForm:
      if (!closed_form_ok)
        throw ConfigError("closed-form updates need lambda == 0 or alpha == 0");
      closed_form = true;
      break;
  }

  const double eta = loss.curvature() * opts.eta_inflation;
  const Matrix& x = data.x();
  const Vector& y = data.y();

  FitResult res;
  res.penalty = penalty;
  res.loss_kind = loss.kind();
  res.coefficients = init;
  Coefficients& theta = res.coefficients;
  const auto& constant = data.constant_columns();
  for (Index j = 0; j < data.p(); ++j)
    if (constant[static_cast<std::size_t>(j)]) theta.beta[j] = 0.0;

  Vector u, z;
  sparse_predictor(x, theta, u);
  double obj = loss.value(y, u) + penalty.value(theta.beta);
  auto& diag = res.diagnostics;
  diag.objective_trace.push_back(obj);

  auto current_kkt = [&]() {
    loss.working_gradient(y, u, z);
    return kkt_from_gradient(data, z.mean(), gradient_vector(data, z), penalty, theta.beta);
  };

  diag.kkt_max_violation = current_kkt();
  if (diag.kkt_max_violation <= opts.kkt_tolerance) {
    diag.converged = true;
    return res;
  }

  std::optional<NormalSystem> system;
  std::optional<CdWorkspace> ws;
  if (closed_form)
    system.emplace(data, eta, penalty.lambda);
  else
    ws.emplace(make_workspace(data));

  Vector r;
  bool kkt_fresh = true;
  for (int it = 1; it <= opts.max_mm_iterations; ++it) {
    if (!kkt_fresh) loss.working_gradient(y, u, z);
    const double z_bar = z.mean();
    theta.beta0 -= z_bar / eta;
    if (closed_form) {
      Vector rhs = gradient_vector(data, z);
      if (penalty.lambda > 0.0) rhs += penalty.lambda * theta.beta;
      theta.beta -= system->solve(rhs);
    } else {
      r = -(z.array() - z_bar).matrix() / eta;
      cd_minimize(*ws, r, theta.beta, eta, penalty, opts);
    }
    sparse_predictor(x, theta, u);
    const double next = loss.value(y, u) + penalty.value(theta.beta);
    diag.objective_trace.push_back(next);
    diag.iterations = it;
    const double rel = std::abs(obj - next) / std::max(1.0, std::abs(obj));
    obj = next;
    kkt_fresh = false;
    if (rel < opts.mm_tolerance) {
      diag.kkt_max_violation = current_kkt();
      kkt_fresh = true;
      if (diag.kkt_max_violation <= opts.kkt_tolerance) {
        diag.converged = true;
        return res;
      }
    }
  }
  if (!kkt_fresh) diag.kkt_max_violation = current_kkt();
  return res;
}

FitResult fit_ridge_newton(const Dataset& data, const SmoothLoss& loss, double lambda,
                           const Coefficients& init, const SolverOptions& opts) {
  const PenaltySpec penalty(lambda, 0.0);
  opts.validate();
  check_theta(data, init);
  data.require_nondegenerate();
  if (!init.all_finite()) throw DataError("initial coefficients are not finite");

  const Matrix& x = data.x();
  const Vector& y = data.y();
  const Index n = data.n();
  const Index p = data.p();
  const double inv_n = 1.0 / static_cast<double>(n);

  FitResult res;
  res.penalty = penalty;
  res.loss_kind = loss.kind();
  res.coefficients = init;
  Coefficients& theta = res.coefficients;
  const auto& constant = data.constant_columns();
  for (Index j = 0; j < p; ++j)
    if (constant[static_cast<std::size_t>(j)]) theta.beta[j] = 0.0;

  Vector u = x * theta.beta;
  u.array() += theta.beta0;
  double obj = loss.value(y, u) + penalty.value(theta.beta);
  auto& diag = res.diagnostics;
  diag.objective_trace.push_back(obj);

  Vector z, w, grad(p + 1), dir(p + 1);
  auto refresh_gradient = [&] {
    loss.working_gradient(y, u, z);
    grad[0] = z.mean();
    grad.tail(p) = x.transpose() * z * inv_n + lambda * theta.beta;
    for (Index j = 0; j < p; ++j)
      if (constant[static_cast<std::size_t>(j)]) grad[j + 1] = 0.0;
    return grad.cwiseAbs().maxCoeff();
  };

  diag.kkt_max_violation = refresh_gradient();
  if (diag.kkt_max_violation <= opts.kkt_tolerance) {
    diag.converged = true;
    return res;
  }

  Matrix xt(n, p + 1);
  xt.col(0).setOnes();
  xt.rightCols(p) = x;
  Matrix a(n, p + 1), h(p + 1, p + 1);
  double damping = 0.0;
  const int max_iter = std::min(opts.max_mm_iterations, 500);
  Coefficients trial;
  Vector u_trial;

  for (int it = 1; it <= max_iter; ++it) {
    loss.curvature_weights(y, u, w);
    a = xt.array().colwise() * w.array().sqrt();
    h.setZero();
    h.selfadjointView<Eigen::Lower>().rankUpdate(a.transpose(), inv_n);
    h.diagonal().tail(p).array() += lambda;
    for (Index j = 0; j < p; ++j)
      if (constant[static_cast<std::size_t>(j)]) h(j + 1, j + 1) += 1.0;
    const double scale = std::max(h.diagonal().maxCoeff(), 1e-300);

    // Levenberg-style damping until the system is positive definite and the
    // step is a descent direction.
    bool have_dir = false;
    for (int k = 0; k < 40 && !have_dir; ++k) {
      Matrix hd = h;
      hd.diagonal().array() += damping;
      Eigen::LLT<Matrix, Eigen::Lower> llt(hd);
      if (llt.info() == Eigen::Success) {
        dir = -llt.solve(grad);
        if (dir.allFinite() && dir.dot(grad) < 0.0) {
          have_dir = true;
          break;
        }
      }
      damping = damping == 0.0 ? 1e-12 * scale : damping * 10.0;
    }
    if (!have_dir) break;
    for (Index j = 0; j < p; ++j)
      if (constant[static_cast<std::size_t>(j)]) dir[j + 1] = 0.0;

    const double slope = dir.dot(grad);
    Vector du = xt * dir;
    double step = 1.0;
    double next = obj;
    bool accepted = false;
    for (int k = 0; k < 60; ++k) {
      trial.beta0 = theta.beta0 + step * dir[0];
      trial.beta = theta.beta + step * dir.tail(p);
      u_trial = u + step * du;
      next = loss.value(y, u_trial) + penalty.value(trial.beta);
      if (std::isfinite(next) && next <= obj + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No decrease along the damped direction: stiffen and retry once more.
      damping = std::max(damping * 100.0, 1e-8 * scale);
      diag.iterations = it;
      continue;
    }
    damping = step == 1.0 ? damping * 0.1 : damping * 10.0;
    if (damping < 1e-14 * scale) damping = 0.0;

    std::swap(theta, trial);
    std::swap(u, u_trial);
    const double rel = std::abs(obj - next) / std::max(1.0, std::abs(obj));
    obj = next;
    diag.objective_trace.push_back(obj);
    diag.iterations = it;
    diag.kkt_max_violation = refresh_gradient();
    if (diag.kkt_max_violation <= opts.kkt_tolerance) {
      diag.converged = true;
      return res;
    }
    if (rel == 0.0 && step < 1e-12) break;
  }
  return res;
}

FitResult fit_l2e(const Dataset& data, const PenaltySpec& penalty, const Coefficients& init,
                  const SolverOptions& opts) {
  return fit_mm(data, SmoothLoss(LossKind::L2E), penalty, init, opts);
}

}  // namespace l2e
