#pragma once

#include "l2elogit/loss.hpp"
#include "l2elogit/types.hpp"

#include <optional>

namespace l2e {

enum class UpdateRule {
  Auto,               // closed form when lambda == 0 or alpha == 0, else coordinate descent
  CoordinateDescent,  // always coordinate descent
  ClosedForm,         // normal equations; requires lambda == 0 or alpha == 0
};

/// Algorithm for the ridge (alpha = 0) support refits of cross-validation.
enum class RefitSolver { Newton, MM };

struct SolverOptions {
  int max_mm_iterations = 10000;
  int max_cd_sweeps = 1000;
  double mm_tolerance = 1e-8;  // relative objective change
  double cd_tolerance = 1e-7;  // max absolute coefficient change per sweep
  double kkt_tolerance = 1e-6;
  double eta_inflation = 1.0;  // multiplier >= 1 on the curvature bound
  UpdateRule rule = UpdateRule::Auto;
  RefitSolver refit_solver = RefitSolver::Newton;

  void validate() const;
};

/// Quadratic surrogate of the smooth loss anchored at theta_tilde:
///   loss(theta~) + (1/n) z' X~ (theta - theta~) + (eta / 2n) |X~ (theta - theta~)|^2
struct MajorizationState {
  Coefficients anchor;
  double anchor_loss = 0.0;
  Vector z;
  double z_bar = 0.0;
  Vector zeta;  // working response X beta~ - (z - z_bar) / eta
  double eta = 0.0;
};

/// L2E surrogate; eta must be at least curvature_bound().value.
MajorizationState majorize(const Dataset& data, const Coefficients& theta_tilde, double eta);

MajorizationState majorize(const Dataset& data, const Coefficients& theta_tilde,
                           const SmoothLoss& loss, double eta);

double surrogate_value(const Dataset& data, const MajorizationState& state,
                       const Coefficients& theta);

/// Unpenalized MM update beta - (1/eta) (X'X)^{-1} X' z. Throws
/// RankDeficientError when X'X is singular; use mm_step_ridge instead.
Coefficients mm_step_full_rank(const Dataset& data, const Coefficients& theta,
                               const MajorizationState& state);

/// Ridge MM update for the objective loss + (lambda/2)|beta|^2:
///   beta - ((eta/n) X'X + lambda I)^{-1} ((1/n) X' z + lambda beta)
Coefficients mm_step_ridge(const Dataset& data, const Coefficients& theta,
                           const MajorizationState& state, const PenaltySpec& penalty);

/// S(a, kappa) = sign(a) max(|a| - kappa, 0).
inline double soft_threshold(double a, double kappa) {
  if (a > kappa) return a - kappa;
  if (a < -kappa) return a + kappa;
  return 0.0;
}

struct CdResult {
  Vector beta;
  int sweeps = 0;
  bool converged = false;
};

/// (eta/2n) |zeta - X beta|^2 + J(beta).
double penalized_ls_objective(const Dataset& data, const Vector& zeta, const PenaltySpec& penalty,
                              const Vector& beta, double eta);

/// Minimizes penalized_ls_objective by cyclic coordinate descent with an
/// active set: sweep the nonzero coordinates until two consecutive sweeps move
/// less than cd_tolerance, then sweep everything once; repeat while the full
/// sweep admits new coordinates.
CdResult solve_penalized_ls_cd(const Dataset& data, const Vector& zeta, const PenaltySpec& penalty,
                               const Vector& beta_init, double eta, const SolverOptions& opts = {});

struct FitResult {
  Coefficients coefficients;
  FitDiagnostics diagnostics;
  PenaltySpec penalty;
  LossKind loss_kind = LossKind::L2E;
};

/// loss(theta) + J(beta).
double penalized_objective(const Dataset& data, const SmoothLoss& loss, const PenaltySpec& penalty,
                           const Coefficients& theta);

/// Largest violation of the stationarity (subgradient) conditions of
/// penalized_objective, including the unpenalized intercept.
double kkt_violation(const Dataset& data, const SmoothLoss& loss, const PenaltySpec& penalty,
                     const Coefficients& theta);

/// MM with re-majorization at every iterate; the inner problem is solved in
/// closed form or by solve_penalized_ls_cd depending on opts.rule.
FitResult fit_mm(const Dataset& data, const SmoothLoss& loss, const PenaltySpec& penalty,
                 const Coefficients& init, const SolverOptions& opts = {});

/// Ridge problems loss(theta) + (lambda/2)|beta|^2 by damped Newton steps
/// with Armijo backtracking, using SmoothLoss::curvature_weights. Every
/// accepted step lowers the objective. Used for the support refits, where
/// the ridge level is tiny and the MM iterations crawl.
FitResult fit_ridge_newton(const Dataset& data, const SmoothLoss& loss, double lambda,
                           const Coefficients& init, const SolverOptions& opts = {});

/// Elastic Net penalized logistic L2E.
FitResult fit_l2e(const Dataset& data, const PenaltySpec& penalty, const Coefficients& init,
                  const SolverOptions& opts = {});

}  // namespace l2e
