#pragma once

#include "l2elogit/loss.hpp"
#include "l2elogit/mm_solver.hpp"

namespace l2e {

/// Elastic Net penalized logistic regression by maximum likelihood,
/// minimizing (1/n) [sum log(1 + e^u) - y'u] + J(beta) with the MM scheme
/// (curvature bound 1/4).
FitResult fit_mle_logistic(const Dataset& data, const PenaltySpec& penalty,
                           const Coefficients& init, const SolverOptions& opts = {});

/// Hybrid Huberized SVM: (1/2n) sum phi(s_i u_i) + J(beta), s = 2y - 1.
FitResult fit_hhsvm(const Dataset& data, const PenaltySpec& penalty, const HingeSpec& spec,
                    const Coefficients& init, const SolverOptions& opts = {});

/// Intercept of the covariate-free model. log(ybar / (1 - ybar)) for L2E and
/// MLE; for HHSVM the minimizer of sum phi(s_i b), found by bisection.
double null_intercept(const Dataset& data, LossKind kind, const HingeSpec& spec = {});

/// (null_intercept, 0).
Coefficients null_coefficients(const Dataset& data, LossKind kind, const HingeSpec& spec = {});

/// Dispatches to fit_l2e / fit_mle_logistic / fit_hhsvm.
FitResult fit_estimator(const Dataset& data, const SmoothLoss& loss, const PenaltySpec& penalty,
                        const Coefficients& init, const SolverOptions& opts = {});

}  // namespace l2e
