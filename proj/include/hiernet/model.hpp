#pragma once

#include "hiernet/types.hpp"

namespace hiernet {

/// Relative zero threshold: a coefficient is nonzero iff
/// |value| > kZeroTol * max(1, ||coefficient block||_inf).
inline constexpr double kZeroTol = 1e-8;

/// sign(c) * max(|c| - lam, 0).
double soft_threshold(double c, double lam);

/// Threshold for one coefficient block (scaled by the block's sup-norm).
double zero_threshold(double block_sup_norm, double rel_tol = kZeroTol);

/// 1/2 ||y - X b - Z vec(Theta)/2||^2 + lambda 1'(b+ + b-) + lambda/2 ||Theta||_1
///   + eps/2 (||Theta||_F^2 + ||b+||^2 + ||b-||^2).
/// Feasibility is not checked. Uses state.lambda and state.eps_ridge.
double objective_weak(const FitState& state, const Dataset& data, const InteractionBasis& basis);

/// Same formula as objective_weak; the strong problem only adds the
/// symmetry constraint.
double objective_strong(const FitState& state, const Dataset& data, const InteractionBasis& basis);

/// Objective with the loss recorded in state.loss (gaussian or logistic).
double objective(const FitState& state, const Dataset& data, const InteractionBasis& basis);

/// Negative binomial log-likelihood for 0/1 responses at linear predictor eta.
double logistic_loss(const Vector& y01, const Vector& eta);

/// lambda * sum_j max(|beta_j|, ||Theta_j||_1) + lambda/2 ||Theta||_1.
double penalty_reformulation_value(const Vector& beta, const Matrix& theta, double lambda);

/// Certify a converged gaussian fit against the soft-thresholding
/// characterization of the hierarchical lasso solution. Violations are
/// measured on unit-norm-rescaled columns. Throws InputError for a
/// non-converged state or a non-gaussian fit.
KktReport kkt_check(const FitState& state, const Dataset& data, const InteractionBasis& basis,
                    Hierarchy mode, double tol);

/// (Theta + Theta') / 2.
Matrix effective_interactions(const Matrix& theta);

struct SparsityMetrics {
  Index parameter_sparsity = 0;
  Index practical_sparsity = 0;
};

/// Counts nonzero mains + unordered interactions, and the number of raw
/// variables a fitted model needs.
SparsityMetrics sparsity_metrics(const FitState& state, double zero_tol = kZeroTol);
SparsityMetrics sparsity_metrics(const Vector& beta, const Matrix& theta,
                                 double zero_tol = kZeroTol);

/// Number of unordered pairs whose effective interaction is nonzero but
/// whose parents violate the requested hierarchy.
Index hierarchy_violations(const Vector& beta, const Matrix& theta, Hierarchy mode,
                           double zero_tol = kZeroTol);

}  // namespace hiernet
