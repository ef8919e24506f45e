#pragma once

#include "hiernet/types.hpp"

#include <optional>

namespace hiernet {

/// Gradient blocks of a smooth loss with respect to (beta0, b+, b-, Theta).
struct LossGradient {
  double beta0 = 0.0;
  Vector beta_plus;
  Vector beta_minus;
  Matrix theta;  // zero diagonal
};

/// Smooth loss q of the hierarchical lasso: squared error or binomial
/// deviance, optionally plus the ADMM augmentation
/// <U, Theta - Omega> + rho/2 ||Theta - Omega||_F^2 (off-diagonal entries).
struct SmoothLoss {
  enum class Kind { gaussian, logistic, augmented_gaussian, augmented_logistic };
  Kind kind = Kind::gaussian;
  double rho = 0.0;
  Matrix omega;
  Matrix u;

  static SmoothLoss gaussian();
  static SmoothLoss logistic();
  static SmoothLoss augmented(double rho, Matrix omega, Matrix u,
                               LossKind base = LossKind::gaussian);

  bool is_logistic() const { return kind == Kind::logistic || kind == Kind::augmented_logistic; }
  bool is_augmented() const {
    return kind == Kind::augmented_gaussian || kind == Kind::augmented_logistic;
  }
  LossKind loss_kind() const { return is_logistic() ? LossKind::logistic : LossKind::gaussian; }
  /// Bound on the curvature of the data term per unit of X'X.
  double curvature() const { return is_logistic() ? 0.25 : 1.0; }

  double value(const FitState& s, const Dataset& d, const InteractionBasis& b) const;
  LossGradient gradient(const FitState& s, const Dataset& d, const InteractionBasis& b) const;
};

struct SolveOptions {
  Index max_iters = 5000;
  double rel_tol = 1e-7;
  double eps_ridge_factor = 1e-8;
  bool acceleration = true;
  double backtracking_shrink = 0.5;
  /// Record the objective after every iteration in diagnostics.
  bool record_trace = true;
  /// Precomputed hessian_bound(data, basis); 0 means compute it.
  double data_lipschitz = 0.0;
};

/// Proximal gradient (with optional momentum) for the weak hierarchical
/// lasso at one lambda.
FitState fit_weak(const Dataset& data, const InteractionBasis& basis, double lambda,
                  const SmoothLoss& loss = SmoothLoss::gaussian(), const SolveOptions& opts = {},
                  const std::optional<FitState>& warm_start = std::nullopt);

/// Smallest lambda at which the all-zero fit is optimal for the weak (and
/// hence the strong) problem with squared-error loss:
/// max_j max(|x_j'y|, (2|x_j'y| + max_k |z_jk'y|) / 3).
double lambda_max(const Dataset& data, const InteractionBasis& basis);

/// Same threshold for the binomial loss at the intercept-only fit.
double lambda_max(const Dataset& data, const InteractionBasis& basis, LossKind loss);

/// `count` log-spaced values from lambda_max down to ratio * lambda_max.
std::vector<double> lambda_grid(double lmax, Index count, double ratio);

/// Warm-started path over strictly descending lambdas.
PathResult fit_weak_path(const Dataset& data, const InteractionBasis& basis,
                         const std::vector<double>& lambdas,
                         const SmoothLoss& loss = SmoothLoss::gaussian(),
                         const SolveOptions& opts = {});

/// Largest eigenvalue of X X' + 1/2 Z Z' (power iteration, 30 steps).
double hessian_bound(const Dataset& data, const InteractionBasis& basis, Index iters = 30);

/// 1 / L with L = curvature * hessian_bound + eps (+ rho for the augmented loss).
double estimate_step(const Dataset& data, const InteractionBasis& basis, const SmoothLoss& loss,
                     double eps_ridge = 0.0);

/// Throws InputError unless lambdas are positive and strictly descending.
void check_descending(const std::vector<double>& lambdas);

}  // namespace hiernet
