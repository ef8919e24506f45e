#pragma once

#include "hiernet/types.hpp"

namespace hiernet {

struct LassoOptions {
  Index max_sweeps = 100000;
  /// Stop when max_j ||x_j||^2 |change in b_j| <= tol * max(1, lambda_max).
  double tol = 1e-10;
};

/// Coefficients (columns x lambdas) of the lasso path
/// 1/2 ||y - D b||^2 + lambda ||b||_1 for centered y and design columns.
struct LassoPath {
  std::vector<double> lambdas;
  Matrix coefs;
  std::vector<Index> sweeps;
  std::vector<bool> converged;
};

/// max_j |d_j' y|.
double lasso_lambda_max(const Matrix& design, const Vector& y);

/// Cyclic coordinate descent, warm-started along strictly descending
/// lambdas, iterating on the active set between full sweeps.
LassoPath fit_lasso(const Matrix& design, const Vector& y, const std::vector<double>& lambdas,
                    const LassoOptions& opts = {});

/// Columns of the main-effects lasso (x_std) or all-pairs lasso
/// (x_std : Z over unordered pairs).
Matrix lasso_design(const Dataset& data, const InteractionBasis& basis, bool with_interactions);

/// Express a lasso coefficient vector over lasso_design columns as a
/// FitState (beta = b+ - b-, Theta_jk = Theta_kj = pair coefficient), so
/// that prediction and metrics are shared with the hierarchical fits.
FitState lasso_state(const Vector& coef, const InteractionBasis& basis, bool with_interactions,
                     double lambda, Method method);

/// MEL / APL path on a standardized dataset.
PathResult fit_lasso_path(const Dataset& data, const InteractionBasis& basis,
                          const std::vector<double>& lambdas, bool with_interactions,
                          const LassoOptions& opts = {});

}  // namespace hiernet
