#pragma once

#include "hiernet/types.hpp"
#include "hiernet/weak_solver.hpp"

namespace hiernet {

struct AdmmOptions {
  double rho = 1.0;
  double tol_primal = 1e-5;
  double tol_dual = 1e-5;
  Index max_iters = 500;
  bool adaptive_rho = true;
  LossKind loss = LossKind::gaussian;
};

/// Splitting variables carried between ADMM iterations (and across lambdas
/// on a path). `block` is the last (b+, b-, Theta) block solve.
struct AdmmState {
  Matrix omega;
  Matrix u;
  double rho = 1.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  FitState block;

  bool initialized(Index p) const { return omega.rows() == p && u.rows() == p && block.p() == p; }
};

struct AdmmResiduals {
  double primal = 0.0;
  double dual = 0.0;
};

/// primal = ||Theta - Omega||_F, dual = rho ||Omega - Omega_prev||_F.
AdmmResiduals admm_residuals(const Matrix& theta, const Matrix& omega, const Matrix& omega_prev,
                             double rho);

/// argmin over symmetric Omega of -<U, Omega> + rho/2 ||Theta - Omega||_F^2.
Matrix omega_update(const Matrix& theta, const Matrix& u, double rho);

/// Strong hierarchical lasso by ADMM on Theta = Omega.
/// The returned theta is exactly symmetric. If `io` is given and holds a
/// state of the right size it is used as a warm start, and it receives the
/// final splitting state.
FitState fit_strong(const Dataset& data, const InteractionBasis& basis, double lambda,
                    const SolveOptions& opts = {}, const AdmmOptions& admm = {},
                    AdmmState* io = nullptr);

/// Warm-started strong path over strictly descending lambdas.
PathResult fit_strong_path(const Dataset& data, const InteractionBasis& basis,
                           const std::vector<double>& lambdas, const SolveOptions& opts = {},
                           const AdmmOptions& admm = {});

}  // namespace hiernet
