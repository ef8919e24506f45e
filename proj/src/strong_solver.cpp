#include "hiernet/strong_solver.hpp"

#include "hiernet/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hiernet {

AdmmResiduals admm_residuals(const Matrix& theta, const Matrix& omega, const Matrix& omega_prev,
                             double rho) {
  if (theta.rows() != omega.rows() || theta.cols() != omega.cols() ||
      omega.rows() != omega_prev.rows() || omega.cols() != omega_prev.cols()) {
    throw InputError("admm_residuals: shape mismatch");
  }
  return {(theta - omega).norm(), rho * (omega - omega_prev).norm()};
}

Matrix omega_update(const Matrix& theta, const Matrix& u, double rho) {
  Matrix omega = 0.5 * (theta + theta.transpose()) + (u + u.transpose()) / (2.0 * rho);
  omega.diagonal().setZero();
  return omega;
}

namespace {

/// Symmetric output: Omega on entries where both block entries are nonzero,
/// then b+/b- adjusted so that b+ + b- = max(|b|, ||theta_j||_1).
FitState finalize(const FitState& block, const Matrix& omega) {
  const Index p = block.p();
  FitState out = block;
  out.theta = Matrix::Zero(p, p);
  for (Index j = 0; j < p; ++j) {
    for (Index k = j + 1; k < p; ++k) {
      const double a = block.theta(j, k);
      const double b = block.theta(k, j);
      if (a != 0.0 && b != 0.0 && (a > 0) == (b > 0)) {
        double w = omega(j, k);
        if ((w > 0) != (a > 0)) w = 0.5 * (a + b);
        out.theta(j, k) = out.theta(k, j) = w;
      }
    }
  }
  for (Index j = 0; j < p; ++j) {
    const double beta = block.beta_plus(j) - block.beta_minus(j);
    const double target = std::max(std::abs(beta), out.theta.row(j).cwiseAbs().sum());
    out.beta_plus(j) = 0.5 * (target + beta);
    out.beta_minus(j) = 0.5 * (target - beta);
  }
  return out;
}

}  // namespace

FitState fit_strong(const Dataset& data, const InteractionBasis& basis, double lambda,
                    const SolveOptions& opts, const AdmmOptions& admm, AdmmState* io) {
  const Index p = data.p();
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InputError("lambda must be positive");
  if (!(admm.rho > 0.0) || !(admm.tol_primal > 0.0) || !(admm.tol_dual > 0.0) ||
      admm.max_iters <= 0) {
    throw InputError("invalid ADMM options");
  }
  const double eps = opts.eps_ridge_factor * lambda;

  AdmmState st;
  if (io && io->initialized(p)) {
    st = *io;
  } else {
    st.omega = Matrix::Zero(p, p);
    st.u = Matrix::Zero(p, p);
    st.rho = admm.rho;
    st.block = FitState::zeros(p, lambda, eps);
  }

  SolveOptions inner = opts;
  inner.record_trace = false;
  if (inner.data_lipschitz <= 0.0) inner.data_lipschitz = hessian_bound(data, basis);

  double rel_primal = 0.0;
  bool converged = false;
  Index it = 0;
  Index inner_iters = 0;
  std::vector<double> trace;
  for (; it < admm.max_iters; ++it) {
    const double decay = 1e-3 / static_cast<double>((it + 1) * (it + 1));
    inner.rel_tol = std::max(opts.rel_tol, std::min({1e-3, 0.1 * rel_primal, decay}));
    const bool full = inner.rel_tol == opts.rel_tol;
    st.block = fit_weak(data, basis, lambda, SmoothLoss::augmented(st.rho, st.omega, st.u, admm.loss), inner,
                        st.block);
    inner_iters += st.block.iterations;

    const Matrix omega_prev = st.omega;
    st.omega = omega_update(st.block.theta, st.u, st.rho);
    Matrix diff = st.block.theta - st.omega;
    diff.diagonal().setZero();
    st.u += st.rho * diff;
    const AdmmResiduals res = admm_residuals(st.block.theta, st.omega, omega_prev, st.rho);
    st.primal_residual = res.primal;
    st.dual_residual = res.dual;
    const double theta_norm = st.block.theta.norm();
    rel_primal = res.primal / (1.0 + theta_norm);
    if (opts.record_trace) trace.push_back(st.block.objective);

    const bool small = res.primal <= admm.tol_primal * (1.0 + theta_norm) &&
                       res.dual <= admm.tol_dual * (1.0 + st.u.norm());
    if (small && full && st.block.converged) {
      converged = true;
      ++it;
      break;
    }
    if (small) rel_primal = 0.0;  // next block solve at full tolerance
    if (admm.adaptive_rho) {
      if (res.primal > 10.0 * res.dual) {
        st.rho *= 2.0;
      } else if (res.dual > 10.0 * res.primal) {
        st.rho *= 0.5;
      }
    }
  }

  FitState out = finalize(st.block, st.omega);
  out.lambda = lambda;
  out.eps_ridge = eps;
  out.beta0 = admm.loss == LossKind::logistic ? st.block.beta0 : 0.0;
  out.method = Method::strong;
  out.loss = admm.loss;
  out.converged = converged;
  out.iterations = inner_iters;
  out.objective = objective(out, data, basis);
  out.diagnostics = Diagnostics{};
  out.diagnostics.objective_trace = std::move(trace);
  out.diagnostics.step_size = st.block.diagnostics.step_size;
  out.diagnostics.primal_residual = st.primal_residual;
  out.diagnostics.dual_residual = st.dual_residual;
  out.diagnostics.admm_iterations = it;
  if (!std::isfinite(out.objective)) throw SolverError("strong fit produced a non-finite objective");
  if (io) *io = st;
  return out;
}

PathResult fit_strong_path(const Dataset& data, const InteractionBasis& basis,
                           const std::vector<double>& lambdas, const SolveOptions& opts,
                           const AdmmOptions& admm) {
  check_descending(lambdas);
  SolveOptions inner = opts;
  if (inner.data_lipschitz <= 0.0) inner.data_lipschitz = hessian_bound(data, basis);
  PathResult out;
  out.lambdas = lambdas;
  AdmmState st;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    FitState fit;
    try {
      fit = fit_strong(data, basis, lambdas[i], inner, admm, &st);
    } catch (const SolverError& e) {
      throw SolverError("lambda index " + std::to_string(i) + ": " + e.what());
    }
    PathPoint pt;
    pt.objective = fit.objective;
    const SparsityMetrics m = sparsity_metrics(fit);
    pt.parameter_sparsity = m.parameter_sparsity;
    pt.practical_sparsity = m.practical_sparsity;
    pt.fit = std::move(fit);
    out.points.push_back(std::move(pt));
  }
  return out;
}

}  // namespace hiernet
