#include "hiernet/lasso.hpp"

#include "hiernet/features.hpp"
#include "hiernet/model.hpp"
#include "hiernet/weak_solver.hpp"

#include <cmath>

namespace hiernet {

double lasso_lambda_max(const Matrix& design, const Vector& y) {
  if (design.cols() == 0) return 0.0;
  return (design.transpose() * y).lpNorm<Eigen::Infinity>();
}

LassoPath fit_lasso(const Matrix& design, const Vector& y, const std::vector<double>& lambdas,
                    const LassoOptions& opts) {
  check_descending(lambdas);
  if (design.rows() != y.size()) throw InputError("design rows do not match response length");
  const Index m = design.cols();
  const Vector sq = design.colwise().squaredNorm().transpose();
  const double scale = std::max(1.0, lasso_lambda_max(design, y));
  const double tol = opts.tol * scale;

  LassoPath out;
  out.lambdas = lambdas;
  out.coefs = Matrix::Zero(m, static_cast<Index>(lambdas.size()));
  Vector b = Vector::Zero(m);
  Vector r = y;
  std::vector<bool> active(static_cast<std::size_t>(m), false);

  // One coordinate update; returns the weighted change.
  auto update = [&](Index j, double lam) {
    if (sq(j) <= 0.0) return 0.0;
    const double old = b(j);
    const double c = design.col(j).dot(r) + sq(j) * old;
    const double nb = soft_threshold(c, lam) / sq(j);
    if (nb == old) return 0.0;
    r.noalias() -= (nb - old) * design.col(j);
    b(j) = nb;
    if (nb != 0.0) active[static_cast<std::size_t>(j)] = true;
    return sq(j) * std::abs(nb - old);
  };

  for (std::size_t l = 0; l < lambdas.size(); ++l) {
    const double lam = lambdas[l];
    Index sweeps = 0;
    bool converged = false;
    while (sweeps < opts.max_sweeps) {
      double full_change = 0.0;
      for (Index j = 0; j < m; ++j) full_change = std::max(full_change, update(j, lam));
      ++sweeps;
      if (full_change <= tol) {
        converged = true;
        break;
      }
      while (sweeps < opts.max_sweeps) {
        double change = 0.0;
        for (Index j = 0; j < m; ++j)
          if (active[static_cast<std::size_t>(j)]) change = std::max(change, update(j, lam));
        ++sweeps;
        if (change <= tol) break;
      }
    }
    out.coefs.col(static_cast<Index>(l)) = b;
    out.sweeps.push_back(sweeps);
    out.converged.push_back(converged);
  }
  return out;
}

Matrix lasso_design(const Dataset& data, const InteractionBasis& basis, bool with_interactions) {
  if (!with_interactions) return data.x_std;
  Matrix d(data.n(), data.p() + basis.num_pairs());
  d.leftCols(data.p()) = data.x_std;
  if (basis.num_pairs() > 0) d.rightCols(basis.num_pairs()) = basis.dense_unique();
  return d;
}

FitState lasso_state(const Vector& coef, const InteractionBasis& basis, bool with_interactions,
                     double lambda, Method method) {
  const Index p = basis.p();
  FitState s = FitState::zeros(p, lambda, 0.0);
  s.method = method;
  const Vector beta = coef.head(p);
  s.beta_plus = beta.cwiseMax(0.0);
  s.beta_minus = (-beta).cwiseMax(0.0);
  if (with_interactions) {
    for (Index u = 0; u < basis.num_pairs(); ++u) {
      const auto [j, k] = basis.pair_at(u);
      s.theta(j, k) = s.theta(k, j) = coef(p + u);
    }
  }
  return s;
}

PathResult fit_lasso_path(const Dataset& data, const InteractionBasis& basis,
                          const std::vector<double>& lambdas, bool with_interactions,
                          const LassoOptions& opts) {
  const Matrix design = lasso_design(data, basis, with_interactions);
  const LassoPath lp = fit_lasso(design, data.y_centered, lambdas, opts);
  const Method method = with_interactions ? Method::apl : Method::mel;
  PathResult out;
  out.lambdas = lambdas;
  for (std::size_t l = 0; l < lambdas.size(); ++l) {
    PathPoint pt;
    pt.fit = lasso_state(lp.coefs.col(static_cast<Index>(l)), basis, with_interactions, lambdas[l],
                         method);
    pt.fit.converged = lp.converged[l];
    pt.fit.iterations = lp.sweeps[l];
    pt.fit.objective = objective(pt.fit, data, basis);
    pt.objective = pt.fit.objective;
    const SparsityMetrics m = sparsity_metrics(pt.fit);
    pt.parameter_sparsity = m.parameter_sparsity;
    pt.practical_sparsity = m.practical_sparsity;
    out.points.push_back(std::move(pt));
  }
  return out;
}

}  // namespace hiernet
