#include "hiernet/model.hpp"

#include "hiernet/features.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hiernet {

double soft_threshold(double c, double lam) {
  if (c > lam) return c - lam;
  if (c < -lam) return c + lam;
  return 0.0;
}

double zero_threshold(double block_sup_norm, double rel_tol) {
  return rel_tol * std::max(1.0, block_sup_norm);
}

namespace {

void check_dims(const FitState& s, const Dataset& d, const InteractionBasis& b) {
  const Index p = d.p();
  if (s.beta_plus.size() != p || s.beta_minus.size() != p || s.theta.rows() != p ||
      s.theta.cols() != p || b.p() != p || b.n() != d.n()) {
    throw InputError("fit state dimensions do not match the data");
  }
}

double offdiag_l1(const Matrix& theta) {
  return theta.cwiseAbs().sum() - theta.diagonal().cwiseAbs().sum();
}

double offdiag_sq(const Matrix& theta) {
  return theta.squaredNorm() - theta.diagonal().squaredNorm();
}

double penalty_terms(const FitState& s) {
  const double lam = s.lambda;
  const double eps = s.eps_ridge;
  return lam * (s.beta_plus.sum() + s.beta_minus.sum()) + 0.5 * lam * offdiag_l1(s.theta) +
         0.5 * eps * (offdiag_sq(s.theta) + s.beta_plus.squaredNorm() + s.beta_minus.squaredNorm());
}

Vector linear_part(const FitState& s, const Dataset& d, const InteractionBasis& b) {
  Vector eta = d.x_std * s.beta();
  Vector zs;
  b.z_times(effective_pair_vector(s.theta, b), zs);
  return eta + zs;
}

}  // namespace

double logistic_loss(const Vector& y01, const Vector& eta) {
  double total = 0.0;
  for (Index i = 0; i < eta.size(); ++i) {
    const double e = eta(i);
    // log(1 + exp(e)) computed without overflow
    const double softplus = e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
    total += softplus - y01(i) * e;
  }
  return total;
}

double objective_weak(const FitState& state, const Dataset& data, const InteractionBasis& basis) {
  check_dims(state, data, basis);
  const Vector r = data.y_centered - linear_part(state, data, basis);
  return 0.5 * r.squaredNorm() + penalty_terms(state);
}

double objective_strong(const FitState& state, const Dataset& data, const InteractionBasis& basis) {
  return objective_weak(state, data, basis);
}

double objective(const FitState& state, const Dataset& data, const InteractionBasis& basis) {
  if (state.loss == LossKind::gaussian) return objective_weak(state, data, basis);
  check_dims(state, data, basis);
  Vector eta = linear_part(state, data, basis);
  eta.array() += state.beta0;
  return logistic_loss(data.y_raw(), eta) + penalty_terms(state);
}

double penalty_reformulation_value(const Vector& beta, const Matrix& theta, double lambda) {
  double total = 0.0;
  for (Index j = 0; j < beta.size(); ++j) {
    const double row = theta.row(j).cwiseAbs().sum() - std::abs(theta(j, j));
    total += std::max(std::abs(beta(j)), row);
  }
  return lambda * total + 0.5 * lambda * offdiag_l1(theta);
}

Matrix effective_interactions(const Matrix& theta) {
  Matrix e = 0.5 * (theta + theta.transpose());
  e.diagonal().setZero();
  return e;
}

SparsityMetrics sparsity_metrics(const Vector& beta, const Matrix& theta, double zero_tol) {
  const Index p = beta.size();
  const Matrix eff = effective_interactions(theta);
  const double bt = zero_threshold(p ? beta.cwiseAbs().maxCoeff() : 0.0, zero_tol);
  const double tt = zero_threshold(p ? eff.cwiseAbs().maxCoeff() : 0.0, zero_tol);
  SparsityMetrics m;
  std::vector<bool> measured(static_cast<std::size_t>(p), false);
  for (Index j = 0; j < p; ++j) {
    if (std::abs(beta(j)) > bt) {
      ++m.parameter_sparsity;
      measured[static_cast<std::size_t>(j)] = true;
    }
  }
  for (Index j = 0; j < p; ++j) {
    for (Index k = j + 1; k < p; ++k) {
      if (std::abs(eff(j, k)) > tt) {
        ++m.parameter_sparsity;
        measured[static_cast<std::size_t>(j)] = true;
        measured[static_cast<std::size_t>(k)] = true;
      }
    }
  }
  m.practical_sparsity = std::count(measured.begin(), measured.end(), true);
  return m;
}

SparsityMetrics sparsity_metrics(const FitState& state, double zero_tol) {
  return sparsity_metrics(state.beta(), state.theta, zero_tol);
}

Index hierarchy_violations(const Vector& beta, const Matrix& theta, Hierarchy mode,
                           double zero_tol) {
  const Index p = beta.size();
  if (p == 0) return 0;
  const Matrix eff = effective_interactions(theta);
  const double bt = zero_threshold(beta.cwiseAbs().maxCoeff(), zero_tol);
  const double tt = zero_threshold(eff.cwiseAbs().maxCoeff(), zero_tol);
  Index bad = 0;
  for (Index j = 0; j < p; ++j) {
    for (Index k = j + 1; k < p; ++k) {
      if (std::abs(eff(j, k)) <= tt) continue;
      const bool mj = std::abs(beta(j)) > bt;
      const bool mk = std::abs(beta(k)) > bt;
      const bool ok = mode == Hierarchy::strong ? (mj && mk) : (mj || mk);
      if (!ok) ++bad;
    }
  }
  return bad;
}

KktReport kkt_check(const FitState& state, const Dataset& data, const InteractionBasis& basis,
                    Hierarchy mode, double tol) {
  check_dims(state, data, basis);
  if (!state.converged) {
    throw InputError("kkt_check: fit did not converge (" + std::to_string(state.iterations) +
                     " iterations); refusing to certify");
  }
  if (state.loss != LossKind::gaussian) {
    throw InputError("kkt_check: only the quadratic loss is supported");
  }
  const Index p = data.p();
  const double lam = state.lambda;
  const Vector beta = state.beta();
  const Vector r = data.y_centered - linear_part(state, data, basis);
  const Vector xr = data.x_std.transpose() * r;
  Vector zr;
  basis.zt_times(r, zr);
  const Vector eff = effective_pair_vector(state.theta, basis);

  const double bt = zero_threshold(p ? beta.cwiseAbs().maxCoeff() : 0.0);

  KktReport rep;
  rep.alpha_hat = Vector::Zero(p);
  double main_viol = 0.0;
  double feas_viol = 0.0;
  double comp_viol = 0.0;

  // Largest |z_jk' r| in each row, used when alpha_j is not pinned by a
  // nonzero main effect.
  Vector row_max_zr = Vector::Zero(p);
  for (Index u = 0; u < basis.num_pairs(); ++u) {
    const auto [j, k] = basis.pair_at(u);
    row_max_zr(j) = std::max(row_max_zr(j), std::abs(zr(u)));
    row_max_zr(k) = std::max(row_max_zr(k), std::abs(zr(u)));
  }

  for (Index j = 0; j < p; ++j) {
    const double bp = state.beta_plus(j);
    const double bm = state.beta_minus(j);
    const double row_l1 = state.theta.row(j).cwiseAbs().sum() - std::abs(state.theta(j, j));
    const double slack = bp + bm - row_l1;
    feas_viol = std::max({feas_viol, -bp, -bm, -slack});

    double a;
    if (std::abs(beta(j)) > bt) {
      a = lam - (beta(j) > 0 ? xr(j) : -xr(j));
    } else if (mode == Hierarchy::strong) {
      a = lam - std::abs(xr(j));
    } else {
      a = 0.5 * (row_max_zr(j) - lam);
    }
    a = std::clamp(a, 0.0, lam);
    rep.alpha_hat(j) = a;

    const double nx2 = data.x_std.col(j).squaredNorm();
    const double nx = std::sqrt(nx2);
    const double partial = xr(j) + nx2 * beta(j);
    main_viol = std::max(main_viol, std::abs(nx * beta(j) - soft_threshold(partial, lam - a) / nx));
    comp_viol = std::max(comp_viol, std::abs(a * slack));
  }

  double inter_viol = 0.0;
  for (Index u = 0; u < basis.num_pairs(); ++u) {
    const auto [j, k] = basis.pair_at(u);
    const double nz2 = basis.pair_sq_norms()(u);
    if (nz2 <= 0.0) continue;
    const double nz = std::sqrt(nz2);
    const double aj = rep.alpha_hat(j);
    const double ak = rep.alpha_hat(k);
    const double thr = mode == Hierarchy::strong ? lam + aj + ak : lam + 2.0 * std::min(aj, ak);
    const double partial = zr(u) + nz2 * eff(u);
    inter_viol = std::max(inter_viol, std::abs(nz * eff(u) - soft_threshold(partial, thr) / nz));
  }
  if (mode == Hierarchy::strong && p > 0) {
    const double asym = (state.theta - state.theta.transpose()).cwiseAbs().maxCoeff();
    feas_viol = std::max(feas_viol, asym);
  }

  rep.max_stationarity_violation = std::max({main_viol, inter_viol, feas_viol});
  rep.max_complementary_slackness_violation = comp_viol;
  const bool main_ok = main_viol <= tol && feas_viol <= tol && comp_viol <= tol;
  rep.pass = main_ok && inter_viol <= tol;
  if (rep.pass) {
    rep.status = KktReport::Status::pass;
  } else if (mode == Hierarchy::weak && main_ok) {
    // weak-mode duals are recovered from the main-effect equations only
    rep.status = KktReport::Status::inconclusive;
  } else {
    rep.status = KktReport::Status::fail;
  }
  std::ostringstream os;
  os << "main=" << main_viol << " interaction=" << inter_viol << " feasibility=" << feas_viol
     << " complementary=" << comp_viol;
  rep.detail = os.str();
  return rep;
}

}  // namespace hiernet
