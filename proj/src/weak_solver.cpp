#include "hiernet/weak_solver.hpp"

#include "hiernet/features.hpp"
#include "hiernet/model.hpp"
#include "hiernet/prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace hiernet {

SmoothLoss SmoothLoss::gaussian() { return SmoothLoss{}; }

SmoothLoss SmoothLoss::logistic() {
  SmoothLoss l;
  l.kind = Kind::logistic;
  return l;
}

SmoothLoss SmoothLoss::augmented(double rho, Matrix omega, Matrix u, LossKind base) {
  SmoothLoss l;
  l.kind = base == LossKind::logistic ? Kind::augmented_logistic : Kind::augmented_gaussian;
  l.rho = rho;
  l.omega = std::move(omega);
  l.u = std::move(u);
  return l;
}

namespace {

double sigmoid(double e) {
  if (e >= 0) return 1.0 / (1.0 + std::exp(-e));
  const double z = std::exp(e);
  return z / (1.0 + z);
}

Vector linear_predictor(const Vector& bp, const Vector& bm, const Matrix& theta, const Dataset& d,
                        const InteractionBasis& b) {
  Vector eta = d.x_std * (bp - bm);
  if (b.num_pairs() > 0) {
    Vector zs;
    b.z_times(effective_pair_vector(theta, b), zs);
    eta += zs;
  }
  return eta;
}

/// Data term, its "residual" y - mean, and the augmentation term.
struct LossEval {
  double value = 0.0;
  Vector resid;
};

LossEval eval_loss(const SmoothLoss& loss, const Dataset& d, const Vector& eta, double beta0,
                   const Matrix& theta) {
  LossEval out;
  if (loss.is_logistic()) {
    const Vector y = d.y_raw();
    Vector full = eta.array() + beta0;
    out.value = logistic_loss(y, full);
    out.resid.resize(y.size());
    for (Index i = 0; i < y.size(); ++i) out.resid(i) = y(i) - sigmoid(full(i));
  } else {
    out.resid = d.y_centered - eta;
    out.value = 0.5 * out.resid.squaredNorm();
  }
  if (loss.is_augmented()) {
    Matrix diff = theta - loss.omega;
    diff.diagonal().setZero();
    double inner = loss.u.cwiseProduct(diff).sum();
    out.value += inner + 0.5 * loss.rho * diff.squaredNorm();
  }
  return out;
}

void check_loss_shapes(const SmoothLoss& loss, Index p) {
  if (!loss.is_augmented()) return;
  if (loss.omega.rows() != p || loss.omega.cols() != p || loss.u.rows() != p || loss.u.cols() != p) {
    throw InputError("augmented loss: omega/u must be p x p");
  }
  if (!(loss.rho > 0.0)) throw InputError("augmented loss: rho must be positive");
}

void check_logistic_response(const Dataset& d) {
  const Vector y = d.y_raw();
  for (Index i = 0; i < y.size(); ++i) {
    if (y(i) != 0.0 && y(i) != 1.0) {
      throw InputError("logistic response must be 0/1 (row " + std::to_string(i) + ")");
    }
  }
}

}  // namespace

double SmoothLoss::value(const FitState& s, const Dataset& d, const InteractionBasis& b) const {
  check_loss_shapes(*this, d.p());
  const Vector eta = linear_predictor(s.beta_plus, s.beta_minus, s.theta, d, b);
  return eval_loss(*this, d, eta, s.beta0, s.theta).value;
}

LossGradient SmoothLoss::gradient(const FitState& s, const Dataset& d,
                                  const InteractionBasis& b) const {
  check_loss_shapes(*this, d.p());
  const Index p = d.p();
  const Vector eta = linear_predictor(s.beta_plus, s.beta_minus, s.theta, d, b);
  const LossEval ev = eval_loss(*this, d, eta, s.beta0, s.theta);
  const Vector xr = d.x_std.transpose() * ev.resid;
  Vector zr;
  b.zt_times(ev.resid, zr);
  LossGradient g;
  g.beta0 = is_logistic() ? -ev.resid.sum() : 0.0;
  g.beta_plus = -xr;
  g.beta_minus = xr;
  g.theta = Matrix::Zero(p, p);
  for (Index u = 0; u < b.num_pairs(); ++u) {
    const auto [j, k] = b.pair_at(u);
    g.theta(j, k) = g.theta(k, j) = -0.5 * zr(u);
  }
  if (is_augmented()) {
    Matrix extra = this->u + rho * (s.theta - omega);
    extra.diagonal().setZero();
    g.theta += extra;
  }
  return g;
}

double hessian_bound(const Dataset& data, const InteractionBasis& basis, Index iters) {
  const Index n = data.n();
  if (n == 0) return 0.0;
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> nd;
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = nd(rng);
  v.normalize();
  auto apply = [&](const Vector& x) {
    Vector out = data.x_std * (data.x_std.transpose() * x);
    if (basis.num_pairs() > 0) {
      Vector zt, zz;
      basis.zt_times(x, zt);
      basis.z_times(zt, zz);
      out += 0.5 * zz;
    }
    return out;
  };
  double est = 0.0;
  for (Index it = 0; it < iters; ++it) {
    Vector w = apply(v);
    est = v.dot(w);
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    v = w / nw;
  }
  return std::max(est, v.dot(apply(v)));
}

double estimate_step(const Dataset& data, const InteractionBasis& basis, const SmoothLoss& loss,
                     double eps_ridge) {
  double lip = loss.curvature() * hessian_bound(data, basis) + eps_ridge;
  if (loss.is_augmented()) lip += loss.rho;
  if (!(lip > 0.0)) return 1.0;
  return 1.0 / lip;
}

namespace {

/// Iterate of the proximal gradient method with its cached linear predictor.
struct Point {
  Vector bp;
  Vector bm;
  Matrix theta;
  Vector eta;
};

double smooth_extra(const Point& x, double lambda, double eps) {
  return lambda * (x.bp.sum() + x.bm.sum()) +
         0.5 * eps * (x.bp.squaredNorm() + x.bm.squaredNorm() + x.theta.squaredNorm());
}

double theta_l1(const Matrix& theta) { return theta.cwiseAbs().sum(); }

/// Gradient of the full smooth part g = q + lambda 1'(b+ + b-) + eps ridge at x.
struct SmoothAt {
  double g = 0.0;
  Vector gbp;
  Vector gbm;
  Matrix gth;
  Vector resid;
};

SmoothAt smooth_at(const Point& x, double beta0, const SmoothLoss& loss, const Dataset& d,
                   const InteractionBasis& b, double lambda, double eps, bool want_grad) {
  SmoothAt out;
  const LossEval ev = eval_loss(loss, d, x.eta, beta0, x.theta);
  out.g = ev.value + smooth_extra(x, lambda, eps);
  out.resid = ev.resid;
  if (!want_grad) return out;
  const Vector xr = d.x_std.transpose() * ev.resid;
  out.gbp = (-xr).array() + lambda;
  out.gbp += eps * x.bp;
  out.gbm = xr.array() + lambda;
  out.gbm += eps * x.bm;
  Vector zr;
  b.zt_times(ev.resid, zr);
  out.gth = eps * x.theta;
  for (Index u = 0; u < b.num_pairs(); ++u) {
    const auto [j, k] = b.pair_at(u);
    out.gth(j, k) -= 0.5 * zr(u);
    out.gth(k, j) -= 0.5 * zr(u);
  }
  if (loss.is_augmented()) {
    out.gth += loss.u + loss.rho * (x.theta - loss.omega);
  }
  out.gth.diagonal().setZero();
  return out;
}

/// x+ = prox_t(v - t grad g(v)).
Point prox_step(const Point& v, const SmoothAt& sv, double t, double lambda, const Dataset& d,
                const InteractionBasis& b) {
  const Index p = d.p();
  Point out;
  out.bp.resize(p);
  out.bm.resize(p);
  out.theta = Matrix::Zero(p, p);
  ProxInput in;
  in.lambda = lambda;
  in.t = t;
  in.theta_tilde.resize(p - 1 > 0 ? p - 1 : 0);
  for (Index j = 0; j < p; ++j) {
    in.beta_plus_tilde = v.bp(j) - t * sv.gbp(j);
    in.beta_minus_tilde = v.bm(j) - t * sv.gbm(j);
    Index c = 0;
    for (Index k = 0; k < p; ++k) {
      if (k == j) continue;
      in.theta_tilde(c++) = v.theta(j, k) - t * sv.gth(j, k);
    }
    const ProxOutput o = solve_onerow(in);
    out.bp(j) = o.beta_plus;
    out.bm(j) = o.beta_minus;
    c = 0;
    for (Index k = 0; k < p; ++k) {
      if (k == j) continue;
      out.theta(j, k) = o.theta(c++);
    }
  }
  out.eta = linear_predictor(out.bp, out.bm, out.theta, d, b);
  return out;
}

double sq_dist(const Point& a, const Point& b) {
  return (a.bp - b.bp).squaredNorm() + (a.bm - b.bm).squaredNorm() +
         (a.theta - b.theta).squaredNorm();
}

double inner_grad(const SmoothAt& s, const Point& a, const Point& b) {
  return s.gbp.dot(a.bp - b.bp) + s.gbm.dot(a.bm - b.bm) + s.gth.cwiseProduct(a.theta - b.theta).sum();
}

/// One Newton step in the intercept with step halving (logistic loss only).
double newton_intercept(double beta0, const Vector& eta, const Vector& y) {
  const Index n = y.size();
  double grad = 0.0;
  double hess = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double m = sigmoid(eta(i) + beta0);
    grad += m - y(i);
    hess += m * (1.0 - m);
  }
  if (hess <= 1e-300) return beta0;
  const double base = logistic_loss(y, (eta.array() + beta0).matrix());
  double step = -grad / hess;
  for (int h = 0; h < 30; ++h) {
    const double cand = beta0 + step;
    if (logistic_loss(y, (eta.array() + cand).matrix()) <= base) return cand;
    step *= 0.5;
  }
  return beta0;
}

}  // namespace

FitState fit_weak(const Dataset& data, const InteractionBasis& basis, double lambda,
                  const SmoothLoss& loss, const SolveOptions& opts,
                  const std::optional<FitState>& warm_start) {
  const Index p = data.p();
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InputError("lambda must be positive");
  if (opts.max_iters <= 0 || !(opts.rel_tol > 0.0) || opts.rel_tol >= 1.0 ||
      opts.eps_ridge_factor < 0.0 || !(opts.backtracking_shrink > 0.0) ||
      opts.backtracking_shrink >= 1.0) {
    throw InputError("invalid solver options");
  }
  if (basis.p() != p || basis.n() != data.n()) throw InputError("basis does not match data");
  check_loss_shapes(loss, p);
  const bool logistic = loss.is_logistic();
  if (logistic) check_logistic_response(data);

  const double eps = opts.eps_ridge_factor * lambda;
  FitState state = FitState::zeros(p, lambda, eps);
  state.loss = loss.loss_kind();
  if (warm_start) {
    if (warm_start->p() != p) throw InputError("warm start has wrong dimension");
    state.beta_plus = warm_start->beta_plus.cwiseMax(0.0);
    state.beta_minus = warm_start->beta_minus.cwiseMax(0.0);
    state.theta = warm_start->theta;
    state.theta.diagonal().setZero();
    state.beta0 = logistic ? warm_start->beta0 : 0.0;
  }
  const Vector y01 = logistic ? data.y_raw() : Vector();

  Point x{state.beta_plus, state.beta_minus, state.theta, Vector()};
  x.eta = linear_predictor(x.bp, x.bm, x.theta, data, basis);
  double beta0 = state.beta0;
  if (logistic && !warm_start) {
    const double ybar = std::clamp(y01.mean(), 1e-6, 1.0 - 1e-6);
    beta0 = std::log(ybar / (1.0 - ybar));
  }

  auto full_objective = [&](const Point& pt, double b0) {
    return smooth_at(pt, b0, loss, data, basis, lambda, eps, false).g + 0.5 * lambda * theta_l1(pt.theta);
  };

  double t;
  if (opts.data_lipschitz > 0.0) {
    double lip = loss.curvature() * opts.data_lipschitz + eps;
    if (loss.is_augmented()) lip += loss.rho;
    t = 1.0 / lip;
  } else {
    t = estimate_step(data, basis, loss, eps);
  }
  double f_cur = full_objective(x, beta0);
  if (!std::isfinite(f_cur)) throw SolverError("objective is not finite at the starting point");

  Diagnostics diag;
  if (opts.record_trace) diag.objective_trace.push_back(f_cur);

  Point x_prev = x;
  double mom = 1.0;
  bool converged = false;
  Index iter = 0;
  for (; iter < opts.max_iters; ++iter) {
    if (logistic) {
      beta0 = newton_intercept(beta0, x.eta, y01);
      f_cur = full_objective(x, beta0);
    }

    // Momentum point.
    const double mom_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * mom * mom));
    const double c = opts.acceleration ? (mom - 1.0) / mom_next : 0.0;
    Point v;
    if (c > 0.0) {
      v.bp = x.bp + c * (x.bp - x_prev.bp);
      v.bm = x.bm + c * (x.bm - x_prev.bm);
      v.theta = x.theta + c * (x.theta - x_prev.theta);
      v.eta = x.eta + c * (x.eta - x_prev.eta);
    } else {
      v = x;
    }

    auto attempt = [&](const Point& from, Point& out, double& f_out) {
      const SmoothAt sv = smooth_at(from, beta0, loss, data, basis, lambda, eps, true);
      for (int bt = 0; bt < 200; ++bt) {
        out = prox_step(from, sv, t, lambda, data, basis);
        const SmoothAt so = smooth_at(out, beta0, loss, data, basis, lambda, eps, false);
        const double model = sv.g + inner_grad(sv, out, from) + sq_dist(out, from) / (2.0 * t);
        if (std::isfinite(so.g) &&
            so.g <= model + 1e-12 * std::max(1.0, std::abs(so.g))) {
          f_out = so.g + 0.5 * lambda * theta_l1(out.theta);
          return;
        }
        t *= opts.backtracking_shrink;
      }
      throw SolverError("step size backtracking failed to find a finite decrease");
    };

    Point x_new;
    double f_new = 0.0;
    attempt(v, x_new, f_new);
    if (f_new > f_cur) {
      // Restart the momentum and take a plain proximal step from x.
      mom = 1.0;
      if (c > 0.0) attempt(x, x_new, f_new);
      if (f_new > f_cur) {
        // Rounding-level increase: keep the current iterate.
        x_new = x;
        f_new = f_cur;
      }
    } else {
      mom = mom_next;
    }

    const double change = f_cur - f_new;
    const double step_inf = std::max({(x_new.bp - x.bp).lpNorm<Eigen::Infinity>(),
                                      (x_new.bm - x.bm).lpNorm<Eigen::Infinity>(),
                                      (x_new.theta - x.theta).lpNorm<Eigen::Infinity>()});
    const double scale = std::max({1.0, x_new.bp.lpNorm<Eigen::Infinity>(),
                                   x_new.bm.lpNorm<Eigen::Infinity>(),
                                   x_new.theta.lpNorm<Eigen::Infinity>()});
    const bool small = change <= opts.rel_tol * std::max(1.0, std::abs(f_new)) &&
                       step_inf <= opts.rel_tol * scale;
    x_prev = std::move(x);
    x = std::move(x_new);
    f_cur = f_new;
    if (opts.record_trace) diag.objective_trace.push_back(f_cur);
    if (!std::isfinite(f_cur)) throw SolverError("objective became non-finite");
    if (small && c == 0.0) {
      converged = true;
      ++iter;
      break;
    }
    if (small) {
      // Confirm with an unaccelerated step on the next pass.
      mom = 1.0;
    }
  }

  state.beta_plus = x.bp;
  state.beta_minus = x.bm;
  state.theta = x.theta;
  state.beta0 = logistic ? beta0 : 0.0;
  state.iterations = iter;
  state.converged = converged;
  state.objective = f_cur;
  diag.step_size = t;
  state.diagnostics = std::move(diag);
  return state;
}

double lambda_max(const Dataset& data, const InteractionBasis& basis) {
  return lambda_max(data, basis, LossKind::gaussian);
}

double lambda_max(const Dataset& data, const InteractionBasis& basis, LossKind loss) {
  const Index p = data.p();
  Vector r;
  if (loss == LossKind::logistic) {
    const Vector y = data.y_raw();
    r = y.array() - y.mean();
  } else {
    r = data.y_centered;
  }
  const Vector xr = data.x_std.transpose() * r;
  Vector zr;
  basis.zt_times(r, zr);
  Vector row_max = Vector::Zero(p);
  for (Index u = 0; u < basis.num_pairs(); ++u) {
    const auto [j, k] = basis.pair_at(u);
    row_max(j) = std::max(row_max(j), std::abs(zr(u)));
    row_max(k) = std::max(row_max(k), std::abs(zr(u)));
  }
  double out = 0.0;
  for (Index j = 0; j < p; ++j) {
    const double a = std::abs(xr(j));
    out = std::max({out, a, (2.0 * a + row_max(j)) / 3.0});
  }
  return out;
}

std::vector<double> lambda_grid(double lmax, Index count, double ratio) {
  if (count <= 0) throw InputError("lambda grid needs at least one value");
  if (!(lmax > 0.0)) throw InputError("lambda_max is zero; response has no signal to fit");
  if (!(ratio > 0.0) || ratio >= 1.0) throw InputError("lambda-min-ratio must be in (0, 1)");
  std::vector<double> out(static_cast<std::size_t>(count));
  for (Index i = 0; i < count; ++i) {
    const double frac = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    out[static_cast<std::size_t>(i)] = lmax * std::pow(ratio, frac);
  }
  return out;
}

void check_descending(const std::vector<double>& lambdas) {
  if (lambdas.empty()) throw InputError("empty lambda sequence");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > 0.0) || !std::isfinite(lambdas[i])) {
      throw InputError("lambda " + std::to_string(i) + " is not positive");
    }
    if (i > 0 && !(lambdas[i] < lambdas[i - 1])) {
      throw InputError("lambdas must be strictly descending (index " + std::to_string(i) + ")");
    }
  }
}

PathResult fit_weak_path(const Dataset& data, const InteractionBasis& basis,
                         const std::vector<double>& lambdas, const SmoothLoss& loss,
                         const SolveOptions& opts) {
  check_descending(lambdas);
  PathResult out;
  out.lambdas = lambdas;
  std::optional<FitState> warm;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    FitState fit;
    try {
      fit = fit_weak(data, basis, lambdas[i], loss, opts, warm);
    } catch (const SolverError& e) {
      throw SolverError("lambda index " + std::to_string(i) + ": " + e.what());
    }
    fit.method = Method::weak;
    PathPoint pt;
    pt.objective = fit.objective;
    const SparsityMetrics m = sparsity_metrics(fit);
    pt.parameter_sparsity = m.parameter_sparsity;
    pt.practical_sparsity = m.practical_sparsity;
    warm = fit;
    pt.fit = std::move(fit);
    out.points.push_back(std::move(pt));
  }
  return out;
}

}  // namespace hiernet
