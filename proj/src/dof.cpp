#include "hiernet/dof.hpp"

#include "hiernet/features.hpp"
#include "hiernet/model.hpp"
#include "hiernet/parallel.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace hiernet {

Index ActiveSets::num_tight() const { return std::count(tight.begin(), tight.end(), true); }

ActiveSets extract_active_sets(const FitState& state, double tol) {
  const Index p = state.p();
  ActiveSets s;
  s.p = p;
  s.tight.assign(static_cast<std::size_t>(p), false);
  if (p == 0) return s;
  const double bscale =
      std::max(state.beta_plus.lpNorm<Eigen::Infinity>(), state.beta_minus.lpNorm<Eigen::Infinity>());
  const double bt = zero_threshold(bscale, tol);
  const double tt = zero_threshold(state.theta.lpNorm<Eigen::Infinity>(), tol);
  for (Index j = 0; j < p; ++j) {
    const double total = state.beta_plus(j) + state.beta_minus(j);
    const double row = state.theta.row(j).cwiseAbs().sum() - std::abs(state.theta(j, j));
    s.tight[static_cast<std::size_t>(j)] = std::abs(row - total) <= tol * std::max(1.0, total);
    if (state.beta_plus(j) > bt) s.pos_beta_plus.push_back(j);
    if (state.beta_minus(j) > bt) s.pos_beta_minus.push_back(j);
    if (std::abs(state.beta_plus(j) - state.beta_minus(j)) > bt) s.nonzero_beta.push_back(j);
    for (Index k = 0; k < p; ++k) {
      if (k == j) continue;
      if (state.theta(j, k) > tt) s.pos_theta_plus.emplace_back(j, k);
      if (state.theta(j, k) < -tt) s.pos_theta_minus.emplace_back(j, k);
    }
  }
  return s;
}

namespace {

struct Layout {
  Index p;
  Index bp(Index j) const { return j; }
  Index bm(Index j) const { return p + j; }
  Index tp(Index j, Index k) const { return 2 * p + j * p + k; }
  Index tm(Index j, Index k) const { return 2 * p + p * p + j * p + k; }
  Index size() const { return 2 * p + 2 * p * p; }
};

/// Which coordinates are not pinned to zero by the zero/diagonal rows.
std::vector<bool> free_mask(const ActiveSets& s) {
  const Layout L{s.p};
  std::vector<bool> free(static_cast<std::size_t>(L.size()), false);
  for (Index j : s.pos_beta_plus) free[static_cast<std::size_t>(L.bp(j))] = true;
  for (Index j : s.pos_beta_minus) free[static_cast<std::size_t>(L.bm(j))] = true;
  for (auto [j, k] : s.pos_theta_plus) free[static_cast<std::size_t>(L.tp(j, k))] = true;
  for (auto [j, k] : s.pos_theta_minus) free[static_cast<std::size_t>(L.tm(j, k))] = true;
  return free;
}

/// Tight-set and pairing rows (the ones that are not coordinate pins).
Matrix structural_rows(const ActiveSets& s, PairRowPattern pattern) {
  const Layout L{s.p};
  const Index p = s.p;
  const Index n_tight = s.num_tight();
  const Index n_pair = p * (p - 1) / 2;
  Matrix rows = Matrix::Zero(n_tight + n_pair, L.size());
  Index r = 0;
  for (Index j = 0; j < p; ++j) {
    if (!s.tight[static_cast<std::size_t>(j)]) continue;
    rows(r, L.bp(j)) = 1.0;
    rows(r, L.bm(j)) = 1.0;
    for (Index k = 0; k < p; ++k) {
      rows(r, L.tp(j, k)) = -1.0;
      rows(r, L.tm(j, k)) = -1.0;
    }
    ++r;
  }
  const double kj = pattern == PairRowPattern::as_printed ? 1.0 : -1.0;
  for (Index j = 0; j < p; ++j) {
    for (Index k = j + 1; k < p; ++k) {
      rows(r, L.tp(j, k)) = 1.0;
      rows(r, L.tp(k, j)) = kj;
      rows(r, L.tm(j, k)) = -1.0;
      rows(r, L.tm(k, j)) = -kj;
      ++r;
    }
  }
  return rows;
}

Matrix build_x_tilde(const Dataset& data, const InteractionBasis& basis) {
  const Index p = data.p();
  const Layout L{p};
  Matrix xt = Matrix::Zero(data.n(), L.size());
  xt.leftCols(p) = data.x_std;
  xt.middleCols(p, p) = -data.x_std;
  for (Index j = 0; j < p; ++j) {
    for (Index k = 0; k < p; ++k) {
      if (j == k) continue;
      const Vector z = 0.5 * basis.column(j, k);
      xt.col(L.tp(j, k)) = z;
      xt.col(L.tm(j, k)) = -z;
    }
  }
  return xt;
}

Index numeric_rank(const Matrix& m, double svd_tol) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::BDCSVD<Matrix> svd(m);
  const Vector& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) <= 0.0) return 0;
  const double thr = svd_tol * sv(0);
  Index r = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > thr) ++r;
  return r;
}

/// Orthonormal basis of null(a) (a has `cols` columns).
Matrix null_basis(const Matrix& a, Index cols, double svd_tol) {
  if (a.rows() == 0) return Matrix::Identity(cols, cols);
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullV);
  const Vector& sv = svd.singularValues();
  const double top = sv.size() ? sv(0) : 0.0;
  Index rank = 0;
  if (top > 0.0)
    for (Index i = 0; i < sv.size(); ++i)
      if (sv(i) > svd_tol * top) ++rank;
  return svd.matrixV().rightCols(cols - rank);
}

/// Sample-covariance df per column with per-replicate standard errors.
McDf covariance_df(const std::vector<Vector>& ys, const std::vector<Matrix>& fits, double sigma) {
  const Index reps = static_cast<Index>(ys.size());
  const Index n = ys.front().size();
  const Index nl = fits.front().cols();
  Vector y_bar = Vector::Zero(n);
  Matrix f_bar = Matrix::Zero(n, nl);
  for (Index b = 0; b < reps; ++b) {
    const Matrix& f = fits[static_cast<std::size_t>(b)];
    if (f.rows() != n || f.cols() != nl) throw InputError("fitter returned an inconsistent shape");
    y_bar += ys[static_cast<std::size_t>(b)];
    f_bar += f;
  }
  const double bb = static_cast<double>(reps);
  y_bar /= bb;
  f_bar /= bb;
  McDf out;
  for (Index l = 0; l < nl; ++l) {
    Vector contrib(reps);
    for (Index b = 0; b < reps; ++b) {
      const Vector dy = ys[static_cast<std::size_t>(b)] - y_bar;
      const Vector df = fits[static_cast<std::size_t>(b)].col(l) - f_bar.col(l);
      contrib(b) = dy.dot(df) * bb / ((bb - 1.0) * sigma * sigma);
    }
    const double mean = contrib.mean();
    const double var = (contrib.array() - mean).square().sum() / (bb - 1.0);
    out.df.push_back(mean);
    out.se.push_back(std::sqrt(var / bb));
  }
  return out;
}

}  // namespace

ConstraintSystem build_constraint_system(const ActiveSets& sets, const Dataset& data,
                                         const InteractionBasis& basis, double lambda,
                                         PairRowPattern pattern) {
  const Index p = sets.p;
  if (data.p() != p || basis.p() != p) throw InputError("active sets do not match the data");
  const Layout L{p};
  std::set<Index> bp(sets.pos_beta_plus.begin(), sets.pos_beta_plus.end());
  std::set<Index> bm(sets.pos_beta_minus.begin(), sets.pos_beta_minus.end());
  std::set<std::pair<Index, Index>> tp(sets.pos_theta_plus.begin(), sets.pos_theta_plus.end());
  std::set<std::pair<Index, Index>> tm(sets.pos_theta_minus.begin(), sets.pos_theta_minus.end());

  std::vector<Vector> rows;
  ConstraintSystem sys;
  auto unit = [&](Index c) {
    Vector r = Vector::Zero(L.size());
    r(c) = 1.0;
    return r;
  };
  const Matrix structural = structural_rows(sets, pattern);
  const Index n_tight = sets.num_tight();
  for (Index r = 0; r < n_tight; ++r) rows.push_back(structural.row(r).transpose());
  sys.row_counts.push_back(n_tight);

  Index c2 = 0, c3 = 0, c4 = 0, c5 = 0;
  for (Index j = 0; j < p; ++j)
    if (!bp.count(j)) rows.push_back(unit(L.bp(j))), ++c2;
  for (Index j = 0; j < p; ++j)
    if (!bm.count(j)) rows.push_back(unit(L.bm(j))), ++c3;
  for (Index j = 0; j < p; ++j)
    for (Index k = 0; k < p; ++k)
      if (j != k && !tp.count({j, k})) rows.push_back(unit(L.tp(j, k))), ++c4;
  for (Index j = 0; j < p; ++j)
    for (Index k = 0; k < p; ++k)
      if (j != k && !tm.count({j, k})) rows.push_back(unit(L.tm(j, k))), ++c5;
  for (Index j = 0; j < p; ++j) rows.push_back(unit(L.tp(j, j)));
  for (Index j = 0; j < p; ++j) rows.push_back(unit(L.tm(j, j)));
  for (Index r = n_tight; r < structural.rows(); ++r) rows.push_back(structural.row(r).transpose());
  sys.row_counts.insert(sys.row_counts.end(), {c2, c3, c4, c5, p, p, structural.rows() - n_tight});

  sys.d.resize(static_cast<Index>(rows.size()), L.size());
  for (std::size_t r = 0; r < rows.size(); ++r) sys.d.row(static_cast<Index>(r)) = rows[r].transpose();
  sys.x_tilde = build_x_tilde(data, basis);
  sys.w.resize(L.size());
  sys.w.head(2 * p).setConstant(lambda);
  sys.w.tail(2 * p * p).setConstant(0.5 * lambda);
  return sys;
}

Index constraint_nullity(const ConstraintSystem& sys, double svd_tol) {
  return sys.d.cols() - numeric_rank(sys.d, svd_tol);
}

Index nullity_formula(const ActiveSets& sets) {
  std::set<Index> pos(sets.pos_beta_plus.begin(), sets.pos_beta_plus.end());
  pos.insert(sets.pos_beta_minus.begin(), sets.pos_beta_minus.end());
  Index deduct = 0;
  for (Index j : pos)
    if (sets.tight[static_cast<std::size_t>(j)]) ++deduct;
  return static_cast<Index>(sets.pos_beta_plus.size() + sets.pos_beta_minus.size()) +
         static_cast<Index>(sets.pos_theta_plus.size() / 2 + sets.pos_theta_minus.size() / 2) -
         deduct;
}

Index df_estimate(const FitState& state, const Dataset& data, const InteractionBasis& basis,
                  double svd_tol, PairRowPattern pattern) {
  if (state.method != Method::strong) {
    throw InputError("df_estimate is defined for strong hierarchical fits only");
  }
  if (state.p() != data.p() || basis.p() != data.p()) throw InputError("fit does not match data");
  const ActiveSets sets = extract_active_sets(state);
  const std::vector<bool> free = free_mask(sets);
  std::vector<Index> cols;
  for (std::size_t c = 0; c < free.size(); ++c)
    if (free[c]) cols.push_back(static_cast<Index>(c));
  const Index m = static_cast<Index>(cols.size());
  if (m == 0) return 0;

  // Coordinates pinned to zero drop out; the remaining rows act on the free ones.
  const Matrix structural = structural_rows(sets, pattern);
  Matrix a(structural.rows(), m);
  for (Index c = 0; c < m; ++c) a.col(c) = structural.col(cols[static_cast<std::size_t>(c)]);
  std::vector<Index> keep;
  for (Index r = 0; r < a.rows(); ++r)
    if (a.row(r).cwiseAbs().maxCoeff() > 0.0) keep.push_back(r);
  Matrix a_kept(static_cast<Index>(keep.size()), m);
  for (std::size_t r = 0; r < keep.size(); ++r) a_kept.row(static_cast<Index>(r)) = a.row(keep[r]);

  const Matrix n_basis = null_basis(a_kept, m, svd_tol);
  if (n_basis.cols() == 0) return 0;

  const Layout L{data.p()};
  Matrix xt(data.n(), m);
  for (Index c = 0; c < m; ++c) {
    const Index coord = cols[static_cast<std::size_t>(c)];
    if (coord < data.p()) {
      xt.col(c) = data.x_std.col(coord);
    } else if (coord < 2 * data.p()) {
      xt.col(c) = -data.x_std.col(coord - data.p());
    } else {
      const bool minus = coord >= L.tm(0, 0);
      const Index off = coord - (minus ? L.tm(0, 0) : L.tp(0, 0));
      const Vector z = 0.5 * basis.column(off / data.p(), off % data.p());
      xt.col(c) = minus ? Vector(-z) : z;
    }
  }
  return numeric_rank(xt * n_basis, svd_tol);
}

Index df_bound(const ActiveSets& sets) {
  const Index p = sets.p;
  std::set<Index> plus(sets.pos_beta_plus.begin(), sets.pos_beta_plus.end());
  std::set<Index> minus(sets.pos_beta_minus.begin(), sets.pos_beta_minus.end());
  const Index a_beta = static_cast<Index>(sets.nonzero_beta.size());
  Index deduct = 0;
  for (Index j = 0; j < p; ++j) {
    const bool one_sided = (plus.count(j) > 0) != (minus.count(j) > 0);
    if (one_sided && sets.tight[static_cast<std::size_t>(j)]) ++deduct;
  }
  std::set<std::pair<Index, Index>> inter;
  for (auto [j, k] : sets.pos_theta_plus) inter.emplace(std::min(j, k), std::max(j, k));
  for (auto [j, k] : sets.pos_theta_minus) inter.emplace(std::min(j, k), std::max(j, k));
  return a_beta + static_cast<Index>(inter.size()) - deduct;
}

McDf monte_carlo_df(const Vector& mu, double sigma, Index replicates, std::uint64_t seed,
                    const std::function<Matrix(const Vector&)>& fitter) {
  if (replicates < 2) throw InputError("need at least 2 Monte Carlo replicates");
  if (!(sigma > 0.0)) throw InputError("sigma must be positive");
  const Index n = mu.size();
  std::vector<Vector> ys(static_cast<std::size_t>(replicates));
  std::vector<Matrix> fits(static_cast<std::size_t>(replicates));
  parallel_for(replicates, [&](Index b) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
    std::normal_distribution<double> nd;
    Vector y(n);
    for (Index i = 0; i < n; ++i) y(i) = mu(i) + sigma * nd(rng);
    fits[static_cast<std::size_t>(b)] = fitter(y);
    ys[static_cast<std::size_t>(b)] = std::move(y);
  });
  return covariance_df(ys, fits, sigma);
}

DfStudy df_monte_carlo(const Vector& mu, double sigma, const Matrix& x_raw,
                       const std::vector<double>& lambdas, Index replicates, std::uint64_t seed,
                       PairRowPattern pattern) {
  if (replicates < 100) throw InputError("df Monte Carlo needs at least 100 replicates");
  if (!(sigma > 0.0)) throw InputError("sigma must be positive");
  if (mu.size() != x_raw.rows()) throw InputError("mu length does not match design rows");
  check_descending(lambdas);
  const Index nl = static_cast<Index>(lambdas.size());
  const Dataset base = standardize(x_raw, mu);
  const InteractionBasis basis(base.x_std);
  SolveOptions opts;
  opts.eps_ridge_factor = 0.0;
  opts.record_trace = false;
  opts.data_lipschitz = hessian_bound(base, basis);
  opts.rel_tol = 1e-12;
  opts.max_iters = 20000;
  AdmmOptions admm;
  admm.tol_primal = 1e-10;
  admm.tol_dual = 1e-10;
  admm.max_iters = 5000;

  Matrix est(replicates, nl);
  Matrix bound(replicates, nl);
  std::vector<Index> violations(static_cast<std::size_t>(replicates), 0);
  std::vector<Index> nonconv(static_cast<std::size_t>(replicates), 0);
  std::vector<Vector> ys(static_cast<std::size_t>(replicates));
  std::vector<Matrix> fits(static_cast<std::size_t>(replicates));

  parallel_for(replicates, [&](Index b) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
    std::normal_distribution<double> nd;
    Vector y(mu.size());
    for (Index i = 0; i < y.size(); ++i) y(i) = mu(i) + sigma * nd(rng);
    const Dataset d = base.with_response(y);
    const PathResult path = fit_strong_path(d, basis, lambdas, opts, admm);
    Matrix f(d.n(), nl);
    for (Index l = 0; l < nl; ++l) {
      const FitState& fit = path.points[static_cast<std::size_t>(l)].fit;
      Vector fv = fitted_values(fit, d, basis);
      f.col(l) = fv.array() - d.y_mean;
      const Index e = df_estimate(fit, d, basis, 1e-10, pattern);
      const Index bd = df_bound(extract_active_sets(fit));
      est(b, l) = static_cast<double>(e);
      bound(b, l) = static_cast<double>(bd);
      if (e > bd) ++violations[static_cast<std::size_t>(b)];
      if (!fit.converged) ++nonconv[static_cast<std::size_t>(b)];
    }
    fits[static_cast<std::size_t>(b)] = std::move(f);
    ys[static_cast<std::size_t>(b)] = std::move(y);
  });

  DfStudy out;
  out.lambdas = lambdas;
  const McDf mc = covariance_df(ys, fits, sigma);
  out.df_mc = mc.df;
  out.df_mc_se = mc.se;
  const double bb = static_cast<double>(replicates);
  for (Index l = 0; l < nl; ++l) {
    const double em = est.col(l).mean();
    out.df_estimate_mean.push_back(em);
    out.df_estimate_se.push_back(
        std::sqrt((est.col(l).array() - em).square().sum() / (bb - 1.0) / bb));
    out.df_bound_mean.push_back(bound.col(l).mean());
  }
  for (Index b = 0; b < replicates; ++b) {
    out.bound_violations += violations[static_cast<std::size_t>(b)];
    out.nonconverged += nonconv[static_cast<std::size_t>(b)];
  }
  return out;
}

}  // namespace hiernet
