#include "hiernet/selection.hpp"

#include "hiernet/features.hpp"
#include "hiernet/lasso.hpp"
#include "hiernet/model.hpp"
#include "hiernet/parallel.hpp"
#include "hiernet/strong_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace hiernet {

namespace {

void require_gaussian(Method method, LossKind loss) {
  if ((method == Method::apl || method == Method::mel) && loss != LossKind::gaussian) {
    throw InputError("method " + to_string(method) + " supports only the gaussian loss");
  }
}

SmoothLoss smooth_loss(LossKind loss) {
  return loss == LossKind::logistic ? SmoothLoss::logistic() : SmoothLoss::gaussian();
}

}  // namespace

double method_lambda_max(Method method, const Dataset& data, const InteractionBasis& basis,
                         LossKind loss) {
  require_gaussian(method, loss);
  switch (method) {
    case Method::strong:
    case Method::weak: return lambda_max(data, basis, loss);
    case Method::apl: return lasso_lambda_max(lasso_design(data, basis, true), data.y_centered);
    case Method::mel: return lasso_lambda_max(data.x_std, data.y_centered);
  }
  return 0.0;
}

std::vector<double> method_lambda_grid(Method method, const Dataset& data,
                                       const InteractionBasis& basis, Index count, double ratio,
                                       LossKind loss) {
  const double lmax = method_lambda_max(method, data, basis, loss);
  if (!(lmax > 0.0)) throw InputError("response has no correlation with the design; lambda_max is 0");
  return lambda_grid(lmax, count, ratio);
}

PathResult fit_path(Method method, const Dataset& data, const InteractionBasis& basis,
                    const std::vector<double>& lambdas, LossKind loss, const SolveOptions& opts) {
  require_gaussian(method, loss);
  switch (method) {
    case Method::weak: return fit_weak_path(data, basis, lambdas, smooth_loss(loss), opts);
    case Method::strong: {
      AdmmOptions admm;
      admm.loss = loss;
      return fit_strong_path(data, basis, lambdas, opts, admm);
    }
    case Method::apl: return fit_lasso_path(data, basis, lambdas, true);
    case Method::mel: return fit_lasso_path(data, basis, lambdas, false);
  }
  throw InputError("unknown method");
}

FitState fit_one(Method method, const Dataset& data, const InteractionBasis& basis, double lambda,
                 LossKind loss, const SolveOptions& opts) {
  require_gaussian(method, loss);
  if (method == Method::weak) return fit_weak(data, basis, lambda, smooth_loss(loss), opts);
  if (method == Method::strong) {
    AdmmOptions admm;
    admm.loss = loss;
    return fit_strong(data, basis, lambda, opts, admm);
  }
  return std::move(fit_path(method, data, basis, {lambda}, loss, opts).points.front().fit);
}

Index oracle_select(const std::vector<Vector>& fitted, const Vector& mu) {
  if (fitted.empty()) throw InputError("oracle_select: empty path");
  Index best = 0;
  double best_err = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < fitted.size(); ++i) {
    if (fitted[i].size() != mu.size()) throw InputError("oracle_select: length mismatch");
    const double err = (fitted[i] - mu).squaredNorm();
    if (err < best_err) {
      best_err = err;
      best = static_cast<Index>(i);
    }
  }
  return best;
}

Index oracle_select(const PathResult& path, const Dataset& data, const InteractionBasis& basis,
                    const Vector& mu) {
  std::vector<Vector> fitted;
  fitted.reserve(path.points.size());
  for (const auto& pt : path.points) fitted.push_back(fitted_values(pt.fit, data, basis));
  return oracle_select(fitted, mu);
}

std::vector<Index> make_folds(Index n, Index k, std::uint64_t seed) {
  if (k < 2) throw InputError("need at least 2 folds");
  if (n < 2 * k) {
    throw InputError(std::to_string(k) + " folds over " + std::to_string(n) +
                     " rows leaves a fold with fewer than 2 rows");
  }
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<Index> ids(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) ids[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = i % k;
  return ids;
}

namespace {

double heldout_loss(LossKind loss, const Vector& y, const Vector& pred) {
  const double m = static_cast<double>(y.size());
  if (loss == LossKind::gaussian) return (y - pred).squaredNorm() / m;
  return 2.0 * logistic_loss(y, pred) / m;
}

Matrix take_rows(const Matrix& x, const std::vector<Index>& rows) {
  Matrix out(static_cast<Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = x.row(rows[i]);
  return out;
}

Vector take(const Vector& v, const std::vector<Index>& rows) {
  Vector out(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Index>(i)) = v(rows[i]);
  return out;
}

}  // namespace

CvResult kfold_cv(const Matrix& x_raw, const Vector& y_raw, Method method,
                  const std::vector<double>& lambdas, const std::vector<Index>& fold_ids,
                  const CvOptions& opts) {
  const Index n = x_raw.rows();
  if (y_raw.size() != n || static_cast<Index>(fold_ids.size()) != n) {
    throw InputError("kfold_cv: rows, response and fold ids disagree in length");
  }
  check_descending(lambdas);
  require_gaussian(method, opts.loss);
  Index k = 0;
  for (Index f : fold_ids) {
    if (f < 0) throw InputError("fold ids must be nonnegative");
    k = std::max(k, f + 1);
  }
  if (k < 2) throw InputError("need at least 2 folds");
  std::vector<std::vector<Index>> test(static_cast<std::size_t>(k));
  for (Index i = 0; i < n; ++i) test[static_cast<std::size_t>(fold_ids[static_cast<std::size_t>(i)])].push_back(i);
  for (Index f = 0; f < k; ++f) {
    const auto sz = static_cast<Index>(test[static_cast<std::size_t>(f)].size());
    if (sz < 2) throw InputError("fold " + std::to_string(f) + " has fewer than 2 rows");
    if (n - sz < 2) throw InputError("fold " + std::to_string(f) + " leaves fewer than 2 training rows");
  }

  const auto nl = static_cast<Index>(lambdas.size());
  CvResult out;
  out.lambdas = lambdas;
  out.fold_errors.resize(k, nl);
  std::vector<Index> nonconv(static_cast<std::size_t>(k), 0);

  parallel_for(k, [&](Index f) {
    const auto& te = test[static_cast<std::size_t>(f)];
    std::vector<Index> tr;
    for (Index i = 0; i < n; ++i)
      if (fold_ids[static_cast<std::size_t>(i)] != f) tr.push_back(i);
    const Dataset d = standardize(take_rows(x_raw, tr), take(y_raw, tr), opts.sd);
    const InteractionBasis b = build_interactions(d);
    const PathResult path = fit_path(method, d, b, lambdas, opts.loss, opts.solve);
    const Matrix x_te = take_rows(x_raw, te);
    const Vector y_te = take(y_raw, te);
    for (Index l = 0; l < nl; ++l) {
      const FitState& s = path.points[static_cast<std::size_t>(l)].fit;
      if (!s.converged) ++nonconv[static_cast<std::size_t>(f)];
      out.fold_errors(f, l) = heldout_loss(opts.loss, y_te, predict(s, d, b, x_te));
    }
  });

  out.nonconverged = std::accumulate(nonconv.begin(), nonconv.end(), Index{0});
  out.mean = out.fold_errors.colwise().mean().transpose();
  out.se.resize(nl);
  for (Index l = 0; l < nl; ++l) {
    const double var = (out.fold_errors.col(l).array() - out.mean(l)).square().sum() /
                       static_cast<double>(k - 1);
    out.se(l) = std::sqrt(var / static_cast<double>(k));
  }
  out.mean.minCoeff(&out.index_min);
  const double cutoff = out.mean(out.index_min) + out.se(out.index_min);
  out.index_1se = out.index_min;
  for (Index l = 0; l <= out.index_min; ++l) {
    if (out.mean(l) <= cutoff) {
      out.index_1se = l;
      break;
    }
  }
  out.lambda_min = lambdas[static_cast<std::size_t>(out.index_min)];
  out.lambda_1se = lambdas[static_cast<std::size_t>(out.index_1se)];
  return out;
}

CvResult kfold_cv(const Matrix& x_raw, const Vector& y_raw, Method method,
                  const std::vector<double>& lambdas, Index k, std::uint64_t seed,
                  const CvOptions& opts) {
  return kfold_cv(x_raw, y_raw, method, lambdas, make_folds(x_raw.rows(), k, seed), opts);
}

}  // namespace hiernet
