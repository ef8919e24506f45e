#pragma once

#include "hiernet/types.hpp"
#include "hiernet/weak_solver.hpp"

#include <cstdint>

namespace hiernet {

/// Largest useful lambda for `method`: lambda_max for the hierarchical
/// problems, max |d_j'y| over the lasso design for APL / MEL.
double method_lambda_max(Method method, const Dataset& data, const InteractionBasis& basis,
                         LossKind loss = LossKind::gaussian);

/// `count` log-spaced values from method_lambda_max down to ratio times it.
std::vector<double> method_lambda_grid(Method method, const Dataset& data,
                                       const InteractionBasis& basis, Index count, double ratio,
                                       LossKind loss = LossKind::gaussian);

/// Path for any of the four penalized methods. APL and MEL support only the
/// gaussian loss.
PathResult fit_path(Method method, const Dataset& data, const InteractionBasis& basis,
                    const std::vector<double>& lambdas, LossKind loss = LossKind::gaussian,
                    const SolveOptions& opts = {});

/// Single fit at one lambda (cold start).
FitState fit_one(Method method, const Dataset& data, const InteractionBasis& basis, double lambda,
                 LossKind loss = LossKind::gaussian, const SolveOptions& opts = {});

/// Index of the candidate fitted vector closest to mu in squared error.
/// Ties go to the earliest index. Throws InputError for an empty list.
Index oracle_select(const std::vector<Vector>& fitted, const Vector& mu);

/// Same, over the fitted values of a path on its training design.
Index oracle_select(const PathResult& path, const Dataset& data, const InteractionBasis& basis,
                    const Vector& mu);

/// Fold id in [0, k) for each of n rows: a seeded permutation dealt
/// round-robin. Throws if some fold would get fewer than 2 rows.
std::vector<Index> make_folds(Index n, Index k, std::uint64_t seed);

struct CvOptions {
  LossKind loss = LossKind::gaussian;
  SdConvention sd = SdConvention::population;
  SolveOptions solve;
};

struct CvResult {
  std::vector<double> lambdas;
  /// folds x lambdas held-out mean loss (squared error, or binomial
  /// deviance for the logistic loss).
  Matrix fold_errors;
  Vector mean;
  Vector se;
  Index index_min = 0;
  Index index_1se = 0;
  double lambda_min = 0.0;
  double lambda_1se = 0.0;
  Index nonconverged = 0;
};

/// K-fold cross-validation over a fixed lambda grid. Each training split is
/// standardized on its own rows; held-out rows are mapped with the training
/// statistics.
CvResult kfold_cv(const Matrix& x_raw, const Vector& y_raw, Method method,
                  const std::vector<double>& lambdas, const std::vector<Index>& fold_ids,
                  const CvOptions& opts = {});

CvResult kfold_cv(const Matrix& x_raw, const Vector& y_raw, Method method,
                  const std::vector<double>& lambdas, Index k, std::uint64_t seed,
                  const CvOptions& opts = {});

}  // namespace hiernet
