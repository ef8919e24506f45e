#include "hiernet/stepwise.hpp"

#include "hiernet/lasso.hpp"
#include "hiernet/model.hpp"

#include <cmath>

namespace hiernet {

std::string to_string(StepwiseMode m) {
  switch (m) {
    case StepwiseMode::main: return "main";
    case StepwiseMode::allpairs: return "allpairs";
    case StepwiseMode::hier: return "hier";
  }
  return "?";
}

namespace {

constexpr double kRankTol = 1e-10;

FitState refit(const Matrix& design, const std::vector<Index>& cols, const Vector& y,
               const InteractionBasis& basis, bool with_pairs, Method method) {
  Vector coef = Vector::Zero(design.cols());
  if (!cols.empty()) {
    Matrix sub(design.rows(), static_cast<Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) sub.col(static_cast<Index>(c)) = design.col(cols[c]);
    const Vector b = sub.colPivHouseholderQr().solve(y);
    for (std::size_t c = 0; c < cols.size(); ++c) coef(cols[c]) = b(static_cast<Index>(c));
  }
  FitState s = lasso_state(coef, basis, with_pairs, 0.0, method);
  s.converged = true;
  return s;
}

}  // namespace

StepwiseResult forward_stepwise(const Dataset& data, const InteractionBasis& basis,
                                StepwiseMode mode, Index k_max) {
  const bool with_pairs = mode != StepwiseMode::main;
  const Matrix design = lasso_design(data, basis, with_pairs);
  const Index m = design.cols();
  const Index p = data.p();
  if (k_max < 0 || k_max > m) {
    throw InputError("k_max must lie in [0, " + std::to_string(m) + "]");
  }
  const Method tag = mode == StepwiseMode::main ? Method::mel : Method::apl;

  // Candidates orthogonalized against the current model, kept up to date
  // one Gram-Schmidt step at a time.
  Matrix resid_cols = design;
  const Vector orig_sq = design.colwise().squaredNorm().transpose();
  Vector r = data.y_centered;
  std::vector<bool> in_model(static_cast<std::size_t>(m), false);

  StepwiseResult out;
  out.rss.push_back(r.squaredNorm());
  out.models.push_back(refit(design, {}, data.y_centered, basis, with_pairs, tag));

  for (Index step = 0; step < k_max; ++step) {
    Index best = -1;
    double best_gain = 0.0;
    for (Index c = 0; c < m; ++c) {
      if (in_model[static_cast<std::size_t>(c)]) continue;
      if (mode == StepwiseMode::hier && c >= p) {
        const auto [j, k] = basis.pair_at(c - p);
        if (!in_model[static_cast<std::size_t>(j)] || !in_model[static_cast<std::size_t>(k)]) continue;
      }
      const double sq = resid_cols.col(c).squaredNorm();
      if (sq <= kRankTol * orig_sq(c)) continue;
      const double dot = resid_cols.col(c).dot(r);
      const double gain = dot * dot / sq;
      if (gain > best_gain) {
        best_gain = gain;
        best = c;
      }
    }
    if (best < 0 || best_gain <= kRankTol * out.rss.back()) break;

    const Vector q = resid_cols.col(best) / resid_cols.col(best).norm();
    in_model[static_cast<std::size_t>(best)] = true;
    r -= q.dot(r) * q;
    const Vector proj = resid_cols.transpose() * q;
    resid_cols.noalias() -= q * proj.transpose();

    out.selected.push_back(best);
    out.rss.push_back(r.squaredNorm());
    out.models.push_back(refit(design, out.selected, data.y_centered, basis, with_pairs, tag));
  }
  return out;
}

}  // namespace hiernet
