#include "hiernet/features.hpp"

#include <cmath>
#include <string>

namespace hiernet {

Dataset standardize(const Matrix& x_raw, const Vector& y_raw, SdConvention sd) {
  const Index n = x_raw.rows();
  const Index p = x_raw.cols();
  if (n < 2) throw InputError("need at least 2 rows, got " + std::to_string(n));
  if (y_raw.size() != n) throw InputError("response length does not match design rows");
  if (!x_raw.allFinite()) throw InputError("design contains non-finite values");
  if (!y_raw.allFinite()) throw InputError("response contains non-finite values");

  Dataset d;
  d.sd_convention = sd;
  d.col_means = x_raw.colwise().mean().transpose();
  d.col_sds.resize(p);
  d.x_std.resize(n, p);
  const double denom = sd == SdConvention::population ? static_cast<double>(n)
                                                      : static_cast<double>(n - 1);
  for (Index j = 0; j < p; ++j) {
    Vector c = x_raw.col(j).array() - d.col_means(j);
    const double s = std::sqrt(c.squaredNorm() / denom);
    if (!(s > 1e-12 * (1.0 + std::abs(d.col_means(j))))) {
      throw InputError("column " + std::to_string(j) + " is constant");
    }
    d.col_sds(j) = s;
    d.x_std.col(j) = c / s;
  }
  d.y_mean = y_raw.mean();
  d.y_centered = y_raw.array() - d.y_mean;
  return d;
}

InteractionBasis::InteractionBasis(const Matrix& x_std, Index materialize_limit)
    : n_(x_std.rows()), p_(x_std.cols()), materialized_(x_std.cols() <= materialize_limit),
      x_(x_std) {
  const Index num = p_ * (p_ - 1) / 2;
  pairs_.reserve(static_cast<std::size_t>(num));
  ids_ = Eigen::MatrixXi::Constant(p_, p_, -1);
  for (Index j = 0; j < p_; ++j) {
    for (Index k = j + 1; k < p_; ++k) {
      ids_(j, k) = ids_(k, j) = static_cast<int>(pairs_.size());
      pairs_.emplace_back(j, k);
    }
  }
  pair_means_.resize(num);
  pair_sq_norms_.resize(num);
  if (materialized_) z_.resize(n_, num);
  Vector col(n_);
  for (Index u = 0; u < num; ++u) {
    const auto [j, k] = pairs_[static_cast<std::size_t>(u)];
    col = x_.col(j).cwiseProduct(x_.col(k));
    const double m = col.mean();
    col.array() -= m;
    pair_means_(u) = m;
    pair_sq_norms_(u) = col.squaredNorm();
    if (materialized_) z_.col(u) = col;
  }
}

Index InteractionBasis::pair_id(Index j, Index k) const {
  if (j == k || j < 0 || k < 0 || j >= p_ || k >= p_) {
    throw InputError("invalid interaction pair (" + std::to_string(j) + ", " + std::to_string(k) + ")");
  }
  return ids_(j, k);
}

Index InteractionBasis::ordered_id(Index j, Index k) const {
  if (j == k) throw InputError("ordered pair needs j != k");
  return j * (p_ - 1) + (k < j ? k : k - 1);
}

Vector InteractionBasis::column(Index j, Index k) const {
  const Index u = pair_id(j, k);
  if (materialized_) return z_.col(u);
  Vector c = x_.col(j).cwiseProduct(x_.col(k));
  c.array() -= pair_means_(u);
  return c;
}

Vector InteractionBasis::z_means() const {
  Vector out(num_ordered());
  for (Index j = 0; j < p_; ++j)
    for (Index k = 0; k < p_; ++k)
      if (j != k) out(ordered_id(j, k)) = pair_means_(ids_(j, k));
  return out;
}

Vector InteractionBasis::col_sq_norms() const {
  Vector out(num_ordered());
  for (Index j = 0; j < p_; ++j)
    for (Index k = 0; k < p_; ++k)
      if (j != k) out(ordered_id(j, k)) = pair_sq_norms_(ids_(j, k));
  return out;
}

void InteractionBasis::zt_times(const Vector& r, Vector& out) const {
  out.resize(num_pairs());
  if (num_pairs() == 0) return;
  if (materialized_) {
    out.noalias() = z_.transpose() * r;
    return;
  }
  // z_u' r = sum_i x_ij x_ik r_i - m_u sum_i r_i
  const Matrix weighted = x_.array().colwise() * r.array();
  const Matrix g = x_.transpose() * weighted;
  const double rsum = r.sum();
  for (Index u = 0; u < num_pairs(); ++u) {
    const auto [j, k] = pairs_[static_cast<std::size_t>(u)];
    out(u) = g(j, k) - pair_means_(u) * rsum;
  }
}

void InteractionBasis::z_times(const Vector& s, Vector& out) const {
  out.resize(n_);
  if (num_pairs() == 0) {
    out.setZero();
    return;
  }
  if (materialized_) {
    out.noalias() = z_ * s;
    return;
  }
  Matrix sym = Matrix::Zero(p_, p_);
  for (Index u = 0; u < num_pairs(); ++u) {
    const auto [j, k] = pairs_[static_cast<std::size_t>(u)];
    sym(j, k) = sym(k, j) = s(u);
  }
  const Matrix xs = x_ * sym;
  out = 0.5 * xs.cwiseProduct(x_).rowwise().sum();
  out.array() -= pair_means_.dot(s);
}

Matrix InteractionBasis::dense_unique() const {
  if (materialized_) return z_;
  Matrix z(n_, num_pairs());
  for (Index u = 0; u < num_pairs(); ++u) {
    const auto [j, k] = pairs_[static_cast<std::size_t>(u)];
    z.col(u) = x_.col(j).cwiseProduct(x_.col(k));
    z.col(u).array() -= pair_means_(u);
  }
  return z;
}

InteractionBasis build_interactions(const Dataset& data, Index materialize_limit) {
  return InteractionBasis(data.x_std, materialize_limit);
}

Matrix standardize_rows(const Dataset& data, const Matrix& x_new_raw) {
  if (x_new_raw.cols() != data.p()) {
    throw InputError("expected " + std::to_string(data.p()) + " columns, got " +
                     std::to_string(x_new_raw.cols()));
  }
  Matrix out = x_new_raw.rowwise() - data.col_means.transpose();
  out.array().rowwise() /= data.col_sds.transpose().array();
  return out;
}

Vector effective_pair_vector(const Matrix& theta, const InteractionBasis& basis) {
  Vector s(basis.num_pairs());
  for (Index u = 0; u < basis.num_pairs(); ++u) {
    const auto [j, k] = basis.pair_at(u);
    s(u) = 0.5 * (theta(j, k) + theta(k, j));
  }
  return s;
}

namespace {

double intercept_of(const FitState& state, const Dataset& data) {
  return state.beta0 + (state.loss == LossKind::gaussian ? data.y_mean : 0.0);
}

}  // namespace

Vector predict(const FitState& state, const Dataset& data, const InteractionBasis& basis,
               const Matrix& x_new_raw) {
  if (state.p() != data.p()) throw InputError("model and data disagree on p");
  const Matrix xs = standardize_rows(data, x_new_raw);
  Vector out = xs * state.beta();
  out.array() += intercept_of(state, data);
  for (Index u = 0; u < basis.num_pairs(); ++u) {
    const auto [j, k] = basis.pair_at(u);
    const double s = 0.5 * (state.theta(j, k) + state.theta(k, j));
    if (s == 0.0) continue;
    out += s * (xs.col(j).cwiseProduct(xs.col(k)).array() - basis.pair_means()(u)).matrix();
  }
  return out;
}

Vector fitted_values(const FitState& state, const Dataset& data, const InteractionBasis& basis) {
  Vector out = data.x_std * state.beta();
  Vector zs;
  basis.z_times(effective_pair_vector(state.theta, basis), zs);
  out += zs;
  out.array() += intercept_of(state, data);
  return out;
}

}  // namespace hiernet
