#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hiernet {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Bad user input: malformed data, dimension mismatch, constant column, etc.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The solver could not produce a finite answer.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SdConvention { population, sample };

enum class Hierarchy { weak, strong };

enum class Method { strong, weak, apl, mel };

enum class LossKind { gaussian, logistic };

std::string to_string(SdConvention c);
std::string to_string(Hierarchy h);
std::string to_string(Method m);
std::string to_string(LossKind k);
SdConvention sd_convention_from_string(const std::string& s);
Method method_from_string(const std::string& s);
LossKind loss_kind_from_string(const std::string& s);

/// Standardized design and centered response, plus what is needed to map
/// raw-scale rows onto the standardized scale.
struct Dataset {
  Matrix x_std;
  Vector y_centered;
  double y_mean = 0.0;
  Vector col_means;
  Vector col_sds;
  SdConvention sd_convention = SdConvention::population;

  Index n() const { return x_std.rows(); }
  Index p() const { return x_std.cols(); }

  /// Raw response, y_centered + y_mean.
  Vector y_raw() const;

  /// Same design, new raw response (re-centered).
  Dataset with_response(const Vector& y_raw) const;
};

/// Centered products of standardized columns, one per unordered pair.
///
/// The ordered-pair view of the full n x p(p-1) matrix Z is exposed
/// through column(j, k) and ordered_id(j, k); the columns for (j, k) and
/// (k, j) are the same stored vector. Above `materialize_limit` predictors
/// the columns are not stored and products are formed from x_std directly.
class InteractionBasis {
 public:
  InteractionBasis() = default;
  InteractionBasis(const Matrix& x_std, Index materialize_limit = 400);

  Index n() const { return n_; }
  Index p() const { return p_; }
  Index num_pairs() const { return static_cast<Index>(pairs_.size()); }
  Index num_ordered() const { return p_ * (p_ - 1); }
  bool materialized() const { return materialized_; }

  /// Unordered-pair id for j != k.
  Index pair_id(Index j, Index k) const;
  /// Column id in the ordered n x p(p-1) layout (row-major over j, skipping k == j).
  Index ordered_id(Index j, Index k) const;
  /// (j, k) with j < k for an unordered-pair id.
  std::pair<Index, Index> pair_at(Index id) const { return pairs_[static_cast<std::size_t>(id)]; }

  Vector column(Index j, Index k) const;
  double z_mean(Index j, Index k) const { return pair_means_(pair_id(j, k)); }
  double col_sq_norm(Index j, Index k) const { return pair_sq_norms_(pair_id(j, k)); }

  const Vector& pair_means() const { return pair_means_; }
  const Vector& pair_sq_norms() const { return pair_sq_norms_; }
  /// Ordered-layout vectors of length p(p-1).
  Vector z_means() const;
  Vector col_sq_norms() const;

  /// out(u) = z_u' r for every unordered pair u.
  void zt_times(const Vector& r, Vector& out) const;
  /// out = sum_u z_u s(u).
  void z_times(const Vector& s, Vector& out) const;

  /// n x num_pairs matrix of the unique columns (materializes if needed).
  Matrix dense_unique() const;

 private:
  Index n_ = 0;
  Index p_ = 0;
  bool materialized_ = false;
  Matrix x_;
  Matrix z_;
  Vector pair_means_;
  Vector pair_sq_norms_;
  std::vector<std::pair<Index, Index>> pairs_;
  Eigen::MatrixXi ids_;
};

/// Per-iterate diagnostics kept by the solvers.
struct Diagnostics {
  std::vector<double> objective_trace;
  double step_size = 0.0;
  double kkt_violation = -1.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  Index admm_iterations = 0;
};

/// Optimization variables of the hierarchical lasso plus solver diagnostics.
struct FitState {
  double beta0 = 0.0;
  Vector beta_plus;
  Vector beta_minus;
  Matrix theta;  // p x p, zero diagonal
  double lambda = 0.0;
  double eps_ridge = 0.0;
  Index iterations = 0;
  bool converged = false;
  double objective = 0.0;
  Method method = Method::weak;
  LossKind loss = LossKind::gaussian;
  Diagnostics diagnostics;

  static FitState zeros(Index p, double lambda, double eps_ridge = 0.0);

  Index p() const { return beta_plus.size(); }
  Vector beta() const { return beta_plus - beta_minus; }
};

struct KktReport {
  enum class Status { pass, fail, inconclusive };
  Vector alpha_hat;
  double max_stationarity_violation = 0.0;
  double max_complementary_slackness_violation = 0.0;
  bool pass = false;
  Status status = Status::fail;
  std::string detail;
};

struct PathPoint {
  FitState fit;
  double objective = 0.0;
  Index parameter_sparsity = 0;
  Index practical_sparsity = 0;
};

struct PathResult {
  std::vector<double> lambdas;
  std::vector<PathPoint> points;
};

}  // namespace hiernet
