#pragma once

#include "hiernet/strong_solver.hpp"
#include "hiernet/types.hpp"

#include <cstdint>
#include <functional>

namespace hiernet {

/// Index sets read off a strong fit. Interaction sets hold ordered pairs
/// (j, k), j != k.
struct ActiveSets {
  Index p = 0;
  std::vector<bool> tight;
  std::vector<Index> pos_beta_plus;
  std::vector<Index> pos_beta_minus;
  std::vector<Index> nonzero_beta;  // b+_j - b-_j != 0
  std::vector<std::pair<Index, Index>> pos_theta_plus;
  std::vector<std::pair<Index, Index>> pos_theta_minus;

  Index num_tight() const;
};

/// Row pattern used for the j < k pairing rows of the constraint matrix.
///  as_printed: Theta+_jk + Theta+_kj - Theta-_jk - Theta-_kj = 0
///  symmetry:   Theta+_jk - Theta+_kj - Theta-_jk + Theta-_kj = 0  (Theta_jk = Theta_kj)
enum class PairRowPattern { as_printed, symmetry };

/// Constraints binding at a fit, over the 2p + 2p^2 coordinates
/// (b+, b-, Theta+, Theta-) with Theta entries at j * p + k.
struct ConstraintSystem {
  Matrix d;        // stacked rows
  Matrix x_tilde;  // n x (2p + 2p^2): (X : -X : Z/2 : -Z/2), diagonal columns zero
  Vector w;        // lambda on b+/-, lambda/2 on Theta+/-
  /// Row counts in the order tight, zero b+, zero b-, zero Theta+, zero
  /// Theta-, diag Theta+, diag Theta-, pairing.
  std::vector<Index> row_counts;
};

/// Relative tolerance 1e-8 as for coefficient zeroing; T uses
/// |  ||Theta_j||_1 - b+_j - b-_j | <= tol * max(1, b+_j + b-_j).
ActiveSets extract_active_sets(const FitState& state, double tol = 1e-8);

ConstraintSystem build_constraint_system(const ActiveSets& sets, const Dataset& data,
                                         const InteractionBasis& basis, double lambda,
                                         PairRowPattern pattern = PairRowPattern::symmetry);

/// Dimension of the null space of the stacked constraint rows.
Index constraint_nullity(const ConstraintSystem& sys, double svd_tol = 1e-10);

/// Closed-form nullity for symmetric sign-consistent supports:
/// |P(b+)| + |P(b-)| + |P(Theta+)|/2 + |P(Theta-)|/2 - |T n (P(b+) u P(b-))|.
Index nullity_formula(const ActiveSets& sets);

/// rank(X~ N), N an orthonormal basis of the constraint null space.
/// Throws InputError for a fit that is not a strong fit.
Index df_estimate(const FitState& state, const Dataset& data, const InteractionBasis& basis,
                  double svd_tol = 1e-10, PairRowPattern pattern = PairRowPattern::symmetry);

/// |A_beta| + |A_Theta| - |T n (A+ sym-diff A-)|.
Index df_bound(const ActiveSets& sets);

/// Covariance-based degrees of freedom (1/sigma^2) sum_i cov(y_i, yhat_i).
struct McDf {
  std::vector<double> df;
  std::vector<double> se;
};

/// Generic harness: draws y = mu + sigma * N(0, I) B times (replicate b
/// seeded by derive_seed(seed, b)); `fitter` maps y to an n x L matrix of
/// fitted values (one column per tuning value). Replicates run through
/// parallel_for. Standard errors come from per-replicate contributions.
McDf monte_carlo_df(const Vector& mu, double sigma, Index replicates, std::uint64_t seed,
                    const std::function<Matrix(const Vector&)>& fitter);

/// Per-lambda study on a fixed raw design with the ridge-free strong path.
struct DfStudy {
  std::vector<double> lambdas;
  std::vector<double> df_mc;
  std::vector<double> df_mc_se;
  std::vector<double> df_estimate_mean;
  std::vector<double> df_estimate_se;
  std::vector<double> df_bound_mean;
  Index bound_violations = 0;
  Index nonconverged = 0;
};

/// Fitted values are centered (the intercept is not counted), matching
/// what df_estimate measures.
DfStudy df_monte_carlo(const Vector& mu, double sigma, const Matrix& x_raw,
                       const std::vector<double>& lambdas, Index replicates, std::uint64_t seed,
                       PairRowPattern pattern = PairRowPattern::symmetry);

}  // namespace hiernet
