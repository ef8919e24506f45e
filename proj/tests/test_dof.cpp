#include "hiernet/dof.hpp"

#include "hiernet/features.hpp"
#include "hiernet/model.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace hiernet;

namespace {

FitState tight_strong_fit(const Dataset& d, const InteractionBasis& b, double lam) {
  SolveOptions o;
  o.rel_tol = 1e-12;
  o.eps_ridge_factor = 0.0;
  o.max_iters = 20000;
  AdmmOptions a;
  a.tol_primal = a.tol_dual = 1e-10;
  a.max_iters = 5000;
  return fit_strong(d, b, lam, o, a);
}

}  // namespace

TEST_CASE("active sets of a hand-built strong state") {
  FitState s = FitState::zeros(3, 1.0);
  s.method = Method::strong;
  s.beta_plus << 0.5, 0.2, 0.0;
  s.beta_minus << 0.0, 0.1, 0.0;
  s.theta(0, 1) = s.theta(1, 0) = 0.3;
  const ActiveSets a = extract_active_sets(s);
  CHECK(a.p == 3);
  CHECK(a.pos_beta_plus == std::vector<Index>{0, 1});
  CHECK(a.pos_beta_minus == std::vector<Index>{1});
  CHECK(a.nonzero_beta == std::vector<Index>{0, 1});
  CHECK(a.pos_theta_plus.size() == 2);
  CHECK(a.pos_theta_minus.empty());
  CHECK(a.tight == std::vector<bool>{false, true, true});
  CHECK(a.num_tight() == 2);
  // row 1 is tight with both parts positive, so it is not one-sided
  CHECK(df_bound(a) == 2 + 1 - 0);
}

TEST_CASE("zero fit has zero df") {
  const Dataset d = oracle::random_dataset(30, 5, 3);
  const InteractionBasis b = build_interactions(d);
  const FitState s = tight_strong_fit(d, b, 2.0 * lambda_max(d, b));
  CHECK(df_estimate(s, d, b) == 0);
  CHECK(df_bound(extract_active_sets(s)) == 0);
}

TEST_CASE("df estimate stays within the bound and the nullity formula holds") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const Dataset d = oracle::random_dataset(30, 6, 40 + seed);
    const InteractionBasis b = build_interactions(d);
    const double lmax = lambda_max(d, b);
    for (double frac : {0.7, 0.4, 0.2, 0.1}) {
      const FitState s = tight_strong_fit(d, b, frac * lmax);
      REQUIRE(s.converged);
      const ActiveSets a = extract_active_sets(s);
      const Index est = df_estimate(s, d, b);
      CHECK(est >= 0);
      CHECK(est <= df_bound(a));
      const ConstraintSystem sys = build_constraint_system(a, d, b, s.lambda);
      CHECK(constraint_nullity(sys) == nullity_formula(a));
    }
  }
}

TEST_CASE("df estimate needs a strong fit") {
  const Dataset d = oracle::random_dataset(30, 4, 3);
  const InteractionBasis b = build_interactions(d);
  const FitState w = fit_weak(d, b, 0.3 * lambda_max(d, b));
  CHECK_THROWS_AS(df_estimate(w, d, b), InputError);
}

TEST_CASE("monte carlo df recovers the trace of a projection smoother") {
  const Index n = 20;
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  Matrix a(n, 3);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < 3; ++j) a(i, j) = nd(rng);
  const Matrix h = a * (a.transpose() * a).inverse() * a.transpose();
  const Matrix h2 = a.leftCols(1) * (a.col(0).squaredNorm() > 0 ? 1.0 / a.col(0).squaredNorm() : 0.0) *
                    a.col(0).transpose();
  const Vector mu = Vector::LinSpaced(n, -1, 1);
  const McDf r = monte_carlo_df(mu, 1.5, 4000, 77, [&](const Vector& y) {
    Matrix out(n, 2);
    out.col(0) = h * y;
    out.col(1) = h2 * y;
    return out;
  });
  REQUIRE(r.df.size() == 2);
  CHECK(std::abs(r.df[0] - 3.0) < 4 * r.se[0]);
  CHECK(std::abs(r.df[1] - 1.0) < 4 * r.se[1]);
  CHECK(r.se[0] > 0.0);
  CHECK_THROWS_AS(monte_carlo_df(mu, 1.0, 1, 1, [](const Vector& y) { return Matrix(y); }), InputError);
}

TEST_CASE("monte carlo study is reproducible and zero above lambda_max") {
  const Dataset d = oracle::random_dataset(20, 4, 5);
  Matrix x_raw = d.x_std;
  const Vector mu = d.y_centered;
  const InteractionBasis b = build_interactions(d);
  const double big = 50.0 * lambda_max(d, b);
  const DfStudy s1 = df_monte_carlo(mu, 1.0, x_raw, {big, 0.3 * big / 50.0}, 100, 9);
  const DfStudy s2 = df_monte_carlo(mu, 1.0, x_raw, {big, 0.3 * big / 50.0}, 100, 9);
  CHECK(s1.df_mc == s2.df_mc);
  CHECK(s1.df_estimate_mean == s2.df_estimate_mean);
  CHECK(s1.df_mc[0] == 0.0);
  CHECK(s1.df_estimate_mean[0] == 0.0);
  CHECK(s1.df_bound_mean[0] == 0.0);
  CHECK(s1.bound_violations == 0);
  CHECK(s1.df_mc[1] > 0.0);
}
