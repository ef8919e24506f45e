#include "hiernet/strong_solver.hpp"

#include "hiernet/features.hpp"
#include "hiernet/model.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace hiernet;

TEST_CASE("omega update is symmetric with zero diagonal") {
  const Matrix theta = Matrix::Random(5, 5);
  const Matrix u = Matrix::Random(5, 5);
  const Matrix om = omega_update(theta, u, 2.0);
  CHECK((om - om.transpose()).norm() < 1e-15);
  CHECK(om.diagonal().norm() == 0.0);
  // first-order condition over symmetric matrices, off the diagonal
  const Matrix g = -u + 2.0 * (om - theta);
  const Matrix gs = g + g.transpose();
  for (Index j = 0; j < 5; ++j)
    for (Index k = 0; k < 5; ++k)
      if (j != k) CHECK(std::abs(gs(j, k)) < 1e-12);
}

TEST_CASE("admm residual definitions") {
  const Matrix a = Matrix::Random(3, 3), b = Matrix::Random(3, 3), c = Matrix::Random(3, 3);
  const AdmmResiduals r = admm_residuals(a, b, c, 3.0);
  CHECK(r.primal == doctest::Approx((a - b).norm()));
  CHECK(r.dual == doctest::Approx(3.0 * (b - c).norm()));
}

TEST_CASE("strong fits are symmetric, hierarchical and certified") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const Dataset d = oracle::random_dataset(50, 8, seed);
    const InteractionBasis b = build_interactions(d);
    const double lmax = lambda_max(d, b);
    for (double frac : {0.5, 0.2, 0.08}) {
      const FitState s = fit_strong(d, b, frac * lmax);
      REQUIRE(s.converged);
      CHECK(s.method == Method::strong);
      CHECK((s.theta - s.theta.transpose()).norm() == 0.0);
      CHECK(hierarchy_violations(s.beta(), s.theta, Hierarchy::strong) == 0);
      const KktReport r = kkt_check(s, d, b, Hierarchy::strong, 1e-3);
      CHECK_MESSAGE(r.pass, r.detail);
      FitState bad = s;
      bad.theta(0, 1) += 0.3;
      bad.theta(1, 0) += 0.3;
      CHECK_FALSE(kkt_check(bad, d, b, Hierarchy::strong, 1e-3).pass);
      for (Index j = 0; j < 8; ++j) {
        const double budget = std::max(std::abs(s.beta()(j)), s.theta.row(j).cwiseAbs().sum());
        CHECK(s.beta_plus(j) + s.beta_minus(j) == doctest::Approx(budget).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("strong objective is never below the weak objective") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Dataset d = oracle::random_dataset(40, 6, 50 + seed);
    const InteractionBasis b = build_interactions(d);
    const double lam = 0.15 * lambda_max(d, b);
    const FitState w = fit_weak(d, b, lam);
    const FitState s = fit_strong(d, b, lam);
    CHECK(s.objective >= w.objective - 1e-6 * std::abs(w.objective));
  }
}

TEST_CASE("p = 2 strong fit matches a direct minimization") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const Dataset d = oracle::random_dataset(30, 2, 200 + seed);
    const InteractionBasis b = build_interactions(d);
    const double lam = (0.1 + 0.1 * static_cast<double>(seed)) * lambda_max(d, b);
    SolveOptions o;
    o.eps_ridge_factor = 0.0;
    o.rel_tol = 1e-10;
    AdmmOptions a;
    a.tol_primal = a.tol_dual = 1e-9;
    a.max_iters = 5000;
    const FitState s = fit_strong(d, b, lam, o, a);
    const oracle::P2Solution ref = oracle::p2_strong_oracle(d.x_std, d.y_centered, lam);
    CHECK(s.objective == doctest::Approx(ref.objective).epsilon(1e-7));
  }
}

TEST_CASE("warm start through the splitting state reproduces the cold fit") {
  const Dataset d = oracle::random_dataset(40, 6, 9);
  const InteractionBasis b = build_interactions(d);
  const auto lambdas = lambda_grid(lambda_max(d, b), 6, 0.1);
  const PathResult path = fit_strong_path(d, b, lambdas);
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const FitState cold = fit_strong(d, b, lambdas[i]);
    CHECK(path.points[i].fit.converged);
    CHECK(std::abs(cold.objective - path.points[i].objective) <= 1e-5 * std::max(1.0, cold.objective));
  }
}

TEST_CASE("logistic strong fits keep the hierarchy") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  Matrix x(100, 4);
  for (Index i = 0; i < 100; ++i)
    for (Index j = 0; j < 4; ++j) x(i, j) = nd(rng);
  Vector y(100);
  for (Index i = 0; i < 100; ++i) {
    const double eta = x(i, 0) - x(i, 1) + x(i, 0) * x(i, 2);
    y(i) = std::uniform_real_distribution<double>(0, 1)(rng) < 1 / (1 + std::exp(-eta)) ? 1 : 0;
  }
  const Dataset d = standardize(x, y);
  const InteractionBasis b = build_interactions(d);
  AdmmOptions a;
  a.loss = LossKind::logistic;
  const FitState s = fit_strong(d, b, 0.2 * lambda_max(d, b, LossKind::logistic), {}, a);
  CHECK(s.converged);
  CHECK(s.loss == LossKind::logistic);
  CHECK((s.theta - s.theta.transpose()).norm() == 0.0);
  CHECK(hierarchy_violations(s.beta(), s.theta, Hierarchy::strong) == 0);
  CHECK(std::isfinite(s.objective));
}
