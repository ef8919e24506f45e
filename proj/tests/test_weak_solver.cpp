#include "hiernet/weak_solver.hpp"

#include "hiernet/features.hpp"
#include "hiernet/model.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace hiernet;

namespace {

FitState random_point(Index p, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  FitState s = FitState::zeros(p, 1.0);
  s.beta0 = 0.3 * nd(rng);
  for (Index j = 0; j < p; ++j) {
    s.beta_plus(j) = std::abs(nd(rng));
    s.beta_minus(j) = std::abs(nd(rng));
    for (Index k = 0; k < p; ++k)
      if (j != k) s.theta(j, k) = 0.5 * nd(rng);
  }
  return s;
}

/// Central differences of loss.value along every coordinate.
double max_rel_grad_error(const SmoothLoss& loss, FitState s, const Dataset& d,
                          const InteractionBasis& b) {
  const LossGradient g = loss.gradient(s, d, b);
  const double h = 1e-6;
  double worst = 0.0;
  auto check = [&](double& coord, double analytic) {
    const double keep = coord;
    coord = keep + h;
    const double fp = loss.value(s, d, b);
    coord = keep - h;
    const double fm = loss.value(s, d, b);
    coord = keep;
    const double fd = (fp - fm) / (2 * h);
    worst = std::max(worst, std::abs(fd - analytic) / std::max(1.0, std::abs(analytic)));
  };
  const Index p = s.p();
  if (loss.is_logistic()) check(s.beta0, g.beta0);
  for (Index j = 0; j < p; ++j) {
    check(s.beta_plus(j), g.beta_plus(j));
    check(s.beta_minus(j), g.beta_minus(j));
    for (Index k = 0; k < p; ++k)
      if (j != k) check(s.theta(j, k), g.theta(j, k));
  }
  return worst;
}

Dataset binary_dataset(Index n, Index p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Matrix x(n, p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j) x(i, j) = nd(rng);
  Vector y(n);
  for (Index i = 0; i < n; ++i) {
    const double eta = 1.2 * x(i, 0) - x(i, 1) + 0.8 * x(i, 0) * x(i, 1);
    y(i) = std::uniform_real_distribution<double>(0, 1)(rng) < 1.0 / (1.0 + std::exp(-eta)) ? 1 : 0;
  }
  return standardize(x, y);
}

}  // namespace

TEST_CASE("smooth loss gradients match central differences") {
  std::mt19937_64 rng(8);
  const Dataset d = oracle::random_dataset(20, 4, 8);
  const InteractionBasis b = build_interactions(d);
  const Dataset db = binary_dataset(20, 4, 8);
  const InteractionBasis bb = build_interactions(db);
  for (int trial = 0; trial < 10; ++trial) {
    const FitState s = random_point(4, rng);
    Matrix omega = Matrix::Random(4, 4);
    omega = 0.5 * (omega + omega.transpose()).eval();
    omega.diagonal().setZero();
    Matrix u = Matrix::Random(4, 4);
    u.diagonal().setZero();
    CHECK(max_rel_grad_error(SmoothLoss::gaussian(), s, d, b) < 1e-5);
    CHECK(max_rel_grad_error(SmoothLoss::augmented(2.0, omega, u), s, d, b) < 1e-5);
    CHECK(max_rel_grad_error(SmoothLoss::logistic(), s, db, bb) < 1e-5);
    CHECK(max_rel_grad_error(SmoothLoss::augmented(2.0, omega, u, LossKind::logistic), s, db, bb) <
          1e-5);
  }
}

TEST_CASE("zero fit exactly at lambda_max and a nonzero fit just below") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Dataset d = oracle::random_dataset(40, 5, seed);
    const InteractionBasis b = build_interactions(d);
    const double lmax = lambda_max(d, b);
    const FitState at = fit_weak(d, b, lmax * (1 + 1e-9));
    CHECK(at.beta_plus.norm() + at.beta_minus.norm() + at.theta.norm() == 0.0);
    SolveOptions tight;
    tight.rel_tol = 1e-10;
    const FitState below = fit_weak(d, b, lmax * 0.97, SmoothLoss::gaussian(), tight);
    CHECK(below.beta_plus.norm() + below.beta_minus.norm() + below.theta.norm() > 0.0);
  }
}

TEST_CASE("converged weak fits pass kkt and perturbed fits fail") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const Dataset d = oracle::random_dataset(50, 8, seed);
    const InteractionBasis b = build_interactions(d);
    const double lmax = lambda_max(d, b);
    for (double frac : {0.6, 0.3, 0.1}) {
      const FitState s = fit_weak(d, b, frac * lmax);
      REQUIRE(s.converged);
      const KktReport r = kkt_check(s, d, b, Hierarchy::weak, 1e-4);
      CHECK_MESSAGE(r.pass, r.detail);
      CHECK(hierarchy_violations(s.beta(), s.theta, Hierarchy::weak) == 0);
      FitState bad = s;
      bad.beta_plus(0) += 0.5;
      CHECK_FALSE(kkt_check(bad, d, b, Hierarchy::weak, 1e-4).pass);
    }
  }
}

TEST_CASE("objective trace never increases and iterates stay feasible") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Dataset d = oracle::random_dataset(30, 6, seed);
    const InteractionBasis b = build_interactions(d);
    for (bool accel : {true, false}) {
      SolveOptions o;
      o.acceleration = accel;
      const FitState s = fit_weak(d, b, 0.2 * lambda_max(d, b), SmoothLoss::gaussian(), o);
      const auto& tr = s.diagnostics.objective_trace;
      REQUIRE(tr.size() > 1);
      for (std::size_t i = 1; i < tr.size(); ++i) CHECK(tr[i] <= tr[i - 1] + 1e-12 * std::abs(tr[i - 1]));
      for (Index j = 0; j < 6; ++j) {
        CHECK(s.beta_plus(j) >= 0.0);
        CHECK(s.beta_minus(j) >= 0.0);
        const double row = s.theta.row(j).cwiseAbs().sum();
        CHECK(row <= s.beta_plus(j) + s.beta_minus(j) + 1e-12);
      }
    }
  }
}

TEST_CASE("warm-started path matches cold starts") {
  const Dataset d = oracle::random_dataset(60, 10, 4);
  const InteractionBasis b = build_interactions(d);
  const auto lambdas = lambda_grid(lambda_max(d, b), 8, 0.05);
  SolveOptions o;
  o.rel_tol = 1e-10;
  const PathResult path = fit_weak_path(d, b, lambdas, SmoothLoss::gaussian(), o);
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const FitState cold = fit_weak(d, b, lambdas[i], SmoothLoss::gaussian(), o);
    CHECK(std::abs(cold.objective - path.points[i].objective) <= 1e-6 * std::max(1.0, std::abs(cold.objective)));
  }
}

TEST_CASE("lambda grid and descending checks") {
  const auto g = lambda_grid(10.0, 5, 0.01);
  REQUIRE(g.size() == 5);
  CHECK(g.front() == doctest::Approx(10.0));
  CHECK(g.back() == doctest::Approx(0.1));
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] / g[i - 1] == doctest::Approx(g[1] / g[0]));
  CHECK_THROWS_AS(check_descending({1.0, 2.0}), InputError);
  CHECK_THROWS_AS(check_descending({1.0, 1.0}), InputError);
  CHECK_THROWS_AS(check_descending({1.0, -1.0}), InputError);
  CHECK_NOTHROW(check_descending({2.0, 1.0}));
}

TEST_CASE("a single predictor has no interactions and fits like the lasso") {
  const Dataset d = oracle::random_dataset(30, 1, 6);
  const InteractionBasis b = build_interactions(d);
  CHECK(b.num_pairs() == 0);
  const double lam = 0.5 * lambda_max(d, b);
  const FitState s = fit_weak(d, b, lam);
  const double xtx = d.x_std.col(0).squaredNorm();
  const double expect = soft_threshold(d.x_std.col(0).dot(d.y_centered), lam) / xtx;
  CHECK(s.beta()(0) == doctest::Approx(expect).epsilon(1e-6));
}

TEST_CASE("logistic fit is intercept-only at its lambda_max and improves below it") {
  const Dataset d = binary_dataset(80, 4, 12);
  const InteractionBasis b = build_interactions(d);
  const double lmax = lambda_max(d, b, LossKind::logistic);
  const FitState top = fit_weak(d, b, lmax * (1 + 1e-9), SmoothLoss::logistic());
  CHECK(top.beta_plus.norm() + top.beta_minus.norm() + top.theta.norm() == 0.0);
  const double ybar = d.y_raw().mean();
  CHECK(top.beta0 == doctest::Approx(std::log(ybar / (1 - ybar))).epsilon(1e-6));
  const FitState low = fit_weak(d, b, 0.3 * lmax, SmoothLoss::logistic());
  CHECK(low.converged);
  CHECK(low.beta().cwiseAbs().maxCoeff() > 0.0);
  CHECK(hierarchy_violations(low.beta(), low.theta, Hierarchy::weak) == 0);
  // small feasible moves away from the solution do not lower the objective
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  for (int k = 0; k < 20; ++k) {
    FitState moved = low;
    moved.beta0 += 1e-3 * nd(rng);
    for (Index j = 0; j < 4; ++j) {
      moved.beta_plus(j) = std::max(0.0, moved.beta_plus(j) + 1e-3 * nd(rng));
      moved.beta_minus(j) = std::max(0.0, moved.beta_minus(j) + 1e-3 * nd(rng));
    }
    bool feasible = true;
    for (Index j = 0; j < 4; ++j)
      feasible = feasible && moved.theta.row(j).cwiseAbs().sum() <= moved.beta_plus(j) + moved.beta_minus(j);
    if (feasible) CHECK(objective(moved, d, b) >= low.objective - 1e-8);
  }
}

TEST_CASE("bad inputs are rejected") {
  const Dataset d = oracle::random_dataset(20, 3, 1);
  const InteractionBasis b = build_interactions(d);
  CHECK_THROWS_AS(fit_weak(d, b, -1.0), InputError);
  FitState wrong = FitState::zeros(2, 1.0);
  CHECK_THROWS_AS(fit_weak(d, b, 1.0, SmoothLoss::gaussian(), {}, wrong), InputError);
}
