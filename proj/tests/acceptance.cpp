// One line per acceptance criterion; exit status 1 if any fails.

#include "hiernet/bench.hpp"
#include "hiernet/cli.hpp"
#include "hiernet/csv.hpp"
#include "hiernet/dof.hpp"
#include "hiernet/features.hpp"
#include "hiernet/model.hpp"
#include "hiernet/prox.hpp"
#include "hiernet/scenario.hpp"
#include "hiernet/strong_solver.hpp"
#include "hiernet/weak_solver.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <unistd.h>

using namespace hiernet;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Verdict prox_correctness() {
  std::mt19937_64 rng(1001);
  double worst = 0.0;
  const auto t0 = Clock::now();
  for (int trial = 0; trial < 1000; ++trial) {
    const Index m = 1 + trial % 10;
    const ProxInput in = oracle::random_prox_input(rng, m, trial % 3 == 0);
    const ProxOutput got = solve_onerow(in);
    const ProxOutput ref = oracle::onerow_oracle(in);
    worst = std::max({worst, std::abs(got.beta_plus - ref.beta_plus),
                      std::abs(got.beta_minus - ref.beta_minus),
                      (got.theta - ref.theta).cwiseAbs().maxCoeff()});
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-6 && secs < 5.0,
          fmt("max abs diff %.3g over 1000 instances, %.2f s including the oracle", worst, secs)};
}

Verdict kkt_certification() {
  Index weak_fail = 0, strong_fail = 0, perturbed_pass = 0, nonconverged = 0;
  double worst_weak = 0.0, worst_strong = 0.0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const Dataset d = oracle::random_dataset(50, 8, 3000 + seed);
    const InteractionBasis b = build_interactions(d);
    const double lam = (0.05 + 0.5 * static_cast<double>(seed % 10) / 10.0) * lambda_max(d, b);
    const FitState w = fit_weak(d, b, lam);
    const FitState s = fit_strong(d, b, lam);
    if (!w.converged || !s.converged) {
      ++nonconverged;
      continue;
    }
    const KktReport rw = kkt_check(w, d, b, Hierarchy::weak, 1e-4);
    const KktReport rs = kkt_check(s, d, b, Hierarchy::strong, 1e-3);
    worst_weak = std::max(worst_weak, rw.max_stationarity_violation);
    worst_strong = std::max(worst_strong, rs.max_stationarity_violation);
    weak_fail += !rw.pass;
    strong_fail += !rs.pass;
    FitState bw = w;
    bw.beta_plus(seed % 8) += 0.5;
    FitState bs = s;
    bs.theta(0, 1) += 0.3;
    bs.theta(1, 0) += 0.3;
    perturbed_pass += kkt_check(bw, d, b, Hierarchy::weak, 1e-4).pass;
    perturbed_pass += kkt_check(bs, d, b, Hierarchy::strong, 1e-3).pass;
  }
  return {weak_fail + strong_fail + perturbed_pass + nonconverged == 0,
          fmt("failures weak %ld strong %ld, perturbed passes %ld, nonconverged %ld, worst violation "
              "weak %.2g strong %.2g",
              weak_fail, strong_fail, perturbed_pass, nonconverged, worst_weak, worst_strong)};
}

struct HierarchyRun {
  std::vector<FitState> strong;
  std::vector<Dataset> data;
  Index strong_violations = 0;
  Index weak_violations = 0;
  Index weak_count = 0;
};

/// 40 datasets x 5 lambdas, both hierarchies.
HierarchyRun hierarchy_fits() {
  HierarchyRun run;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const Index p = 4 + static_cast<Index>(seed % 5);
    const Dataset d = oracle::random_dataset(40 + 2 * static_cast<Index>(seed), p, 5000 + seed);
    const InteractionBasis b = build_interactions(d);
    const auto lambdas = lambda_grid(lambda_max(d, b), 5, 0.05);
    const PathResult ps = fit_strong_path(d, b, lambdas);
    const PathResult pw = fit_weak_path(d, b, lambdas);
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      const FitState& s = ps.points[i].fit;
      const FitState& w = pw.points[i].fit;
      run.strong_violations += hierarchy_violations(s.beta(), s.theta, Hierarchy::strong, 1e-8);
      run.weak_violations += hierarchy_violations(w.beta(), w.theta, Hierarchy::weak, 1e-8);
      ++run.weak_count;
      run.strong.push_back(s);
      run.data.push_back(d);
    }
  }
  return run;
}

Verdict hierarchy(const HierarchyRun& run) {
  return {run.strong_violations == 0 && run.weak_violations == 0 && run.strong.size() >= 200 &&
              run.weak_count >= 200,
          fmt("%zu strong fits with %ld violations, %ld weak fits with %ld violations",
              run.strong.size(), run.strong_violations, run.weak_count, run.weak_violations)};
}

Verdict reformulation(const HierarchyRun& run) {
  double worst_total = 0.0, worst_row = 0.0;
  Index checked = 0;
  for (const FitState& s : run.strong) {
    if (!s.converged) continue;
    ++checked;
    const Vector beta = s.beta();
    const double split = s.lambda * (s.beta_plus.sum() + s.beta_minus.sum()) +
                         0.5 * s.lambda * s.theta.cwiseAbs().sum();
    worst_total = std::max(worst_total, std::abs(split - penalty_reformulation_value(beta, s.theta, s.lambda)));
    for (Index j = 0; j < s.p(); ++j) {
      const double budget = std::max(std::abs(beta(j)), s.theta.row(j).cwiseAbs().sum());
      worst_row = std::max(worst_row, std::abs(s.beta_plus(j) + s.beta_minus(j) - budget));
    }
  }
  return {checked == static_cast<Index>(run.strong.size()) && worst_total <= 1e-6 && worst_row <= 1e-6,
          fmt("%ld converged strong fits, penalty gap %.2g, per-row gap %.2g", checked, worst_total,
              worst_row)};
}

Verdict low_dimensional() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Dataset d = oracle::random_dataset(30, 2, 700 + seed);
    const InteractionBasis b = build_interactions(d);
    const double lam = (0.05 + 0.045 * static_cast<double>(seed)) * lambda_max(d, b);
    SolveOptions o;
    o.eps_ridge_factor = 0.0;
    o.rel_tol = 1e-10;
    AdmmOptions a;
    a.tol_primal = a.tol_dual = 1e-9;
    a.max_iters = 5000;
    const FitState s = fit_strong(d, b, lam, o, a);
    const oracle::P2Solution ref = oracle::p2_strong_oracle(d.x_std, d.y_centered, lam);
    worst = std::max(worst, std::abs(s.objective - ref.objective));
  }
  return {worst <= 1e-5, fmt("max objective gap %.3g over 20 instances", worst)};
}

Verdict degrees_of_freedom() {
  const Index n = 30, p = 6;
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> nd;
  Matrix x(n, p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j) x(i, j) = nd(rng);
  const Dataset d0 = standardize(x, Vector::LinSpaced(n, 0, 1));
  Vector mu(n);
  for (Index i = 0; i < n; ++i) {
    const auto r = d0.x_std.row(i);
    mu(i) = 2 * r(0) - 1.5 * r(1) + r(2) + 1.5 * r(0) * r(1) - r(0) * r(2);
  }
  const Dataset dm = standardize(x, mu);
  const double lmax = lambda_max(dm, build_interactions(dm));
  std::vector<double> lambdas;
  for (double f : {1.0, 0.7, 0.5, 0.35, 0.25, 0.18, 0.12, 0.08}) lambdas.push_back(f * lmax);
  const auto t0 = Clock::now();
  const DfStudy s = df_monte_carlo(mu, 1.0, x, lambdas, 2000, 7);
  const double secs = seconds_since(t0);
  double worst_z = 0.0;
  for (std::size_t l = 0; l < lambdas.size(); ++l) {
    const double se = std::hypot(s.df_mc_se[l], s.df_estimate_se[l]);
    const double gap = std::abs(s.df_mc[l] - s.df_estimate_mean[l]);
    worst_z = std::max(worst_z, se > 0 ? gap / se : (gap > 0 ? 1e9 : 0.0));
  }
  return {worst_z <= 2.0 && s.bound_violations == 0 && secs < 1800.0,
          fmt("worst |mc - estimate| / se %.2f, bound violations %ld, nonconverged %ld, %.0f s",
              worst_z, s.bound_violations, s.nonconverged, secs)};
}

const MethodSummary& summary_of(const BenchResult& r, BenchMethod m) {
  for (const auto& s : r.summaries)
    if (s.method == m) return s;
  throw std::logic_error("method missing from benchmark");
}

Verdict simulation_study() {
  auto run = [](Scenario sc) {
    BenchConfig c;
    c.scenario.scenario = sc;
    c.reps = 20;
    c.methods = {BenchMethod::hl, BenchMethod::apl, BenchMethod::mel};
    return run_benchmark(c);
  };
  const auto t0 = Clock::now();
  const BenchResult r1 = run(Scenario::I);
  const BenchResult r4 = run(Scenario::IV);
  const BenchResult r3 = run(Scenario::III);
  const double hl1 = summary_of(r1, BenchMethod::hl).pe_mean;
  const double apl1 = summary_of(r1, BenchMethod::apl).pe_mean;
  const double mel1 = summary_of(r1, BenchMethod::mel).pe_mean;
  const double mel4 = summary_of(r4, BenchMethod::mel).pe_mean;
  const double apl4 = summary_of(r4, BenchMethod::apl).pe_mean;
  const double sapl3 = summary_of(r3, BenchMethod::apl).sensitivity_mean;
  const double shl3 = summary_of(r3, BenchMethod::hl).sensitivity_mean;
  return {hl1 < apl1 && hl1 < mel1 && mel4 <= apl4 && sapl3 >= shl3,
          fmt("I: PE HL %.3f APL %.3f MEL %.3f; IV: PE MEL %.3f APL %.3f; III: sensitivity APL %.3f "
              "HL %.3f; %.0f s",
              hl1, apl1, mel1, mel4, apl4, sapl3, shl3, seconds_since(t0))};
}

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

double max_rel_grad_error(const SmoothLoss& loss, FitState s, const Dataset& d, const InteractionBasis& b) {
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
  if (loss.is_logistic()) check(s.beta0, g.beta0);
  for (Index j = 0; j < s.p(); ++j) {
    check(s.beta_plus(j), g.beta_plus(j));
    check(s.beta_minus(j), g.beta_minus(j));
    for (Index k = 0; k < s.p(); ++k)
      if (j != k) check(s.theta(j, k), g.theta(j, k));
  }
  return worst;
}

Verdict gradient_checks() {
  const Index n = 25, p = 5;
  std::mt19937_64 rng(88);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> unif;
  const Dataset d = oracle::random_dataset(n, p, 88);
  const InteractionBasis b = build_interactions(d);
  Matrix x(n, p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j) x(i, j) = nd(rng);
  Vector y(n);
  for (Index i = 0; i < n; ++i) y(i) = unif(rng) < 1 / (1 + std::exp(-x(i, 0) - x(i, 0) * x(i, 1))) ? 1 : 0;
  const Dataset db = standardize(x, y);
  const InteractionBasis bb = build_interactions(db);
  double worst[4] = {0, 0, 0, 0};
  for (int point = 0; point < 100; ++point) {
    const FitState s = random_point(p, rng);
    Matrix omega(p, p), u(p, p);
    for (Index j = 0; j < p; ++j)
      for (Index k = 0; k < p; ++k) {
        omega(j, k) = nd(rng);
        u(j, k) = nd(rng);
      }
    omega = (0.5 * (omega + omega.transpose())).eval();
    omega.diagonal().setZero();
    u.diagonal().setZero();
    const double rho = 0.1 + 3 * unif(rng);
    worst[0] = std::max(worst[0], max_rel_grad_error(SmoothLoss::gaussian(), s, d, b));
    worst[1] = std::max(worst[1], max_rel_grad_error(SmoothLoss::logistic(), s, db, bb));
    worst[2] = std::max(worst[2], max_rel_grad_error(SmoothLoss::augmented(rho, omega, u), s, d, b));
    worst[3] = std::max(worst[3], max_rel_grad_error(
                                      SmoothLoss::augmented(rho, omega, u, LossKind::logistic), s, db, bb));
  }
  return {std::max({worst[0], worst[1], worst[2], worst[3]}) <= 1e-5,
          fmt("max relative error gaussian %.2g logistic %.2g augmented %.2g augmented logistic %.2g "
              "at 100 points",
              worst[0], worst[1], worst[2], worst[3])};
}

bool feasible(const FitState& s, double tol) {
  for (Index j = 0; j < s.p(); ++j) {
    if (s.beta_plus(j) < 0 || s.beta_minus(j) < 0) return false;
    if (s.theta.row(j).cwiseAbs().sum() > s.beta_plus(j) + s.beta_minus(j) + tol) return false;
  }
  return true;
}

Verdict descent_and_feasibility() {
  Index fits = 0, increases = 0, infeasible = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Dataset d = oracle::random_dataset(40, 6, 9000 + seed);
    const InteractionBasis b = build_interactions(d);
    const double lam = (0.05 + 0.04 * static_cast<double>(seed)) * lambda_max(d, b);
    for (bool accel : {true, false}) {
      SolveOptions o;
      o.acceleration = accel;
      const FitState s = fit_weak(d, b, lam, SmoothLoss::gaussian(), o);
      ++fits;
      const auto& tr = s.diagnostics.objective_trace;
      for (std::size_t i = 1; i < tr.size(); ++i)
        if (tr[i] > tr[i - 1] + 1e-12 * std::abs(tr[i - 1])) ++increases;
      // the solver is deterministic, so truncating at k iterations exposes iterate k
      const Index horizon = std::min<Index>(s.iterations, 60);
      for (Index k = 1; k <= horizon; ++k) {
        SolveOptions ok = o;
        ok.max_iters = k;
        if (!feasible(fit_weak(d, b, lam, SmoothLoss::gaussian(), ok), 1e-12)) ++infeasible;
      }
      if (!feasible(s, 1e-12)) ++infeasible;
    }
  }
  return {increases == 0 && infeasible == 0,
          fmt("%ld fits, %ld objective increases, %ld infeasible iterates", fits, increases, infeasible)};
}

Verdict path_performance() {
  const Dataset d = oracle::random_dataset(100, 50, 4242);
  const InteractionBasis b = build_interactions(d);
  const auto lambdas = lambda_grid(lambda_max(d, b), 20, 0.05);
  const auto t0 = Clock::now();
  const PathResult path = fit_weak_path(d, b, lambdas);
  const double secs = seconds_since(t0);
  double worst = 0.0;
  Index nonconverged = 0;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const FitState cold = fit_weak(d, b, lambdas[i]);
    nonconverged += !cold.converged + !path.points[i].fit.converged;
    worst = std::max(worst, std::abs(cold.objective - path.points[i].objective) /
                                std::max(1.0, std::abs(cold.objective)));
  }
  return {secs < 30.0 && worst <= 1e-6 && nonconverged == 0,
          fmt("%zu interactions, path %.2f s, warm vs cold relative gap %.2g, nonconverged %ld",
              static_cast<std::size_t>(b.num_pairs()), secs, worst, nonconverged)};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "hiernet");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

Verdict determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("hiernet_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  auto at = [&](const std::string& name) { return (dir / name).string(); };
  int bad_exit = 0;
  bad_exit += cli({"simulate", "--scenario", "I", "--seed", "17", "--out", at("d.csv"), "--truth", at("t.json")});
  for (const std::string tag : {"a", "b"}) {
    bad_exit += cli({"bench", "--scenario", "II", "--reps", "3", "--seed", "99", "--out", at("bench_" + tag + ".tsv"),
                     "--json", at("bench_" + tag + ".json")});
    bad_exit += cli({"cv", "--data", at("d.csv"), "--response", "y", "--method", "strong", "--folds", "5",
                     "--seed", "3", "--nlambda", "10", "--out", at("cv_" + tag + ".tsv"), "--model",
                     at("cv_" + tag + ".json")});
  }
  const bool same = slurp(at("bench_a.tsv")) == slurp(at("bench_b.tsv")) &&
                    slurp(at("bench_a.json")) == slurp(at("bench_b.json")) &&
                    slurp(at("cv_a.tsv")) == slurp(at("cv_b.tsv")) &&
                    slurp(at("cv_a.json")) == slurp(at("cv_b.json")) && !slurp(at("cv_a.tsv")).empty();
  fs::remove_all(dir);
  return {same && bad_exit == 0,
          fmt("bench (scenario II, 3 reps) and cv (strong, 5 folds) reruns %s, nonzero exits %d",
              same ? "byte-identical" : "differ", bad_exit)};
}

}  // namespace

int main() {
  std::vector<std::pair<int, std::function<Verdict()>>> criteria;
  HierarchyRun hier;
  criteria.emplace_back(1, prox_correctness);
  criteria.emplace_back(2, kkt_certification);
  criteria.emplace_back(3, [&] {
    hier = hierarchy_fits();
    return hierarchy(hier);
  });
  criteria.emplace_back(4, [&] { return reformulation(hier); });
  criteria.emplace_back(5, low_dimensional);
  criteria.emplace_back(6, degrees_of_freedom);
  criteria.emplace_back(7, simulation_study);
  criteria.emplace_back(8, gradient_checks);
  criteria.emplace_back(9, descent_and_feasibility);
  criteria.emplace_back(10, path_performance);
  criteria.emplace_back(11, determinism);
  int failed = 0;
  for (auto& [id, check] : criteria) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::cout << "criterion " << id << ": " << (v.pass ? "PASS" : "FAIL") << " (" << v.detail << ")"
              << std::endl;
  }
  std::cout << (failed ? "acceptance: FAIL" : "acceptance: PASS") << std::endl;
  return failed ? 1 : 0;
}
