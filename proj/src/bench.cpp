#include "hiernet/bench.hpp"

#include "hiernet/features.hpp"
#include "hiernet/model.hpp"
#include "hiernet/parallel.hpp"
#include "hiernet/selection.hpp"
#include "hiernet/stepwise.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <tuple>

namespace hiernet {

std::string to_string(BenchMethod m) {
  switch (m) {
    case BenchMethod::hl: return "HL";
    case BenchMethod::apl: return "APL";
    case BenchMethod::mel: return "MEL";
    case BenchMethod::hf: return "HF";
    case BenchMethod::apf: return "APF";
    case BenchMethod::mef: return "MEF";
  }
  return "?";
}

BenchMethod bench_method_from_string(const std::string& s) {
  std::string u;
  for (char c : s) u.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  for (BenchMethod m : all_bench_methods())
    if (to_string(m) == u) return m;
  throw InputError("unknown benchmark method '" + s + "' (expected HL, APL, MEL, HF, APF or MEF)");
}

std::vector<BenchMethod> all_bench_methods() {
  return {BenchMethod::hl, BenchMethod::apl, BenchMethod::mel,
          BenchMethod::hf, BenchMethod::apf, BenchMethod::mef};
}

Recovery interaction_recovery(const Matrix& true_theta, const Matrix& theta_hat, double zero_tol) {
  const Index p = true_theta.rows();
  if (theta_hat.rows() != p || theta_hat.cols() != p) throw InputError("theta dimensions differ");
  const Matrix eff = effective_interactions(theta_hat);
  const double tt = zero_threshold(p ? eff.cwiseAbs().maxCoeff() : 0.0, zero_tol);
  Index pos = 0, hit = 0, neg = 0, reject = 0;
  for (Index j = 0; j < p; ++j) {
    for (Index k = j + 1; k < p; ++k) {
      const bool truth = true_theta(j, k) != 0.0 || true_theta(k, j) != 0.0;
      const bool est = std::abs(eff(j, k)) > tt;
      if (truth) {
        ++pos;
        hit += est;
      } else {
        ++neg;
        reject += !est;
      }
    }
  }
  Recovery r;
  if (pos > 0) r.sensitivity = static_cast<double>(hit) / static_cast<double>(pos);
  if (neg > 0) r.specificity = static_cast<double>(reject) / static_cast<double>(neg);
  return r;
}

namespace {

StepwiseMode stepwise_mode(BenchMethod m) {
  switch (m) {
    case BenchMethod::hf: return StepwiseMode::hier;
    case BenchMethod::apf: return StepwiseMode::allpairs;
    default: return StepwiseMode::main;
  }
}

Method penalized_method(BenchMethod m) {
  switch (m) {
    case BenchMethod::hl: return Method::strong;
    case BenchMethod::apl: return Method::apl;
    default: return Method::mel;
  }
}

bool is_stepwise(BenchMethod m) {
  return m == BenchMethod::hf || m == BenchMethod::apf || m == BenchMethod::mef;
}

}  // namespace

std::vector<ReplicateOutcome> evaluate_replicate(const SimulatedData& sim, const BenchConfig& cfg) {
  const Dataset data = standardize(sim.x_raw, sim.y);
  const InteractionBasis basis = build_interactions(data);
  const double s2 = cfg.scenario.sigma * cfg.scenario.sigma;
  const double n = static_cast<double>(data.n());

  std::vector<ReplicateOutcome> out;
  for (BenchMethod m : cfg.methods) {
    std::vector<FitState> models;
    if (is_stepwise(m)) {
      const StepwiseMode mode = stepwise_mode(m);
      const Index cand = mode == StepwiseMode::main ? data.p() : data.p() + basis.num_pairs();
      const Index k_max = std::min({cfg.stepwise_max_steps, cand, data.n() - 2});
      models = forward_stepwise(data, basis, mode, k_max).models;
    } else {
      const Method pm = penalized_method(m);
      const auto lambdas =
          method_lambda_grid(pm, data, basis, cfg.nlambda, cfg.lambda_min_ratio);
      PathResult path = fit_path(pm, data, basis, lambdas);
      for (auto& pt : path.points) models.push_back(std::move(pt.fit));
    }
    std::vector<Vector> fitted;
    fitted.reserve(models.size());
    for (const auto& s : models) fitted.push_back(fitted_values(s, data, basis));
    const Index best = oracle_select(fitted, sim.mu);
    const FitState& s = models[static_cast<std::size_t>(best)];

    ReplicateOutcome o;
    o.prediction_error = s2 + (fitted[static_cast<std::size_t>(best)] - sim.mu).squaredNorm() / n;
    const Recovery rec = interaction_recovery(sim.true_theta, s.theta);
    o.sensitivity = rec.sensitivity;
    o.specificity = rec.specificity;
    const SparsityMetrics sm = sparsity_metrics(s);
    o.parameter_sparsity = sm.parameter_sparsity;
    o.practical_sparsity = sm.practical_sparsity;
    out.push_back(o);
  }
  return out;
}

namespace {

std::pair<double, double> mean_se(const std::vector<double>& v) {
  const double m = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= m;
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (m - 1.0) / m)};
}

}  // namespace

BenchResult run_benchmark(const BenchConfig& cfg) {
  if (cfg.reps < 1) throw InputError("benchmark needs reps >= 1");
  if (cfg.methods.empty()) throw InputError("benchmark needs at least one method");
  cfg.scenario.validate();

  BenchResult res;
  res.config = cfg;
  res.outcomes.resize(static_cast<std::size_t>(cfg.reps));
  parallel_for(cfg.reps, [&](Index r) {
    ScenarioConfig sc = cfg.scenario;
    sc.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(r));
    try {
      res.outcomes[static_cast<std::size_t>(r)] = evaluate_replicate(simulate_scenario(sc), cfg);
    } catch (const InputError& e) {
      throw InputError("replicate " + std::to_string(r) + ": " + e.what());
    } catch (const std::exception& e) {
      throw SolverError("replicate " + std::to_string(r) + ": " + e.what());
    }
  });

  for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
    std::vector<double> pe, sens, specif;
    double ps = 0.0, pr = 0.0;
    for (const auto& rep : res.outcomes) {
      pe.push_back(rep[m].prediction_error);
      sens.push_back(rep[m].sensitivity);
      specif.push_back(rep[m].specificity);
      ps += static_cast<double>(rep[m].parameter_sparsity);
      pr += static_cast<double>(rep[m].practical_sparsity);
    }
    MethodSummary s;
    s.method = cfg.methods[m];
    std::tie(s.pe_mean, s.pe_se) = mean_se(pe);
    std::tie(s.sensitivity_mean, s.sensitivity_se) = mean_se(sens);
    std::tie(s.specificity_mean, s.specificity_se) = mean_se(specif);
    s.parameter_sparsity_mean = ps / static_cast<double>(cfg.reps);
    s.practical_sparsity_mean = pr / static_cast<double>(cfg.reps);
    res.summaries.push_back(s);
  }
  return res;
}

}  // namespace hiernet
