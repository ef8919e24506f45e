#pragma once

#include "hiernet/scenario.hpp"
#include "hiernet/types.hpp"

#include <cstdint>

namespace hiernet {

/// HL is the strong hierarchical lasso; HF, APF and MEF are forward
/// stepwise in hier, allpairs and main mode.
enum class BenchMethod { hl, apl, mel, hf, apf, mef };

std::string to_string(BenchMethod m);
BenchMethod bench_method_from_string(const std::string& s);
std::vector<BenchMethod> all_bench_methods();

struct BenchConfig {
  ScenarioConfig scenario;
  Index reps = 20;
  std::uint64_t seed = 2024;
  std::vector<BenchMethod> methods = all_bench_methods();
  Index nlambda = 30;
  double lambda_min_ratio = 0.02;
  Index stepwise_max_steps = 50;
};

/// Recovery of the true interaction pattern by an estimate.
/// Sensitivity is 1 when the truth has no interactions, specificity is 1
/// when every pair is a true interaction.
struct Recovery {
  double sensitivity = 1.0;
  double specificity = 1.0;
};

Recovery interaction_recovery(const Matrix& true_theta, const Matrix& theta_hat,
                              double zero_tol = 1e-8);

/// Oracle-selected model of one method on one replicate.
struct ReplicateOutcome {
  double prediction_error = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  Index parameter_sparsity = 0;
  Index practical_sparsity = 0;
};

struct MethodSummary {
  BenchMethod method = BenchMethod::hl;
  double pe_mean = 0.0;
  double pe_se = 0.0;
  double sensitivity_mean = 0.0;
  double sensitivity_se = 0.0;
  double specificity_mean = 0.0;
  double specificity_se = 0.0;
  double parameter_sparsity_mean = 0.0;
  double practical_sparsity_mean = 0.0;
};

struct BenchResult {
  BenchConfig config;
  std::vector<MethodSummary> summaries;
  /// outcomes[r][m] for replicate r and config.methods[m].
  std::vector<std::vector<ReplicateOutcome>> outcomes;
};

/// Evaluate every configured method on one simulated dataset: fit its
/// path, pick the model closest to mu on the training design, and report
/// sigma^2 + ||yhat - mu||^2 / n with interaction recovery.
std::vector<ReplicateOutcome> evaluate_replicate(const SimulatedData& sim, const BenchConfig& cfg);

/// Replicate r uses seed derive_seed(cfg.seed, r). Replicates run in
/// parallel; results do not depend on the thread count.
BenchResult run_benchmark(const BenchConfig& cfg);

}  // namespace hiernet
