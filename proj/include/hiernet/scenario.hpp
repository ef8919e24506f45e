#pragma once

#include "hiernet/types.hpp"

#include <cstdint>

namespace hiernet {

/// I: interactions only among pairs of nonzero mains (hierarchical truth).
/// II: interactions only among pairs of zero mains (anti-hierarchical).
/// III: interactions only, beta = 0.
/// IV: main effects only, Theta = 0.
enum class Scenario { I, II, III, IV };

std::string to_string(Scenario s);
/// Accepts I..IV (any case) or 1..4.
Scenario scenario_from_string(const std::string& s);

struct ScenarioConfig {
  Scenario scenario = Scenario::I;
  Index n = 100;
  Index p = 30;
  Index n_main = 10;
  Index n_inter = 20;
  double snr_main = 1.5;
  double snr_inter = 1.0;
  double sigma = 1.0;
  std::uint64_t seed = 1;

  /// Throws InputError for an impossible configuration.
  void validate() const;
};

/// One simulated dataset. X entries are i.i.d. N(0, 1); mu = X beta +
/// sum_{j<k} Theta_jk x_j x_k on the raw columns; y = mu + sigma * noise.
/// true_theta is symmetric with zero diagonal.
struct SimulatedData {
  Matrix x_raw;
  Vector y;
  Vector mu;
  Vector true_beta;
  Matrix true_theta;
};

/// Population variance (divisor n) of a signal vector.
double signal_variance(const Vector& v);

/// Interaction part of the mean, sum_{j<k} theta_jk x_j x_k.
Vector interaction_signal(const Matrix& x_raw, const Matrix& theta);

/// Draw a dataset. Nonzero coefficients start at +-1 with random signs and
/// each block is rescaled so that signal_variance(block signal) / sigma^2
/// equals the configured SNR on the realized X.
SimulatedData simulate_scenario(const ScenarioConfig& cfg);

}  // namespace hiernet
