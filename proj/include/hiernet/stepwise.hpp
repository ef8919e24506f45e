#pragma once

#include "hiernet/types.hpp"

namespace hiernet {

enum class StepwiseMode { main, allpairs, hier };

std::string to_string(StepwiseMode m);

/// Greedy forward selection on the standardized design. Candidate ids are
/// j in [0, p) for main effects and p + u for unordered pair u.
struct StepwiseResult {
  /// selected[s] is the candidate added at step s + 1.
  std::vector<Index> selected;
  /// rss[s] is the residual sum of squares after s steps (rss[0] = ||y||^2).
  std::vector<double> rss;
  /// models[s] is the least-squares refit after s steps, as a FitState
  /// with symmetric theta.
  std::vector<FitState> models;
};

/// At each step add the admissible candidate that most reduces the RSS of
/// the least-squares refit. In hier mode pair (j, k) is admissible only
/// once both j and k are in the model. Candidates that are numerically in
/// the span of the current model are skipped. Stops after k_max steps or
/// when no candidate reduces the RSS.
StepwiseResult forward_stepwise(const Dataset& data, const InteractionBasis& basis,
                                StepwiseMode mode, Index k_max);

}  // namespace hiernet
