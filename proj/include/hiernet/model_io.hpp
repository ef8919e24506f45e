#pragma once

#include "hiernet/types.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace hiernet {

/// A fitted model together with everything needed to score raw rows.
struct SavedModel {
  FitState state;
  std::vector<std::string> predictors;
  std::string response;
  Vector col_means;
  Vector col_sds;
  SdConvention sd_convention = SdConvention::population;
  double y_mean = 0.0;
  /// Means of the uncentered products, one per unordered pair.
  Vector pair_means;
  /// Stationarity violation from kkt_check, NaN when not computed.
  double kkt_violation = 0.0;
};

inline constexpr int kModelSchemaVersion = 1;

/// Collects the training statistics and, for converged gaussian
/// hierarchical fits, the KKT stationarity violation.
SavedModel make_saved_model(const FitState& state, const Dataset& data,
                            const InteractionBasis& basis, std::vector<std::string> predictors,
                            std::string response);

/// Theta is written dense row-major, or as [j, k, value] triplets when more
/// than 90% of its entries are zero.
nlohmann::json model_to_json(const SavedModel& m);
/// Throws InputError("malformed model file: ...") on any schema problem.
SavedModel model_from_json(const nlohmann::json& j);

void save_model(const SavedModel& m, const std::string& path);
SavedModel load_model(const std::string& path);

/// Fitted response (linear predictor for the logistic loss) on raw rows
/// whose columns follow m.predictors.
Vector predict_saved(const SavedModel& m, const Matrix& x_raw);

/// {nodes: [{id, name, main_effect_nonzero}], edges: [{j, k, weight}]}
/// with weight the effective interaction (Theta_jk + Theta_kj) / 2.
nlohmann::json wheel_json(const SavedModel& m, double zero_tol = 1e-8);

}  // namespace hiernet
