#pragma once

#include "hiernet/types.hpp"

namespace hiernet {

/// Center and scale each column of `x_raw` to mean 0 / sd 1 and center
/// `y_raw`. Throws InputError for n < 2, non-finite cells, or a constant
/// column (the message names the column).
Dataset standardize(const Matrix& x_raw, const Vector& y_raw,
                    SdConvention sd = SdConvention::population);

InteractionBasis build_interactions(const Dataset& data, Index materialize_limit = 400);

/// Map raw-scale rows to the standardized scale with the stored training
/// statistics.
Matrix standardize_rows(const Dataset& data, const Matrix& x_new_raw);

/// Fitted response on raw-scale rows: intercept + X b + Z vec(Theta)/2 with
/// the training standardization and interaction centering. For the logistic
/// loss this is the linear predictor.
Vector predict(const FitState& state, const Dataset& data, const InteractionBasis& basis,
               const Matrix& x_new_raw);

/// Same quantity on the training design without re-standardizing.
Vector fitted_values(const FitState& state, const Dataset& data, const InteractionBasis& basis);

/// Unordered-pair vector of effective interactions (Theta_jk + Theta_kj)/2.
Vector effective_pair_vector(const Matrix& theta, const InteractionBasis& basis);

}  // namespace hiernet
