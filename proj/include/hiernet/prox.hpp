#pragma once

#include "hiernet/types.hpp"

namespace hiernet {

/// One row of the proximal subproblem: minimize
///   1/2 (b+ - bt+)^2 + 1/2 (b- - bt-)^2 + 1/2 ||th - tht||^2 + t lambda/2 ||th||_1
/// subject to ||th||_1 <= b+ + b-, b+ >= 0, b- >= 0.
struct ProxInput {
  double beta_plus_tilde = 0.0;
  double beta_minus_tilde = 0.0;
  Vector theta_tilde;
  double lambda = 0.0;
  double t = 1.0;
};

struct ProxOutput {
  double beta_plus = 0.0;
  double beta_minus = 0.0;
  Vector theta;
  double alpha_hat = 0.0;
};

/// ||S(tht, t(lambda/2 + alpha))||_1 - [bt+ + t alpha]_+ - [bt- + t alpha]_+.
/// Nonincreasing and piecewise linear in alpha.
double eval_f(double alpha, const ProxInput& in);

/// Exact minimizer via the root of eval_f.
ProxOutput solve_onerow(const ProxInput& in);

/// Primal point for a given dual value alpha.
ProxOutput onerow_primal(double alpha, const ProxInput& in);

/// Value of the row objective above (feasibility is not checked).
double onerow_objective(const ProxInput& in, double beta_plus, double beta_minus,
                        const Vector& theta);

}  // namespace hiernet
