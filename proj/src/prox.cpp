#include "hiernet/prox.hpp"

#include "hiernet/model.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace hiernet {

namespace {

constexpr double kKnotTol = 1e-12;

double pos(double v) { return v > 0.0 ? v : 0.0; }

}  // namespace

double eval_f(double alpha, const ProxInput& in) {
  const double thr = in.t * (0.5 * in.lambda + alpha);
  double l1 = 0.0;
  for (Index k = 0; k < in.theta_tilde.size(); ++k) l1 += pos(std::abs(in.theta_tilde(k)) - thr);
  return l1 - pos(in.beta_plus_tilde + in.t * alpha) - pos(in.beta_minus_tilde + in.t * alpha);
}

ProxOutput onerow_primal(double alpha, const ProxInput& in) {
  ProxOutput out;
  out.alpha_hat = alpha;
  const double thr = in.t * (0.5 * in.lambda + alpha);
  out.theta.resize(in.theta_tilde.size());
  for (Index k = 0; k < in.theta_tilde.size(); ++k) {
    out.theta(k) = soft_threshold(in.theta_tilde(k), thr);
  }
  out.beta_plus = pos(in.beta_plus_tilde + in.t * alpha);
  out.beta_minus = pos(in.beta_minus_tilde + in.t * alpha);
  return out;
}

double onerow_objective(const ProxInput& in, double beta_plus, double beta_minus,
                        const Vector& theta) {
  const double db = beta_plus - in.beta_plus_tilde;
  const double dm = beta_minus - in.beta_minus_tilde;
  return 0.5 * (db * db + dm * dm + (theta - in.theta_tilde).squaredNorm()) +
         in.t * 0.5 * in.lambda * theta.lpNorm<1>();
}

ProxOutput solve_onerow(const ProxInput& in) {
  const double f0 = eval_f(0.0, in);
  if (f0 <= 0.0) return onerow_primal(0.0, in);

  std::vector<double> knots;
  knots.reserve(static_cast<std::size_t>(in.theta_tilde.size()) + 3);
  knots.push_back(0.0);
  for (Index k = 0; k < in.theta_tilde.size(); ++k) {
    const double a = std::abs(in.theta_tilde(k)) / in.t - 0.5 * in.lambda;
    if (a > 0.0) knots.push_back(a);
  }
  for (double b : {in.beta_plus_tilde, in.beta_minus_tilde}) {
    const double a = -b / in.t;
    if (a > 0.0) knots.push_back(a);
  }
  std::sort(knots.begin(), knots.end());
  std::vector<double> uniq;
  for (double a : knots) {
    if (uniq.empty() || a - uniq.back() > kKnotTol) uniq.push_back(a);
  }

  double p1 = uniq.front();
  double fp1 = f0;
  for (std::size_t i = 1; i < uniq.size(); ++i) {
    const double p2 = uniq[i];
    const double fp2 = eval_f(p2, in);
    if (std::abs(fp2) <= kKnotTol) return onerow_primal(p2, in);
    if (fp2 < 0.0) {
      const double alpha = p1 - fp1 * (p2 - p1) / (fp2 - fp1);
      return onerow_primal(std::clamp(alpha, p1, p2), in);
    }
    p1 = p2;
    fp1 = fp2;
  }
  // Past the last knot every soft-threshold is zero and both [.]_+ terms are
  // active, so f(alpha) = -(bt+ + bt-) - 2 t alpha.
  const double alpha = -(in.beta_plus_tilde + in.beta_minus_tilde) / (2.0 * in.t);
  return onerow_primal(std::max(alpha, p1), in);
}

}  // namespace hiernet
