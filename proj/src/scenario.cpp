#include "hiernet/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <random>

namespace hiernet {

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::I: return "I";
    case Scenario::II: return "II";
    case Scenario::III: return "III";
    case Scenario::IV: return "IV";
  }
  return "?";
}

Scenario scenario_from_string(const std::string& s) {
  std::string u;
  for (char c : s) u.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  if (u == "I" || u == "1") return Scenario::I;
  if (u == "II" || u == "2") return Scenario::II;
  if (u == "III" || u == "3") return Scenario::III;
  if (u == "IV" || u == "4") return Scenario::IV;
  throw InputError("unknown scenario '" + s + "' (expected I, II, III or IV)");
}

void ScenarioConfig::validate() const {
  if (n < 2) throw InputError("scenario needs n >= 2");
  if (p < 1) throw InputError("scenario needs p >= 1");
  if (n_main < 0 || n_main > p) throw InputError("n_main must lie in [0, p]");
  if (n_inter < 0 || n_inter > p * (p - 1) / 2) throw InputError("n_inter must lie in [0, p(p-1)/2]");
  if (!(sigma > 0.0)) throw InputError("sigma must be positive");
  if (snr_main < 0.0 || snr_inter < 0.0) throw InputError("SNR values must be nonnegative");
  if (scenario == Scenario::I && n_inter > n_main * (n_main - 1) / 2) {
    throw InputError("scenario I: n_inter exceeds the number of pairs of nonzero mains");
  }
  if (scenario == Scenario::II) {
    const Index free = p - n_main;
    if (n_inter > free * (free - 1) / 2) {
      throw InputError("scenario II: n_inter exceeds the number of pairs of zero mains");
    }
  }
}

double signal_variance(const Vector& v) {
  if (v.size() == 0) return 0.0;
  return (v.array() - v.mean()).square().sum() / static_cast<double>(v.size());
}

Vector interaction_signal(const Matrix& x_raw, const Matrix& theta) {
  Vector out = Vector::Zero(x_raw.rows());
  for (Index j = 0; j < theta.rows(); ++j)
    for (Index k = j + 1; k < theta.cols(); ++k)
      if (theta(j, k) != 0.0) out += theta(j, k) * x_raw.col(j).cwiseProduct(x_raw.col(k));
  return out;
}

namespace {

double rescale(double current_var, double target_var) {
  if (target_var == 0.0 || current_var <= 0.0) return 0.0;
  return std::sqrt(target_var / current_var);
}

}  // namespace

SimulatedData simulate_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  const Index n = cfg.n;
  const Index p = cfg.p;

  SimulatedData out;
  out.x_raw.resize(n, p);
  for (Index j = 0; j < p; ++j)
    for (Index i = 0; i < n; ++i) out.x_raw(i, j) = normal(rng);

  std::vector<Index> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<bool> is_main(static_cast<std::size_t>(p), false);
  const bool has_mains = cfg.scenario != Scenario::III;
  const bool has_inters = cfg.scenario != Scenario::IV;
  out.true_beta = Vector::Zero(p);
  if (has_mains) {
    for (Index m = 0; m < cfg.n_main; ++m) {
      const Index j = order[static_cast<std::size_t>(m)];
      is_main[static_cast<std::size_t>(j)] = true;
      out.true_beta(j) = coin(rng) ? 1.0 : -1.0;
    }
  }

  out.true_theta = Matrix::Zero(p, p);
  if (has_inters) {
    std::vector<std::pair<Index, Index>> pool;
    for (Index j = 0; j < p; ++j) {
      for (Index k = j + 1; k < p; ++k) {
        const bool mj = is_main[static_cast<std::size_t>(j)];
        const bool mk = is_main[static_cast<std::size_t>(k)];
        const bool admit = cfg.scenario == Scenario::I    ? (mj && mk)
                           : cfg.scenario == Scenario::II ? (!mj && !mk)
                                                          : true;
        if (admit) pool.emplace_back(j, k);
      }
    }
    std::shuffle(pool.begin(), pool.end(), rng);
    for (Index u = 0; u < cfg.n_inter; ++u) {
      const auto [j, k] = pool[static_cast<std::size_t>(u)];
      const double s = coin(rng) ? 1.0 : -1.0;
      out.true_theta(j, k) = out.true_theta(k, j) = s;
    }
  }

  const double s2 = cfg.sigma * cfg.sigma;
  const Vector main_sig = out.x_raw * out.true_beta;
  out.true_beta *= rescale(signal_variance(main_sig), cfg.snr_main * s2);
  const Vector inter_sig = interaction_signal(out.x_raw, out.true_theta);
  out.true_theta *= rescale(signal_variance(inter_sig), cfg.snr_inter * s2);

  out.mu = out.x_raw * out.true_beta + interaction_signal(out.x_raw, out.true_theta);
  out.y.resize(n);
  for (Index i = 0; i < n; ++i) out.y(i) = out.mu(i) + cfg.sigma * normal(rng);
  return out;
}

}  // namespace hiernet
