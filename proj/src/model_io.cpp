#include "hiernet/model_io.hpp"

#include "hiernet/model.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace hiernet {

using nlohmann::json;

SavedModel make_saved_model(const FitState& state, const Dataset& data,
                            const InteractionBasis& basis, std::vector<std::string> predictors,
                            std::string response) {
  if (static_cast<Index>(predictors.size()) != data.p()) {
    throw InputError("predictor names do not match the design width");
  }
  SavedModel m;
  m.state = state;
  m.predictors = std::move(predictors);
  m.response = std::move(response);
  m.col_means = data.col_means;
  m.col_sds = data.col_sds;
  m.sd_convention = data.sd_convention;
  m.y_mean = data.y_mean;
  m.pair_means = basis.pair_means();
  m.kkt_violation = std::numeric_limits<double>::quiet_NaN();
  const bool hierarchical = state.method == Method::strong || state.method == Method::weak;
  if (hierarchical && state.converged && state.loss == LossKind::gaussian) {
    const Hierarchy h = state.method == Method::strong ? Hierarchy::strong : Hierarchy::weak;
    m.kkt_violation = kkt_check(state, data, basis, h, 1e-4).max_stationarity_violation;
  }
  return m;
}

namespace {

json vec_json(const Vector& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

[[noreturn]] void malformed(const std::string& what) {
  throw InputError("malformed model file: " + what);
}

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) malformed(std::string("missing '") + key + "'");
  return j.at(key);
}

double num(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_number()) malformed(std::string("'") + key + "' is not a number");
  return v.get<double>();
}

Vector vec(const json& j, const char* key, Index expect) {
  const json& v = field(j, key);
  if (!v.is_array()) malformed(std::string("'") + key + "' is not an array");
  if (expect >= 0 && static_cast<Index>(v.size()) != expect) {
    malformed(std::string("'") + key + "' has length " + std::to_string(v.size()) + ", expected " +
              std::to_string(expect));
  }
  Vector out(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) malformed(std::string("'") + key + "' holds a non-number");
    out(static_cast<Index>(i)) = v[i].get<double>();
  }
  return out;
}

}  // namespace

json model_to_json(const SavedModel& m) {
  const FitState& s = m.state;
  const Index p = s.p();
  json j;
  j["schema_version"] = kModelSchemaVersion;
  j["method"] = to_string(s.method);
  j["loss"] = to_string(s.loss);
  j["lambda"] = s.lambda;
  j["eps_ridge"] = s.eps_ridge;
  j["predictors"] = m.predictors;
  j["response"] = m.response;

  Vector z_means(p * (p - 1));
  Index u = 0;
  for (Index a = 0; a < p; ++a)
    for (Index b = a + 1; b < p; ++b, ++u) {
      z_means(a * (p - 1) + b - 1) = m.pair_means(u);
      z_means(b * (p - 1) + a) = m.pair_means(u);
    }
  j["standardization"] = {{"col_means", vec_json(m.col_means)},
                          {"col_sds", vec_json(m.col_sds)},
                          {"sd_convention", to_string(m.sd_convention)},
                          {"y_mean", m.y_mean},
                          {"z_means", vec_json(z_means)}};
  j["beta0"] = s.beta0;
  j["beta_plus"] = vec_json(s.beta_plus);
  j["beta_minus"] = vec_json(s.beta_minus);

  const Index total = p * p;
  const Index zeros = static_cast<Index>((s.theta.array() == 0.0).count());
  json th;
  th["rows"] = p;
  th["cols"] = p;
  if (total > 0 && static_cast<double>(zeros) > 0.9 * static_cast<double>(total)) {
    th["format"] = "sparse";
    json entries = json::array();
    for (Index a = 0; a < p; ++a)
      for (Index b = 0; b < p; ++b)
        if (s.theta(a, b) != 0.0) entries.push_back(json::array({a, b, s.theta(a, b)}));
    th["entries"] = entries;
  } else {
    th["format"] = "dense";
    json values = json::array();
    for (Index a = 0; a < p; ++a)
      for (Index b = 0; b < p; ++b) values.push_back(s.theta(a, b));
    th["values"] = values;
  }
  j["theta"] = th;

  json diag;
  diag["iterations"] = s.iterations;
  diag["converged"] = s.converged;
  diag["objective"] = s.objective;
  if (std::isnan(m.kkt_violation)) {
    diag["kkt_violation"] = nullptr;
  } else {
    diag["kkt_violation"] = m.kkt_violation;
  }
  j["diagnostics"] = diag;
  return j;
}

SavedModel model_from_json(const json& j) {
  if (!j.is_object()) malformed("top level is not an object");
  const json& ver = field(j, "schema_version");
  if (!ver.is_number_integer() || ver.get<int>() != kModelSchemaVersion) {
    malformed("unsupported schema_version");
  }
  SavedModel m;
  FitState& s = m.state;
  try {
    s.method = method_from_string(field(j, "method").get<std::string>());
    s.loss = loss_kind_from_string(field(j, "loss").get<std::string>());
    m.predictors = field(j, "predictors").get<std::vector<std::string>>();
    m.response = field(j, "response").get<std::string>();
  } catch (const json::exception& e) {
    malformed(e.what());
  } catch (const InputError& e) {
    malformed(e.what());
  }
  s.lambda = num(j, "lambda");
  s.eps_ridge = num(j, "eps_ridge");
  const auto p = static_cast<Index>(m.predictors.size());

  const json& st = field(j, "standardization");
  m.col_means = vec(st, "col_means", p);
  m.col_sds = vec(st, "col_sds", p);
  m.y_mean = num(st, "y_mean");
  try {
    m.sd_convention = sd_convention_from_string(field(st, "sd_convention").get<std::string>());
  } catch (const std::exception& e) {
    malformed(e.what());
  }
  const Vector z_means = vec(st, "z_means", p * (p - 1));
  m.pair_means.resize(p * (p - 1) / 2);
  Index u = 0;
  for (Index a = 0; a < p; ++a)
    for (Index b = a + 1; b < p; ++b) m.pair_means(u++) = z_means(a * (p - 1) + b - 1);

  s.beta0 = num(j, "beta0");
  s.beta_plus = vec(j, "beta_plus", p);
  s.beta_minus = vec(j, "beta_minus", p);

  const json& th = field(j, "theta");
  if (num(th, "rows") != static_cast<double>(p) || num(th, "cols") != static_cast<double>(p)) {
    malformed("theta dimensions do not match the predictors");
  }
  s.theta = Matrix::Zero(p, p);
  const json& fmt = field(th, "format");
  if (fmt == "dense") {
    const Vector v = vec(th, "values", p * p);
    for (Index a = 0; a < p; ++a)
      for (Index b = 0; b < p; ++b) s.theta(a, b) = v(a * p + b);
  } else if (fmt == "sparse") {
    const json& entries = field(th, "entries");
    if (!entries.is_array()) malformed("theta entries is not an array");
    for (const auto& e : entries) {
      if (!e.is_array() || e.size() != 3 || !e[0].is_number_integer() || !e[1].is_number_integer() ||
          !e[2].is_number()) {
        malformed("theta entry is not [row, col, value]");
      }
      const auto a = e[0].get<Index>();
      const auto b = e[1].get<Index>();
      if (a < 0 || b < 0 || a >= p || b >= p) malformed("theta entry out of range");
      s.theta(a, b) = e[2].get<double>();
    }
  } else {
    malformed("unknown theta format");
  }

  const json& diag = field(j, "diagnostics");
  const json& it = field(diag, "iterations");
  const json& conv = field(diag, "converged");
  if (!it.is_number_integer() || !conv.is_boolean()) malformed("bad diagnostics");
  s.iterations = it.get<Index>();
  s.converged = conv.get<bool>();
  s.objective = num(diag, "objective");
  const json& kkt = field(diag, "kkt_violation");
  if (kkt.is_null()) {
    m.kkt_violation = std::numeric_limits<double>::quiet_NaN();
  } else if (kkt.is_number()) {
    m.kkt_violation = kkt.get<double>();
  } else {
    malformed("bad kkt_violation");
  }
  return m;
}

void save_model(const SavedModel& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << model_to_json(m).dump(2) << '\n';
}

SavedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    malformed(e.what());
  }
  return model_from_json(j);
}

Vector predict_saved(const SavedModel& m, const Matrix& x_raw) {
  const FitState& s = m.state;
  const Index p = s.p();
  if (x_raw.cols() != p) {
    throw InputError("expected " + std::to_string(p) + " columns, got " + std::to_string(x_raw.cols()));
  }
  Matrix xs = x_raw.rowwise() - m.col_means.transpose();
  xs.array().rowwise() /= m.col_sds.transpose().array();
  Vector out = xs * s.beta();
  out.array() += s.beta0 + (s.loss == LossKind::gaussian ? m.y_mean : 0.0);
  Index u = 0;
  for (Index a = 0; a < p; ++a) {
    for (Index b = a + 1; b < p; ++b, ++u) {
      const double w = 0.5 * (s.theta(a, b) + s.theta(b, a));
      if (w == 0.0) continue;
      out += w * (xs.col(a).cwiseProduct(xs.col(b)).array() - m.pair_means(u)).matrix();
    }
  }
  return out;
}

json wheel_json(const SavedModel& m, double zero_tol) {
  const FitState& s = m.state;
  const Index p = s.p();
  const Vector beta = s.beta();
  const Matrix eff = effective_interactions(s.theta);
  const double bt = zero_threshold(p ? beta.cwiseAbs().maxCoeff() : 0.0, zero_tol);
  const double tt = zero_threshold(p ? eff.cwiseAbs().maxCoeff() : 0.0, zero_tol);
  json nodes = json::array();
  for (Index a = 0; a < p; ++a) {
    nodes.push_back({{"id", a},
                     {"name", m.predictors[static_cast<std::size_t>(a)]},
                     {"main_effect_nonzero", std::abs(beta(a)) > bt}});
  }
  json edges = json::array();
  for (Index a = 0; a < p; ++a)
    for (Index b = a + 1; b < p; ++b)
      if (std::abs(eff(a, b)) > tt) edges.push_back({{"j", a}, {"k", b}, {"weight", eff(a, b)}});
  return {{"nodes", nodes}, {"edges", edges}};
}

}  // namespace hiernet
