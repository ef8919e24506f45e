#include "hiernet/types.hpp"

namespace hiernet {

std::string to_string(SdConvention c) {
  return c == SdConvention::population ? "population" : "sample";
}

std::string to_string(Hierarchy h) { return h == Hierarchy::weak ? "weak" : "strong"; }

std::string to_string(Method m) {
  switch (m) {
    case Method::strong: return "strong";
    case Method::weak: return "weak";
    case Method::apl: return "apl";
    case Method::mel: return "mel";
  }
  return "unknown";
}

std::string to_string(LossKind k) { return k == LossKind::gaussian ? "gaussian" : "logistic"; }

SdConvention sd_convention_from_string(const std::string& s) {
  if (s == "population") return SdConvention::population;
  if (s == "sample") return SdConvention::sample;
  throw InputError("unknown sd convention '" + s + "'");
}

Method method_from_string(const std::string& s) {
  if (s == "strong") return Method::strong;
  if (s == "weak") return Method::weak;
  if (s == "apl") return Method::apl;
  if (s == "mel") return Method::mel;
  throw InputError("unknown method '" + s + "'");
}

LossKind loss_kind_from_string(const std::string& s) {
  if (s == "gaussian") return LossKind::gaussian;
  if (s == "logistic") return LossKind::logistic;
  throw InputError("unknown loss '" + s + "'");
}

Vector Dataset::y_raw() const { return y_centered.array() + y_mean; }

Dataset Dataset::with_response(const Vector& y_raw) const {
  if (y_raw.size() != n()) throw InputError("response length does not match design rows");
  Dataset out = *this;
  out.y_mean = y_raw.mean();
  out.y_centered = y_raw.array() - out.y_mean;
  return out;
}

FitState FitState::zeros(Index p, double lambda, double eps_ridge) {
  FitState s;
  s.beta_plus = Vector::Zero(p);
  s.beta_minus = Vector::Zero(p);
  s.theta = Matrix::Zero(p, p);
  s.lambda = lambda;
  s.eps_ridge = eps_ridge;
  return s;
}

}  // namespace hiernet
