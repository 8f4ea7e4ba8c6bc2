#include "capguard/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace capguard {
namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be finite");
}

void require_finite(const State& x) {
  require_finite(x.x1, "x1");
  require_finite(x.x2, "x2");
}

double read_number(const nlohmann::json& j, const std::string& key) {
  const auto it = j.find(key);
  if (it == j.end()) throw std::invalid_argument(key + ": missing required field");
  if (!it->is_number()) throw std::invalid_argument(key + ": expected a number");
  return it->get<double>();
}

void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw std::invalid_argument(key + ": unknown key");
  }
}

}  // namespace

void ModelParams::validate() const {
  require_finite(A_m, "A_m");
  require_finite(A_h, "A_h");
  require_finite(gamma, "gamma");
  require_finite(u_min, "u_min");
  require_finite(u_max, "u_max");
  if (A_m < 0.0) throw std::invalid_argument("A_m: must be >= 0");
  if (A_h < 0.0) throw std::invalid_argument("A_h: must be >= 0");
  if (gamma < 0.0) throw std::invalid_argument("gamma: must be >= 0");
  if (!(u_min > 0.0)) throw std::invalid_argument("u_min: must be > 0");
  if (!(u_max > u_min)) throw std::invalid_argument("u_max: must be > u_min");
  if (raw) {
    const RawRates& r = *raw;
    if (!(r.biting_rate >= 0.0)) throw std::invalid_argument("a: must be >= 0");
    if (!(r.p_m >= 0.0 && r.p_m <= 1.0)) throw std::invalid_argument("p_m: must lie in [0, 1]");
    if (!(r.p_h >= 0.0 && r.p_h <= 1.0)) throw std::invalid_argument("p_h: must lie in [0, 1]");
    if (!(r.mosquito_human_ratio >= 0.0)) {
      throw std::invalid_argument("mosquito_human_ratio: must be >= 0");
    }
    if (std::abs(A_m - r.biting_rate * r.p_m) > 1e-12) {
      throw std::invalid_argument("A_m: does not equal a * p_m");
    }
    if (std::abs(A_h - r.biting_rate * r.p_h * r.mosquito_human_ratio) > 1e-12) {
      throw std::invalid_argument("A_h: does not equal a * p_h * mosquito_human_ratio");
    }
  }
}

void ConstraintCaps::validate() const {
  if (!(xbar1 > 0.0 && xbar1 <= 1.0)) throw std::invalid_argument("xbar1: must lie in (0, 1]");
  if (!(xbar2 > 0.0 && xbar2 <= 1.0)) throw std::invalid_argument("xbar2: must lie in (0, 1]");
}

Vector2 vector_field(const State& x, double u, const ModelParams& p) {
  require_finite(x);
  require_finite(u, "u");
  return {p.A_m * x.x2 * (1.0 - x.x1) - u * x.x1, p.A_h * x.x1 * (1.0 - x.x2) - p.gamma * x.x2};
}

Matrix2 state_jacobian(const State& x, double u, const ModelParams& p) {
  require_finite(x);
  require_finite(u, "u");
  return {{{-p.A_m * x.x2 - u, p.A_m * (1.0 - x.x1)},
           {p.A_h * (1.0 - x.x2), -p.A_h * x.x1 - p.gamma}}};
}

Vector2 adjoint_rhs(const State& x, const Costate& lam, double u, const ModelParams& p) {
  require_finite(x);
  require_finite(u, "u");
  require_finite(lam.lambda1, "lambda1");
  require_finite(lam.lambda2, "lambda2");
  const double m11 = p.A_m * x.x2 + u;
  const double m12 = -p.A_h * (1.0 - x.x2);
  const double m21 = -p.A_m * (1.0 - x.x1);
  const double m22 = p.A_h * x.x1 + p.gamma;
  return {m11 * lam.lambda1 + m12 * lam.lambda2, m21 * lam.lambda1 + m22 * lam.lambda2};
}

double lie_derivative(ConstraintFace face, const State& x, double u, const ModelParams& p) {
  switch (face) {
    case ConstraintFace::G1:
      return p.A_m * x.x2 * (1.0 - x.x1) - u * x.x1;
    case ConstraintFace::G2:
      return -(p.A_m * x.x2 * (1.0 - x.x1) - u * x.x1);
    case ConstraintFace::G3:
      return p.A_h * x.x1 * (1.0 - x.x2) - p.gamma * x.x2;
    case ConstraintFace::G4:
      return -(p.A_h * x.x1 * (1.0 - x.x2) - p.gamma * x.x2);
  }
  throw std::invalid_argument("unknown constraint face");
}

double constraint_value(ConstraintFace face, const State& x, const ConstraintCaps& caps) {
  switch (face) {
    case ConstraintFace::G1:
      return x.x1 - caps.xbar1;
    case ConstraintFace::G2:
      return -x.x1;
    case ConstraintFace::G3:
      return x.x2 - caps.xbar2;
    case ConstraintFace::G4:
      return -x.x2;
  }
  throw std::invalid_argument("unknown constraint face");
}

std::vector<ConstraintFace> active_faces(const State& x, const ConstraintCaps& caps, double tol) {
  std::vector<ConstraintFace> out;
  for (auto face : {ConstraintFace::G1, ConstraintFace::G2, ConstraintFace::G3, ConstraintFace::G4}) {
    if (std::abs(constraint_value(face, x, caps)) <= tol) out.push_back(face);
  }
  return out;
}

double box_violation(const State& x, const ConstraintCaps& caps) {
  return std::max(std::max(x.x1 - caps.xbar1, -x.x1), std::max(x.x2 - caps.xbar2, -x.x2));
}

ConstraintFace most_violated_face(const State& x, const ConstraintCaps& caps) {
  ConstraintFace best = ConstraintFace::G1;
  double worst = constraint_value(ConstraintFace::G1, x, caps);
  for (auto face : {ConstraintFace::G2, ConstraintFace::G3, ConstraintFace::G4}) {
    const double v = constraint_value(face, x, caps);
    if (v > worst) {
      worst = v;
      best = face;
    }
  }
  return best;
}

std::optional<State> endemic_equilibrium(double u, const ModelParams& p) {
  if (!(u > 0.0)) throw std::invalid_argument("u: must be > 0");
  const double numerator = p.A_m * p.A_h - u * p.gamma;
  if (!(numerator > 0.0)) return std::nullopt;
  const double x1 = numerator / (p.A_h * (p.A_m + u));
  const double x2 = p.A_h * x1 / (p.A_h * x1 + p.gamma);
  return State{x1, x2};
}

const char* to_string(ConstraintFace face) {
  switch (face) {
    case ConstraintFace::G1:
      return "G1";
    case ConstraintFace::G2:
      return "G2";
    case ConstraintFace::G3:
      return "G3";
    case ConstraintFace::G4:
      return "G4";
  }
  return "?";
}

ConstraintFace face_from_string(const std::string& name) {
  if (name == "G1") return ConstraintFace::G1;
  if (name == "G2") return ConstraintFace::G2;
  if (name == "G3") return ConstraintFace::G3;
  if (name == "G4") return ConstraintFace::G4;
  throw std::invalid_argument("unknown constraint face '" + name + "'");
}

nlohmann::json to_json(const ModelParams& p) {
  nlohmann::json j = {
      {"A_m", p.A_m}, {"A_h", p.A_h}, {"gamma", p.gamma}, {"u_min", p.u_min}, {"u_max", p.u_max}};
  if (p.raw) {
    j["a"] = p.raw->biting_rate;
    j["p_m"] = p.raw->p_m;
    j["p_h"] = p.raw->p_h;
    j["mosquito_human_ratio"] = p.raw->mosquito_human_ratio;
  }
  return j;
}

ModelParams model_params_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("expected an object");
  reject_unknown_keys(j, {"A_m", "A_h", "gamma", "u_min", "u_max", "a", "p_m", "p_h",
                          "mosquito_human_ratio"});
  ModelParams p;
  p.A_m = read_number(j, "A_m");
  p.A_h = read_number(j, "A_h");
  p.gamma = read_number(j, "gamma");
  p.u_min = read_number(j, "u_min");
  p.u_max = read_number(j, "u_max");
  const int raw_count = static_cast<int>(j.contains("a")) + static_cast<int>(j.contains("p_m")) +
                        static_cast<int>(j.contains("p_h")) +
                        static_cast<int>(j.contains("mosquito_human_ratio"));
  if (raw_count == 4) {
    p.raw = RawRates{read_number(j, "a"), read_number(j, "p_m"), read_number(j, "p_h"),
                     read_number(j, "mosquito_human_ratio")};
  } else if (raw_count != 0) {
    throw std::invalid_argument("a: raw rates need all of a, p_m, p_h, mosquito_human_ratio");
  }
  p.validate();
  return p;
}

nlohmann::json to_json(const ConstraintCaps& caps) {
  return {{"xbar1", caps.xbar1}, {"xbar2", caps.xbar2}};
}

ConstraintCaps caps_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("expected an object");
  reject_unknown_keys(j, {"xbar1", "xbar2"});
  ConstraintCaps caps{read_number(j, "xbar1"), read_number(j, "xbar2")};
  caps.validate();
  return caps;
}

ModelParams cali_dengue_params() {
  ModelParams p;
  p.A_m = 0.076608;
  p.A_h = 0.0722633;
  p.gamma = 0.1;
  p.u_min = 0.0333;
  p.u_max = 0.05;
  return p;
}

}  // namespace capguard
