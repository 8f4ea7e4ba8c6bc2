#include "capguard/tangency.hpp"

#include <cmath>
#include <stdexcept>

namespace capguard {

double extreme_input(SetKind kind, const ModelParams& p) {
  return kind == SetKind::Admissible ? p.u_max : p.u_min;
}

bool Inequality::near_boundary() const { return std::abs(margin()) <= kBoundaryMargin; }

Inequality g1_existence(const ModelParams& p, const ConstraintCaps& caps, SetKind kind) {
  const double u = extreme_input(kind, p);
  const double num = p.A_m * caps.xbar2;
  return {num / (num + u), caps.xbar1};
}

Inequality g3_existence(const ModelParams& p, const ConstraintCaps& caps) {
  const double num = p.A_h * caps.xbar1;
  const double den = num + p.gamma;
  // A_h = gamma = 0 leaves no dynamics in x2 at all: no tangency.
  return {den > 0.0 ? num / den : 0.0, caps.xbar2};
}

std::optional<TangentPoint> tangent_point_g1(const ModelParams& p, const ConstraintCaps& caps,
                                             SetKind kind) {
  if (caps.xbar1 >= 1.0) return std::nullopt;
  if (!g1_existence(p, caps, kind).holds_strictly()) return std::nullopt;
  const double u = extreme_input(kind, p);
  const double x2 = u * caps.xbar1 / (p.A_m * (1.0 - caps.xbar1));
  if (!(x2 < caps.xbar2)) return std::nullopt;
  return TangentPoint{ConstraintFace::G1, State{caps.xbar1, x2}, kind, Costate{1.0, 0.0}};
}

std::optional<TangentPoint> tangent_point_g3(const ModelParams& p, const ConstraintCaps& caps) {
  return tangent_point_g3(p, caps, SetKind::Admissible);
}

std::optional<TangentPoint> tangent_point_g3(const ModelParams& p, const ConstraintCaps& caps,
                                             SetKind kind) {
  if (caps.xbar2 >= 1.0) return std::nullopt;
  if (!g3_existence(p, caps).holds_strictly()) return std::nullopt;
  const double x1 = p.gamma * caps.xbar2 / (p.A_h * (1.0 - caps.xbar2));
  if (!(x1 < caps.xbar1)) return std::nullopt;
  return TangentPoint{ConstraintFace::G3, State{x1, caps.xbar2}, kind, Costate{0.0, 1.0}};
}

EntryCondition entry_condition(const ModelParams& p, const ConstraintCaps& caps, SetKind kind,
                               ConstraintFace face) {
  const double u = extreme_input(kind, p);
  EntryCondition out;
  out.rhs = p.A_m * p.A_h;
  switch (face) {
    case ConstraintFace::G1:
      out.lhs = p.A_h * (p.A_m + u) * caps.xbar1 + p.gamma * u;
      break;
    case ConstraintFace::G3:
      out.lhs = p.A_m * (p.A_h + p.gamma) * caps.xbar2 + p.gamma * u;
      break;
    default:
      throw std::invalid_argument(std::string("entry_condition: no tangency exists on face ") +
                                  to_string(face));
  }
  out.margin = out.lhs - out.rhs;
  out.holds = out.margin > kBoundaryMargin;
  return out;
}

const char* to_string(SetKind kind) { return kind == SetKind::Admissible ? "admissible" : "mrpi"; }

SetKind set_kind_from_string(const std::string& name) {
  if (name == "admissible") return SetKind::Admissible;
  if (name == "mrpi") return SetKind::Mrpi;
  throw std::invalid_argument("unknown set kind '" + name + "' (expected admissible|mrpi)");
}

nlohmann::json to_json(const TangentPoint& tp) {
  return {{"face", to_string(tp.face)},
          {"x1", tp.point.x1},
          {"x2", tp.point.x2},
          {"set_kind", to_string(tp.set_kind)},
          {"lambda", {tp.terminal_costate.lambda1, tp.terminal_costate.lambda2}}};
}

TangentPoint tangent_point_from_json(const nlohmann::json& j) {
  TangentPoint tp;
  tp.face = face_from_string(j.at("face").get<std::string>());
  tp.point = State{j.at("x1").get<double>(), j.at("x2").get<double>()};
  tp.set_kind = set_kind_from_string(j.at("set_kind").get<std::string>());
  const auto& lam = j.at("lambda");
  tp.terminal_costate = Costate{lam.at(0).get<double>(), lam.at(1).get<double>()};
  return tp;
}

}  // namespace capguard
