#pragma once

// Points of ultimate tangentiality on the cap faces g1 (x1 = xbar1) and
// g3 (x2 = xbar2), plus the inequalities deciding whether a candidate barrier
// traced back from them enters the interior of the box.
//
// The lower faces g2, g4 never carry a tangency: the flow points strictly
// inward there for every admissible input.

#include <optional>

#include "capguard/model.hpp"

namespace capguard {

enum class SetKind { Admissible, Mrpi };

/// Margins within this band of zero count as "boundary" for classification.
inline constexpr double kBoundaryMargin = 1e-12;

/// u_max for the admissible set, u_min for the MRPI.
double extreme_input(SetKind kind, const ModelParams& p);

struct TangentPoint {
  ConstraintFace face = ConstraintFace::G1;
  State point;
  SetKind set_kind = SetKind::Admissible;
  Costate terminal_costate;  // outward face normal: (1,0) on G1, (0,1) on G3
};

/// A strict inequality of the form lhs > rhs, with margin = lhs - rhs.
struct Inequality {
  double lhs = 0.0;
  double rhs = 0.0;
  double margin() const { return lhs - rhs; }
  bool holds_strictly() const { return lhs > rhs; }
  bool near_boundary() const;
};

/// Existence of a tangency on g1: A_m xbar2 / (A_m xbar2 + u*) > xbar1.
Inequality g1_existence(const ModelParams& p, const ConstraintCaps& caps, SetKind kind);

/// Existence of a tangency on g3: A_h xbar1 / (A_h xbar1 + gamma) > xbar2.
Inequality g3_existence(const ModelParams& p, const ConstraintCaps& caps);

/// (xbar1, u* xbar1 / (A_m (1 - xbar1))) when it lies on {xbar1} x [0, xbar2).
std::optional<TangentPoint> tangent_point_g1(const ModelParams& p, const ConstraintCaps& caps,
                                             SetKind kind);

/// (gamma xbar2 / (A_h (1 - xbar2)), xbar2) when it lies on [0, xbar1) x {xbar2}.
/// Returned with set_kind = Admissible; the point is the same for both kinds.
std::optional<TangentPoint> tangent_point_g3(const ModelParams& p, const ConstraintCaps& caps);

/// Same as tangent_point_g3 but tagged with the requested set kind.
std::optional<TangentPoint> tangent_point_g3(const ModelParams& p, const ConstraintCaps& caps,
                                             SetKind kind);

struct EntryCondition {
  bool holds = false;
  double margin = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Whether the candidate barrier ending at the face's tangent point enters G_-.
///   G1: A_h (A_m + u*) xbar1 + gamma u* > A_m A_h
///   G3: A_m (A_h + gamma) xbar2 + gamma u* > A_m A_h
/// Margins inside +-kBoundaryMargin are reported as failing.
/// Throws std::invalid_argument for G2/G4.
EntryCondition entry_condition(const ModelParams& p, const ConstraintCaps& caps, SetKind kind,
                               ConstraintFace face);

const char* to_string(SetKind kind);
SetKind set_kind_from_string(const std::string& name);

nlohmann::json to_json(const TangentPoint& tp);
TangentPoint tangent_point_from_json(const nlohmann::json& j);

}  // namespace capguard
