#pragma once

// Ross-Macdonald vector-borne epidemic model with fumigation as the control:
//   dx1/dt = A_m x2 (1 - x1) - u x1
//   dx2/dt = A_h x1 (1 - x2) - gamma x2
// x1 is the infected mosquito proportion, x2 the infected human proportion.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace capguard {

/// Raw epidemiological inputs from which A_m and A_h are derived.
struct RawRates {
  double biting_rate = 0.0;           // a
  double p_m = 0.0;                   // mosquito infection probability per bite
  double p_h = 0.0;                   // human infection probability per bite
  double mosquito_human_ratio = 0.0;  // N_m / N_h
};

struct ModelParams {
  double A_m = 0.0;
  double A_h = 0.0;
  double gamma = 0.0;
  double u_min = 0.0;
  double u_max = 0.0;
  std::optional<RawRates> raw;

  /// Throws std::invalid_argument describing the first violated invariant.
  void validate() const;
};

struct State {
  double x1 = 0.0;
  double x2 = 0.0;
  friend bool operator==(const State&, const State&) = default;
};

struct Costate {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  friend bool operator==(const Costate&, const Costate&) = default;
};

struct ConstraintCaps {
  double xbar1 = 1.0;
  double xbar2 = 1.0;

  void validate() const;
};

/// Constraint faces of the box G = [0, xbar1] x [0, xbar2]:
/// g1 = x1 - xbar1, g2 = -x1, g3 = x2 - xbar2, g4 = -x2.
enum class ConstraintFace { G1, G2, G3, G4 };

using Vector2 = std::array<double, 2>;
using Matrix2 = std::array<std::array<double, 2>, 2>;

Vector2 vector_field(const State& x, double u, const ModelParams& p);

/// Partial derivatives df_i/dx_j.
Matrix2 state_jacobian(const State& x, double u, const ModelParams& p);

/// Forward-time adjoint right-hand side, equal to -(df/dx)^T lambda.
Vector2 adjoint_rhs(const State& x, const Costate& lam, double u, const ModelParams& p);

/// Dg_face(x) f(x, u). Evaluated anywhere, not only on the face.
double lie_derivative(ConstraintFace face, const State& x, double u, const ModelParams& p);

/// Value of the constraint function g_face at x (negative inside the box).
double constraint_value(ConstraintFace face, const State& x, const ConstraintCaps& caps);

/// Faces whose constraint function is within `tol` of zero at x.
std::vector<ConstraintFace> active_faces(const State& x, const ConstraintCaps& caps, double tol = 1e-12);

/// Positive equilibrium under constant fumigation u, if one exists (A_m A_h > u gamma).
std::optional<State> endemic_equilibrium(double u, const ModelParams& p);

/// Largest constraint violation max_i g_i(x); <= 0 iff x is in the closed box.
double box_violation(const State& x, const ConstraintCaps& caps);

/// Face with the largest constraint value; exact ties go to the smaller index.
ConstraintFace most_violated_face(const State& x, const ConstraintCaps& caps);

const char* to_string(ConstraintFace face);
ConstraintFace face_from_string(const std::string& name);

nlohmann::json to_json(const ModelParams& p);
ModelParams model_params_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ConstraintCaps& caps);
ConstraintCaps caps_from_json(const nlohmann::json& j);

/// Dengue estimates for Cali, Colombia (rates per day), fumigation in [0.0333, 0.05].
ModelParams cali_dengue_params();

}  // namespace capguard
