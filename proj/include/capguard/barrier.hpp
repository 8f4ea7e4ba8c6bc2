#pragma once

// Barrier curves: integral curves of the state/adjoint system traced backward
// from a point of ultimate tangentiality under the Hamiltonian-extremal bang
// input. For the admissible set the input minimises lambda^T f, for the MRPI
// it maximises it; since f depends on u only through -u x1, the choice is
// decided by the sign of lambda1.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "capguard/classifier.hpp"
#include "capguard/model.hpp"
#include "capguard/ode.hpp"
#include "capguard/tangency.hpp"

namespace capguard {

struct BarrierSample {
  double s = 0.0;  // backward time from the tangent point, days
  State state;
  Costate costate;  // unit Euclidean norm
  double u = 0.0;
};

enum class TerminationKind { HitFace, VelocityStall, HorizonExceeded };

struct Termination {
  TerminationKind kind = TerminationKind::HitFace;
  std::optional<ConstraintFace> face;  // set for HitFace
  State point;  // exit point snapped onto the face, or the equilibrium estimate
};

struct BarrierCurve {
  SetKind set_kind = SetKind::Admissible;
  TangentPoint tangent;
  std::vector<BarrierSample> samples;  // ordered from the tangent point backward
  Termination termination;
  std::vector<double> switches;  // backward times where lambda1 changed sign
};

struct BarrierOptions {
  ode::Tolerances tolerances{};
  double horizon = 10000.0;      // days of backward time
  double max_segment = 1e-3;     // max state-space distance between samples
  double stall_speed = 1e-9;     // |f| below this ends the curve at an equilibrium
  double switch_resolution = 1e-12;
  double exit_resolution = 1e-10;
};

/// compute_barrier called for a regime without a nontrivial set.
class BarrierPreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Backward integration ran past the horizon without terminating.
class BarrierHorizonError : public std::runtime_error {
 public:
  BarrierHorizonError(const std::string& what, BarrierCurve partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const BarrierCurve& partial() const { return partial_; }

 private:
  BarrierCurve partial_;
};

/// Admissible: u_max if lambda1 >= 0 else u_min. MRPI: the reverse.
double switching_input(const Costate& lam, SetKind kind, const ModelParams& p);

/// The tangent point a barrier of the given kind starts from, if any.
/// When both faces carry a tangency the one whose entry condition holds wins.
std::optional<TangentPoint> select_tangent_point(const ModelParams& p, const ConstraintCaps& caps,
                                                 SetKind kind);

/// Traces the barrier of the requested kind. Returns nullopt when there is no
/// tangent point for that kind or the first backward step leaves G_-.
/// Throws BarrierPreconditionError in the comfortable and desperate regimes and
/// BarrierHorizonError when the horizon is exceeded.
std::optional<BarrierCurve> compute_barrier(const ModelParams& p, const ConstraintCaps& caps,
                                            SetKind kind, const BarrierOptions& options = {});

/// Traces backward from an explicit tangent point without consulting the classifier.
std::optional<BarrierCurve> trace_barrier(const ModelParams& p, const ConstraintCaps& caps,
                                          const TangentPoint& tangent,
                                          const BarrierOptions& options = {});

struct VerifyOptions {
  double hamiltonian_tol = 1e-6;
  double extremality_tol = 1e-12;
  double graze_distance_tol = 1e-4;
  double graze_violation_tol = 1e-6;
  double tangency_tol = 1e-10;
  ode::Tolerances tolerances{};
};

struct BarrierCheck {
  std::string name;
  bool passed = true;
  double worst = 0.0;  // worst residual / violation observed
  double tolerance = 0.0;
  std::size_t worst_sample = 0;
};

struct BarrierVerification {
  BarrierCheck hamiltonian{"hamiltonian_residual"};
  BarrierCheck extremality{"bang_extremality"};
  BarrierCheck graze{"graze_reintegration"};
  BarrierCheck terminal_tangency{"terminal_tangency"};
  double graze_distance = 0.0;       // distance from the re-integrated endpoint to the tangent point
  double graze_max_violation = 0.0;  // worst constraint violation along the re-integration

  bool passed() const;
  std::vector<std::string> failures() const;
};

/// Checks the necessary conditions along a curve: zero Hamiltonian, extremal
/// bang input, forward re-integration grazing the tangent point, and terminal
/// tangency.
BarrierVerification verify_barrier(const BarrierCurve& curve, const ModelParams& p,
                                   const ConstraintCaps& caps, const VerifyOptions& options = {});

/// CSV with header "s,x1,x2,lambda1,lambda2,u", 17 significant digits.
std::string barrier_csv(const BarrierCurve& curve);

const char* to_string(TerminationKind kind);

nlohmann::json to_json(const BarrierCurve& curve);
BarrierCurve barrier_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BarrierVerification& v);

}  // namespace capguard
