#pragma once

// Fumigation advice from the location of the state relative to the admissible
// set and the MRPI, plus forward simulation under constant, scheduled or
// closed-loop inputs.

#include <optional>
#include <string>
#include <vector>

#include "capguard/analysis.hpp"
#include "capguard/model.hpp"
#include "capguard/ode.hpp"
#include "capguard/region.hpp"

namespace capguard {

enum class Action { UseMin, UseMax, RelaxCapsOrIncreaseFumigation };

enum class Rationale {
  InsideMrpi,                      // minimal resources keep the caps
  InsideAdmissible,                // interior of A away from the barrier
  OnAdmissibleBarrier,             // on [dA]_-: switch to maximal fumigation
  OnAdmissibleConstraintBoundary,  // on [dA]_0 outside M
  OutsideAdmissible,               // a cap will be violated whatever the input
  DesperateRegime,                 // no nontrivial set exists
};

struct PolicyAdvice {
  Action action = Action::UseMin;
  Rationale rationale = Rationale::InsideMrpi;
  Membership admissible;
  Membership mrpi;
};

/// Immutable inputs to the advice table.
struct PolicyContext {
  ModelParams params;
  ConstraintCaps caps;
  Classification classification;
  RegionSet admissible;
  RegionSet mrpi;

  static PolicyContext from(const Analysis& a);
};

/// Throws std::invalid_argument when x lies outside the unit square.
PolicyAdvice recommend(const State& x, const PolicyContext& ctx, double eps = kDefaultMembershipEps);

/// Fumigation rate the advice maps to: u_min for UseMin, u_max otherwise.
double input_for(Action action, const ModelParams& p);

struct ClosedLoopOptions {
  double band = 0.005;  // switch to u_max within this distance of the outer boundary of A
  double eps = kDefaultMembershipEps;
};

/// Hysteresis state of the closed loop: once latched to u_max near the outer
/// boundary of A it stays there until the state is 2 * band away.
struct ClosedLoopState {
  bool latched = false;
};

/// Input chosen by the closed loop at x. Updates the latch.
double closed_loop_input(const PolicyContext& ctx, const State& x, const ClosedLoopOptions& options,
                         ClosedLoopState& state, PolicyAdvice* advice_out = nullptr);

struct ScheduleSegment {
  double t_start = 0.0;  // applies from t_start until the next segment starts
  double u = 0.0;
};

struct InputSource {
  enum class Kind { Constant, Schedule, ClosedLoop };
  Kind kind = Kind::Constant;
  double u = 0.0;
  std::vector<ScheduleSegment> schedule;
  const PolicyContext* policy = nullptr;

  static InputSource constant(double u);
  static InputSource piecewise(std::vector<ScheduleSegment> segments);
  static InputSource closed_loop(const PolicyContext& ctx);
};

struct TrajectorySample {
  double t = 0.0;
  State state;
  double u = 0.0;  // input applied on the interval ending at t (first interval for t = 0)
};

struct Violation {
  double t = 0.0;
  ConstraintFace face = ConstraintFace::G1;
  State state;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  std::optional<Violation> violation;
  bool relax_caps_advised = false;  // closed loop met RelaxCaps advice and applied u_max
};

struct SimulateOptions {
  ode::Tolerances tolerances{};
  double chunk = 1.0;  // steps never straddle multiples of chunk
  double violation_tol = 1e-9;
  bool stop_at_violation = false;
  ClosedLoopOptions closed_loop{};
};

/// Incremental forward integration. simulate() and service sessions share it,
/// so a run split into whole-chunk pieces reproduces a single run exactly.
class Simulator {
 public:
  Simulator(const ModelParams& p, const ConstraintCaps& caps, const State& x0, SimulateOptions options = {});

  /// Integrates for `duration` days, appending every accepted step to traj.
  void advance(double duration, const InputSource& source, Trajectory& traj);

  double time() const { return t_; }
  const State& state() const { return x_; }
  const ClosedLoopState& loop_state() const { return loop_; }

 private:
  double input_at(const InputSource& source, double& limit, Trajectory& traj);

  ModelParams p_;
  ConstraintCaps caps_;
  SimulateOptions options_;
  double t_ = 0.0;
  State x_;
  double hint_;
  ClosedLoopState loop_;
  bool started_ = false;
};

/// Throws std::invalid_argument for x0 outside the box, a non-positive horizon,
/// or schedule values outside [u_min, u_max].
Trajectory simulate(const ModelParams& p, const ConstraintCaps& caps, const State& x0,
                    const InputSource& source, double horizon, const SimulateOptions& options = {});

/// "t,x1,x2,u,violated_face"; violated_face is empty before the first violation.
std::string trajectory_csv(const Trajectory& traj);

const char* to_string(Action action);
const char* to_string(Rationale rationale);

nlohmann::json to_json(const PolicyAdvice& advice);
nlohmann::json to_json(const Trajectory& traj);

}  // namespace capguard
