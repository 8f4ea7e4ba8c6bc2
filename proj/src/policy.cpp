#include "capguard/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace capguard {
namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool finite_state(const State& x) { return std::isfinite(x.x1) && std::isfinite(x.x2); }

bool in_unit_square(const State& x) { return x.x1 >= 0.0 && x.x1 <= 1.0 && x.x2 >= 0.0 && x.x2 <= 1.0; }

void check_input(double u, const ModelParams& p) {
  if (!std::isfinite(u) || u < p.u_min || u > p.u_max) {
    throw std::invalid_argument("input " + fmt17(u) + " outside [u_min, u_max]");
  }
}

}  // namespace

PolicyContext PolicyContext::from(const Analysis& a) {
  return PolicyContext{a.params, a.caps, a.classification, a.admissible, a.mrpi};
}

PolicyAdvice recommend(const State& x, const PolicyContext& ctx, double eps) {
  if (!finite_state(x) || !in_unit_square(x)) {
    throw std::invalid_argument("recommend: state outside [0,1]^2");
  }
  PolicyAdvice a;
  a.admissible = contains(ctx.admissible, x, eps);
  a.mrpi = contains(ctx.mrpi, x, eps);
  if (ctx.classification.regime == Regime::Desperate) {
    a.action = Action::RelaxCapsOrIncreaseFumigation;
    a.rationale = Rationale::DesperateRegime;
  } else if (a.mrpi.in_closure()) {
    a.action = Action::UseMin;
    a.rationale = Rationale::InsideMrpi;
  } else {
    switch (a.admissible.kind) {
      case MembershipKind::Inside:
        a.action = Action::UseMin;
        a.rationale = Rationale::InsideAdmissible;
        break;
      case MembershipKind::OnBarrier:
        a.action = Action::UseMax;
        a.rationale = Rationale::OnAdmissibleBarrier;
        break;
      case MembershipKind::OnConstraintBoundary:
        a.action = Action::UseMax;
        a.rationale = Rationale::OnAdmissibleConstraintBoundary;
        break;
      case MembershipKind::Outside:
        a.action = Action::RelaxCapsOrIncreaseFumigation;
        a.rationale = Rationale::OutsideAdmissible;
        break;
    }
  }
  return a;
}

double input_for(Action action, const ModelParams& p) { return action == Action::UseMin ? p.u_min : p.u_max; }

double closed_loop_input(const PolicyContext& ctx, const State& x, const ClosedLoopOptions& options,
                         ClosedLoopState& state, PolicyAdvice* advice_out) {
  const State y{std::clamp(x.x1, 0.0, 1.0), std::clamp(x.x2, 0.0, 1.0)};
  const PolicyAdvice advice = recommend(y, ctx, options.eps);
  if (advice_out) *advice_out = advice;
  const ModelParams& p = ctx.params;
  if (advice.action != Action::UseMin) {
    state.latched = false;
    return p.u_max;
  }
  if (advice.mrpi.in_closure()) {
    state.latched = false;
    return p.u_min;
  }
  const double d = distance_to_outer_boundary(ctx.admissible, y);
  if (state.latched) {
    if (d > 2.0 * options.band) {
      state.latched = false;
      return p.u_min;
    }
    return p.u_max;
  }
  if (d <= options.band) {
    state.latched = true;
    return p.u_max;
  }
  return p.u_min;
}

InputSource InputSource::constant(double u) {
  InputSource s;
  s.kind = Kind::Constant;
  s.u = u;
  return s;
}

InputSource InputSource::piecewise(std::vector<ScheduleSegment> segments) {
  if (segments.empty()) throw std::invalid_argument("schedule: no segments");
  for (std::size_t i = 1; i < segments.size(); ++i) {
    if (!(segments[i].t_start > segments[i - 1].t_start)) {
      throw std::invalid_argument("schedule: segment start times must increase");
    }
  }
  if (segments.front().t_start > 0.0) throw std::invalid_argument("schedule: first segment must start at 0");
  InputSource s;
  s.kind = Kind::Schedule;
  s.schedule = std::move(segments);
  return s;
}

InputSource InputSource::closed_loop(const PolicyContext& ctx) {
  InputSource s;
  s.kind = Kind::ClosedLoop;
  s.policy = &ctx;
  return s;
}

Simulator::Simulator(const ModelParams& p, const ConstraintCaps& caps, const State& x0, SimulateOptions options)
    : p_(p), caps_(caps), options_(options), x_(x0), hint_(options.tolerances.initial_step) {
  p_.validate();
  caps_.validate();
  if (!finite_state(x0) || !in_unit_square(x0)) throw std::invalid_argument("x0: outside [0,1]^2");
  if (!(options_.chunk > 0.0)) throw std::invalid_argument("chunk: must be > 0");
}

double Simulator::input_at(const InputSource& source, double& limit, Trajectory& traj) {
  switch (source.kind) {
    case InputSource::Kind::Constant:
      return source.u;
    case InputSource::Kind::Schedule: {
      auto next = std::upper_bound(source.schedule.begin(), source.schedule.end(), t_,
                                   [](double t, const ScheduleSegment& s) { return t < s.t_start; });
      if (next != source.schedule.end()) limit = std::min(limit, next->t_start);
      return std::prev(next)->u;
    }
    case InputSource::Kind::ClosedLoop: {
      PolicyAdvice advice;
      const double u = closed_loop_input(*source.policy, x_, options_.closed_loop, loop_, &advice);
      if (advice.action == Action::RelaxCapsOrIncreaseFumigation) traj.relax_caps_advised = true;
      // Keep each step short enough that the hysteresis band cannot be jumped.
      const Vector2 f = vector_field(x_, u, p_);
      const double speed = std::hypot(f[0], f[1]);
      if (speed > 0.0) limit = std::min(limit, t_ + 0.25 * options_.closed_loop.band / speed);
      return u;
    }
  }
  throw std::logic_error("input_at: unreachable");
}

void Simulator::advance(double duration, const InputSource& source, Trajectory& traj) {
  if (!(duration > 0.0) || !std::isfinite(duration)) throw std::invalid_argument("duration: must be > 0");
  if (source.kind == InputSource::Kind::Constant) check_input(source.u, p_);
  if (source.kind == InputSource::Kind::Schedule) {
    for (const auto& s : source.schedule) check_input(s.u, p_);
  }
  if (source.kind == InputSource::Kind::ClosedLoop && source.policy == nullptr) {
    throw std::invalid_argument("closed loop: missing policy context");
  }

  if (traj.samples.empty()) traj.samples.push_back(TrajectorySample{t_, x_, 0.0});
  if (!traj.violation && box_violation(x_, caps_) > options_.violation_tol) {
    traj.violation = Violation{t_, most_violated_face(x_, caps_), x_};
  }

  double u = 0.0;
  auto stepper = ode::make_stepper<2>(
      [&](double, const ode::Vec<2>& y) { return vector_field(State{y[0], y[1]}, u, p_); },
      options_.tolerances);
  stepper.set_suggested_step(hint_);

  const double t_end = t_ + duration;
  while (t_ < t_end) {
    if (options_.stop_at_violation && traj.violation) break;
    const double boundary = (std::floor(t_ / options_.chunk + 1e-9) + 1.0) * options_.chunk;
    double limit = std::min(t_end, boundary);
    u = input_at(source, limit, traj);
    if (!started_) {
      traj.samples.front().u = u;
      started_ = true;
    }
    const ode::Vec<2> y{x_.x1, x_.x2};
    const auto step = stepper.advance(t_, y, stepper.eval(t_, y), limit);
    const State x1{step.y1[0], step.y1[1]};
    if (!finite_state(x1)) throw std::runtime_error("simulate: non-finite state");

    if (!traj.violation && box_violation(x1, caps_) > options_.violation_tol) {
      double lo = step.t0;
      double hi = step.t1;
      while (hi - lo > 1e-9) {
        const double mid = 0.5 * (lo + hi);
        const auto ym = ode::hermite(step, mid);
        if (box_violation(State{ym[0], ym[1]}, caps_) > options_.violation_tol) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      const auto yh = ode::hermite(step, hi);
      const State xv{yh[0], yh[1]};
      traj.violation = Violation{hi, most_violated_face(xv, caps_), xv};
    }
    t_ = step.t1;
    x_ = x1;
    traj.samples.push_back(TrajectorySample{t_, x_, u});
  }
  hint_ = stepper.suggested_step();
}

Trajectory simulate(const ModelParams& p, const ConstraintCaps& caps, const State& x0, const InputSource& source,
                    double horizon, const SimulateOptions& options) {
  if (!finite_state(x0) || box_violation(x0, caps) > 0.0) throw std::invalid_argument("x0: outside the box");
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon: must be > 0");
  Simulator sim(p, caps, x0, options);
  Trajectory traj;
  sim.advance(horizon, source, traj);
  return traj;
}

std::string trajectory_csv(const Trajectory& traj) {
  std::string out = "t,x1,x2,u,violated_face\n";
  for (const auto& s : traj.samples) {
    out += fmt17(s.t) + ',' + fmt17(s.state.x1) + ',' + fmt17(s.state.x2) + ',' + fmt17(s.u) + ',';
    if (traj.violation && s.t >= traj.violation->t) out += to_string(traj.violation->face);
    out += '\n';
  }
  return out;
}

const char* to_string(Action action) {
  switch (action) {
    case Action::UseMin:
      return "use_min";
    case Action::UseMax:
      return "use_max";
    case Action::RelaxCapsOrIncreaseFumigation:
      return "relax_caps_or_increase_fumigation";
  }
  return "?";
}

const char* to_string(Rationale rationale) {
  switch (rationale) {
    case Rationale::InsideMrpi:
      return "inside_mrpi";
    case Rationale::InsideAdmissible:
      return "inside_admissible";
    case Rationale::OnAdmissibleBarrier:
      return "on_admissible_barrier";
    case Rationale::OnAdmissibleConstraintBoundary:
      return "on_admissible_constraint_boundary";
    case Rationale::OutsideAdmissible:
      return "outside_admissible";
    case Rationale::DesperateRegime:
      return "desperate_regime";
  }
  return "?";
}

nlohmann::json to_json(const PolicyAdvice& advice) {
  return {{"action", to_string(advice.action)},
          {"rationale", to_string(advice.rationale)},
          {"admissible", to_json(advice.admissible)},
          {"mrpi", to_json(advice.mrpi)}};
}

nlohmann::json to_json(const Trajectory& traj) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : traj.samples) samples.push_back({s.t, s.state.x1, s.state.x2, s.u});
  nlohmann::json j = {{"columns", {"t", "x1", "x2", "u"}}, {"samples", samples},
                      {"relax_caps_advised", traj.relax_caps_advised}};
  if (traj.violation) {
    j["violation"] = {{"t", traj.violation->t},
                      {"face", to_string(traj.violation->face)},
                      {"x1", traj.violation->state.x1},
                      {"x2", traj.violation->state.x2}};
  } else {
    j["violation"] = nullptr;
  }
  return j;
}

}  // namespace capguard
