#include "capguard/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iterator>
#include <limits>
#include <sstream>

namespace capguard {
namespace {

using Vec4 = ode::Vec<4>;
using Vec2 = ode::Vec<2>;

State state_of(const Vec4& z) { return State{z[0], z[1]}; }

Costate unit_costate(const Vec4& z) {
  const double n = std::hypot(z[2], z[3]);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw std::runtime_error("barrier: costate vanished during backward integration");
  }
  return Costate{z[2] / n, z[3] / n};
}

Vec4 normalized(const Vec4& z) {
  const Costate c = unit_costate(z);
  return {z[0], z[1], c.lambda1, c.lambda2};
}

bool in_ge_branch(double lambda1) { return lambda1 >= 0.0; }

double input_for_branch(bool ge_branch, SetKind kind, const ModelParams& p) {
  if (kind == SetKind::Admissible) return ge_branch ? p.u_max : p.u_min;
  return ge_branch ? p.u_min : p.u_max;
}

State snap_to_face(State x, ConstraintFace face, const ConstraintCaps& caps) {
  switch (face) {
    case ConstraintFace::G1:
      x.x1 = caps.xbar1;
      break;
    case ConstraintFace::G2:
      x.x1 = 0.0;
      break;
    case ConstraintFace::G3:
      x.x2 = caps.xbar2;
      break;
    case ConstraintFace::G4:
      x.x2 = 0.0;
      break;
  }
  x.x1 = std::clamp(x.x1, 0.0, caps.xbar1);
  x.x2 = std::clamp(x.x2, 0.0, caps.xbar2);
  return x;
}

class Tracer {
 public:
  Tracer(const ModelParams& p, const ConstraintCaps& caps, const TangentPoint& tangent,
         const BarrierOptions& options)
      : p_(p),
        caps_(caps),
        options_(options),
        stepper_(std::function<Vec4(double, const Vec4&)>(
            [this](double, const Vec4& z) {
              const State x = state_of(z);
              const Vec2 f = vector_field(x, u_, p_);
              const Vec2 a = adjoint_rhs(x, Costate{z[2], z[3]}, u_, p_);
              return Vec4{-f[0], -f[1], -a[0], -a[1]};
            }),
                 options.tolerances) {
    curve_.set_kind = tangent.set_kind;
    curve_.tangent = tangent;
    const Costate c0 = tangent.terminal_costate;
    ge_branch_ = in_ge_branch(c0.lambda1);
    u_ = input_for_branch(ge_branch_, tangent.set_kind, p_);
    z_ = normalized(Vec4{tangent.point.x1, tangent.point.x2, c0.lambda1, c0.lambda2});
    s_ = 0.0;
    curve_.samples.push_back(BarrierSample{0.0, tangent.point, unit_costate(z_), u_});
  }

  std::optional<BarrierCurve> run() {
    Vec4 f = stepper_.eval(s_, z_);
    bool first = true;
    for (;;) {
      if (s_ >= options_.horizon) {
        curve_.termination = Termination{TerminationKind::HorizonExceeded, std::nullopt, state_of(z_)};
        throw BarrierHorizonError("barrier: backward horizon exceeded", curve_);
      }
      const ode::Step<4> step = stepper_.advance(s_, z_, f, options_.horizon);
      unit_costate(step.y1);  // throws if the costate collapsed
      if (first) {
        first = false;
        if (!(box_violation(state_of(step.y1), caps_) < 0.0)) return std::nullopt;
      }

      enum class Event { None, Switch, Exit } event = Event::None;
      double s_event = step.t1;
      double s_exit_probe = step.t1;
      if (box_violation(state_of(step.y1), caps_) > 0.0) {
        event = Event::Exit;
        s_event = locate_exit(step, s_exit_probe);
      }
      if (in_ge_branch(step.y1[2]) != ge_branch_) {
        const double s_switch = locate_switch(step);
        if (event == Event::None || s_switch < s_event) {
          event = Event::Switch;
          s_event = s_switch;
        }
      }

      if (event == Event::None) {
        accept(step);
      } else {
        redo_until(step, s_event);
      }

      if (event == Event::Exit) {
        const State probe = state_of(ode::hermite(step, s_exit_probe));
        const ConstraintFace face = most_violated_face(probe, caps_);
        curve_.termination =
            Termination{TerminationKind::HitFace, face, snap_to_face(state_of(z_), face, caps_)};
        curve_.samples.back().state = curve_.termination.point;
        return std::move(curve_);
      }
      if (event == Event::Switch) {
        curve_.switches.push_back(s_);
        ge_branch_ = !ge_branch_;
        u_ = input_for_branch(ge_branch_, curve_.set_kind, p_);
      }
      f = stepper_.eval(s_, z_);

      const Vec2 velocity = vector_field(state_of(z_), u_, p_);
      if (std::hypot(velocity[0], velocity[1]) < options_.stall_speed) {
        curve_.termination = Termination{TerminationKind::VelocityStall, std::nullopt, state_of(z_)};
        return std::move(curve_);
      }
    }
  }

 private:
  // First backward time in the step at which the state is outside the box,
  // within exit_resolution of the face.
  double locate_exit(const ode::Step<4>& step, double& probe) const {
    double lo = step.t0;
    double hi = step.t1;
    while (hi - lo > 1e-14) {
      const double mid = 0.5 * (lo + hi);
      const double v = box_violation(state_of(ode::hermite(step, mid)), caps_);
      if (v > 0.0) {
        hi = mid;
        if (v <= options_.exit_resolution) break;
      } else {
        lo = mid;
      }
    }
    probe = hi;
    return hi;
  }

  double locate_switch(const ode::Step<4>& step) const {
    double lo = step.t0;
    double hi = step.t1;
    while (hi - lo > options_.switch_resolution) {
      const double mid = 0.5 * (lo + hi);
      if (in_ge_branch(ode::hermite(step, mid)[2]) == ge_branch_) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return hi;
  }

  // Re-integrates from the start of `step` to exactly s_end.
  void redo_until(const ode::Step<4>& step, double s_end) {
    if (!(s_end > step.t0)) return;
    Vec4 z = step.y0;
    Vec4 f = step.f0;
    double s = step.t0;
    while (s < s_end) {
      const ode::Step<4> sub = stepper_.advance(s, z, f, s_end);
      accept(sub);
      s = s_;
      z = z_;
      f = stepper_.eval(s_, z_);
    }
  }

  void accept(const ode::Step<4>& step) {
    subdivide(step, step.t0, state_of(step.y0), step.t1, state_of(step.y1));
    s_ = step.t1;
    z_ = normalized(step.y1);
    curve_.samples.push_back(BarrierSample{s_, state_of(z_), unit_costate(z_), u_});
  }

  // Emits interior samples of (s0, s1] so that consecutive states are at most
  // max_segment apart. The slack absorbs the final snap onto a face.
  void subdivide(const ode::Step<4>& step, double s0, const State& x0, double s1, const State& x1) {
    const double limit = options_.max_segment - 10.0 * options_.exit_resolution;
    if (std::hypot(x1.x1 - x0.x1, x1.x2 - x0.x2) <= limit || s1 - s0 < 1e-12) return;
    const double mid = 0.5 * (s0 + s1);
    const Vec4 z = ode::hermite(step, mid);
    subdivide(step, s0, x0, mid, state_of(z));
    curve_.samples.push_back(BarrierSample{mid, state_of(z), unit_costate(z), u_});
    subdivide(step, mid, state_of(z), s1, x1);
  }

  const ModelParams& p_;
  const ConstraintCaps& caps_;
  const BarrierOptions& options_;
  double u_ = 0.0;
  bool ge_branch_ = true;
  double s_ = 0.0;
  Vec4 z_{};
  BarrierCurve curve_;
  ode::DormandPrince<4, std::function<Vec4(double, const Vec4&)>> stepper_;
};

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double switching_input(const Costate& lam, SetKind kind, const ModelParams& p) {
  if (lam.lambda1 == 0.0 && lam.lambda2 == 0.0) {
    throw std::invalid_argument("switching_input: costate must be nonzero");
  }
  return input_for_branch(in_ge_branch(lam.lambda1), kind, p);
}

std::optional<TangentPoint> select_tangent_point(const ModelParams& p, const ConstraintCaps& caps,
                                                 SetKind kind) {
  const auto g1 = tangent_point_g1(p, caps, kind);
  const auto g3 = tangent_point_g3(p, caps, kind);
  if (g1 && g3) {
    if (!entry_condition(p, caps, kind, ConstraintFace::G1).holds &&
        entry_condition(p, caps, kind, ConstraintFace::G3).holds) {
      return g3;
    }
    return g1;
  }
  return g1 ? g1 : g3;
}

std::optional<BarrierCurve> trace_barrier(const ModelParams& p, const ConstraintCaps& caps,
                                          const TangentPoint& tangent,
                                          const BarrierOptions& options) {
  Tracer tracer(p, caps, tangent, options);
  return tracer.run();
}

std::optional<BarrierCurve> compute_barrier(const ModelParams& p, const ConstraintCaps& caps,
                                            SetKind kind, const BarrierOptions& options) {
  const Classification cls = classify(p, caps);
  if (cls.regime == Regime::Comfortable || cls.regime == Regime::Desperate) {
    throw BarrierPreconditionError(std::string("compute_barrier: no nontrivial set in the ") +
                                   to_string(cls.regime) + " regime");
  }
  const auto tangent = select_tangent_point(p, caps, kind);
  if (!tangent) return std::nullopt;
  return trace_barrier(p, caps, *tangent, options);
}

bool BarrierVerification::passed() const {
  return hamiltonian.passed && extremality.passed && graze.passed && terminal_tangency.passed;
}

std::vector<std::string> BarrierVerification::failures() const {
  std::vector<std::string> out;
  for (const BarrierCheck* c : {&hamiltonian, &extremality, &graze, &terminal_tangency}) {
    if (!c->passed) {
      std::ostringstream os;
      os << c->name << ": worst " << c->worst << " > " << c->tolerance << " at sample "
         << c->worst_sample;
      out.push_back(os.str());
    }
  }
  return out;
}

BarrierVerification verify_barrier(const BarrierCurve& curve, const ModelParams& p,
                                   const ConstraintCaps& caps, const VerifyOptions& options) {
  BarrierVerification v;
  v.hamiltonian.tolerance = options.hamiltonian_tol;
  v.extremality.tolerance = options.extremality_tol;
  v.graze.tolerance = options.graze_distance_tol;
  v.terminal_tangency.tolerance = options.tangency_tol;
  if (curve.samples.empty()) throw std::invalid_argument("verify_barrier: empty curve");

  auto hamiltonian = [&](const BarrierSample& s, double u) {
    const Vec2 f = vector_field(s.state, u, p);
    return s.costate.lambda1 * f[0] + s.costate.lambda2 * f[1];
  };

  for (std::size_t i = 0; i < curve.samples.size(); ++i) {
    const BarrierSample& s = curve.samples[i];
    const double h = std::abs(hamiltonian(s, s.u));
    if (h > v.hamiltonian.worst) {
      v.hamiltonian.worst = h;
      v.hamiltonian.worst_sample = i;
    }
    // Excess of the recorded input's Hamiltonian over the extremal value.
    double excess = 0.0;
    if (s.u != p.u_min && s.u != p.u_max) {
      excess = std::numeric_limits<double>::infinity();
    } else {
      const double other = s.u == p.u_min ? p.u_max : p.u_min;
      const double diff = hamiltonian(s, s.u) - hamiltonian(s, other);
      excess = curve.set_kind == SetKind::Admissible ? diff : -diff;
    }
    if (excess > v.extremality.worst) {
      v.extremality.worst = excess;
      v.extremality.worst_sample = i;
    }
  }
  v.hamiltonian.passed = v.hamiltonian.worst <= options.hamiltonian_tol;
  v.extremality.passed = v.extremality.worst <= options.extremality_tol;

  // Forward re-integration of the state alone from the deepest sample, replaying
  // the recorded input schedule in reverse.
  struct Segment {
    double s_begin;
    double s_end;
    double u;
  };
  std::vector<Segment> segments;
  for (std::size_t i = 1; i < curve.samples.size(); ++i) {
    const double u = curve.samples[i].u;
    if (segments.empty() || segments.back().u != u) {
      const double begin = segments.empty() ? 0.0 : segments.back().s_end;
      segments.push_back(Segment{begin, curve.samples[i].s, u});
    } else {
      segments.back().s_end = curve.samples[i].s;
    }
  }
  State x = curve.samples.back().state;
  double worst_violation = std::max(0.0, box_violation(x, caps));
  std::size_t worst_index = curve.samples.size() - 1;
  double u = 0.0;
  auto stepper = ode::make_stepper<2>(
      [&](double, const Vec2& y) { return vector_field(State{y[0], y[1]}, u, p); },
      options.tolerances);
  for (auto it = segments.rbegin(); it != segments.rend(); ++it) {
    u = it->u;
    const double duration = it->s_end - it->s_begin;
    if (!(duration > 0.0)) continue;
    Vec2 y{x.x1, x.x2};
    Vec2 f = stepper.eval(0.0, y);
    double t = 0.0;
    while (t < duration) {
      const auto step = stepper.advance(t, y, f, duration);
      t = step.t1;
      y = step.y1;
      f = step.f1;
      const double viol = box_violation(State{y[0], y[1]}, caps);
      if (viol > worst_violation) {
        worst_violation = viol;
        worst_index = static_cast<std::size_t>(
            std::distance(curve.samples.begin(),
                          std::lower_bound(curve.samples.begin(), curve.samples.end(),
                                           it->s_end - t,
                                           [](const BarrierSample& s, double sv) { return s.s < sv; })));
      }
    }
    x = State{y[0], y[1]};
  }
  v.graze_distance = std::hypot(x.x1 - curve.tangent.point.x1, x.x2 - curve.tangent.point.x2);
  v.graze_max_violation = worst_violation;
  v.graze.worst = v.graze_distance;
  v.graze.worst_sample = worst_index;
  v.graze.passed = v.graze_distance <= options.graze_distance_tol &&
                   worst_violation <= options.graze_violation_tol;

  const double lie = lie_derivative(curve.tangent.face, curve.tangent.point, curve.samples.front().u, p);
  v.terminal_tangency.worst = std::abs(lie);
  v.terminal_tangency.passed = std::abs(lie) <= options.tangency_tol;
  return v;
}

const char* to_string(TerminationKind kind) {
  switch (kind) {
    case TerminationKind::HitFace:
      return "hit_face";
    case TerminationKind::VelocityStall:
      return "velocity_stall";
    case TerminationKind::HorizonExceeded:
      return "horizon_exceeded";
  }
  return "?";
}

std::string barrier_csv(const BarrierCurve& curve) {
  std::string out = "s,x1,x2,lambda1,lambda2,u\n";
  for (const auto& s : curve.samples) {
    out += fmt17(s.s) + ',' + fmt17(s.state.x1) + ',' + fmt17(s.state.x2) + ',' +
           fmt17(s.costate.lambda1) + ',' + fmt17(s.costate.lambda2) + ',' + fmt17(s.u) + '\n';
  }
  return out;
}

nlohmann::json to_json(const BarrierCurve& curve) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : curve.samples) {
    samples.push_back({s.s, s.state.x1, s.state.x2, s.costate.lambda1, s.costate.lambda2, s.u});
  }
  nlohmann::json term = {{"kind", to_string(curve.termination.kind)},
                         {"x1", curve.termination.point.x1},
                         {"x2", curve.termination.point.x2}};
  term["face"] = curve.termination.face ? nlohmann::json(to_string(*curve.termination.face))
                                        : nlohmann::json(nullptr);
  return {{"set_kind", to_string(curve.set_kind)},
          {"tangent", to_json(curve.tangent)},
          {"columns", {"s", "x1", "x2", "lambda1", "lambda2", "u"}},
          {"samples", samples},
          {"termination", term},
          {"switches", curve.switches}};
}

BarrierCurve barrier_from_json(const nlohmann::json& j) {
  BarrierCurve c;
  c.set_kind = set_kind_from_string(j.at("set_kind").get<std::string>());
  c.tangent = tangent_point_from_json(j.at("tangent"));
  for (const auto& row : j.at("samples")) {
    c.samples.push_back(BarrierSample{row.at(0).get<double>(),
                                      State{row.at(1).get<double>(), row.at(2).get<double>()},
                                      Costate{row.at(3).get<double>(), row.at(4).get<double>()},
                                      row.at(5).get<double>()});
  }
  const auto& term = j.at("termination");
  const std::string kind = term.at("kind").get<std::string>();
  if (kind == "hit_face") {
    c.termination.kind = TerminationKind::HitFace;
  } else if (kind == "velocity_stall") {
    c.termination.kind = TerminationKind::VelocityStall;
  } else if (kind == "horizon_exceeded") {
    c.termination.kind = TerminationKind::HorizonExceeded;
  } else {
    throw std::invalid_argument("unknown termination kind '" + kind + "'");
  }
  if (!term.at("face").is_null()) c.termination.face = face_from_string(term.at("face").get<std::string>());
  c.termination.point = State{term.at("x1").get<double>(), term.at("x2").get<double>()};
  c.switches = j.at("switches").get<std::vector<double>>();
  return c;
}

nlohmann::json to_json(const BarrierVerification& v) {
  auto check = [](const BarrierCheck& c) {
    return nlohmann::json{{"name", c.name},
                          {"passed", c.passed},
                          {"worst", c.worst},
                          {"tolerance", c.tolerance},
                          {"worst_sample", c.worst_sample}};
  };
  return {{"passed", v.passed()},
          {"checks",
           {check(v.hamiltonian), check(v.extremality), check(v.graze), check(v.terminal_tangency)}},
          {"graze_distance", v.graze_distance},
          {"graze_max_violation", v.graze_max_violation}};
}

}  // namespace capguard
