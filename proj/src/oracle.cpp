#include "capguard/oracle.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace capguard {
namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

StayResult stays_in_box(const ModelParams& p, const ConstraintCaps& caps, const State& x0, double u,
                        const OracleOptions& options) {
  if (box_violation(x0, caps) > options.violation_tol) return {false, StayReason::Left, 0.0};

  const State eq = endemic_equilibrium(u, p).value_or(State{0.0, 0.0});
  const bool eq_in_box = box_violation(eq, caps) <= 0.0;

  auto stepper = ode::make_stepper<2>(
      [&](double, const ode::Vec<2>& y) { return vector_field(State{y[0], y[1]}, u, p); }, options.tolerances);
  ode::Vec<2> y{x0.x1, x0.x2};
  ode::Vec<2> f = stepper.eval(0.0, y);
  double t = 0.0;
  while (t < options.horizon) {
    if (options.use_certificates) {
      if (f[0] <= 0.0 && f[1] <= 0.0) return {true, StayReason::NonIncreasing, t};
      if (eq_in_box && y[0] <= eq.x1 && y[1] <= eq.x2) return {true, StayReason::BelowEquilibrium, t};
    }
    const auto step = stepper.advance(t, y, f, options.horizon);
    t = step.t1;
    y = step.y1;
    f = step.f1;
    if (box_violation(State{y[0], y[1]}, caps) > options.violation_tol) return {false, StayReason::Left, t};
  }
  const State x{y[0], y[1]};
  if (y[1] < caps.xbar2 && f[1] <= 0.0) return {true, StayReason::TailDecreasing, t};
  if (eq_in_box && std::hypot(x.x1 - eq.x1, x.x2 - eq.x2) <= options.equilibrium_tol) {
    return {true, StayReason::TailAtEquilibrium, t};
  }
  return {false, StayReason::TailRejected, t};
}

State GridVerdict::point(std::size_t i, std::size_t j) const {
  return State{static_cast<double>(i) * caps.xbar1 / static_cast<double>(n1 - 1),
               static_cast<double>(j) * caps.xbar2 / static_cast<double>(n2 - 1)};
}

GridVerdict grid_membership(const ModelParams& p, const ConstraintCaps& caps, std::size_t n1, std::size_t n2,
                            const OracleOptions& options) {
  if (n1 < 2 || n2 < 2) throw std::invalid_argument("grid_membership: resolution must be at least 2x2");
  if (!(options.horizon > 0.0)) throw std::invalid_argument("grid_membership: horizon must be > 0");
  p.validate();
  caps.validate();
  GridVerdict v;
  v.caps = caps;
  v.n1 = n1;
  v.n2 = n2;
  v.horizon = options.horizon;
  v.admissible.assign(n1 * n2, 0);
  v.invariant.assign(n1 * n2, 0);
  for (std::size_t j = 0; j < n2; ++j) {
    for (std::size_t i = 0; i < n1; ++i) {
      const State x = v.point(i, j);
      const bool adm = stays_in_box(p, caps, x, p.u_max, options).stays;
      const bool inv = stays_in_box(p, caps, x, p.u_min, options).stays;
      v.admissible[v.index(i, j)] = adm ? 1 : 0;
      v.invariant[v.index(i, j)] = inv ? 1 : 0;
    }
  }
  return v;
}

double Agreement::fraction() const {
  return total == 0 ? 1.0 : static_cast<double>(agree) / static_cast<double>(total);
}

double Agreement::off_band_fraction() const {
  return off_band_total == 0 ? 1.0 : static_cast<double>(off_band_agree) / static_cast<double>(off_band_total);
}

bool Comparison::passed(double threshold) const {
  return admissible.off_band_fraction() >= threshold && mrpi.off_band_fraction() >= threshold;
}

Comparison compare(const GridVerdict& verdict, const RegionSet& admissible, const RegionSet& mrpi, double band,
                   double eps) {
  Comparison c;
  c.band = band;
  for (std::size_t j = 0; j < verdict.n2; ++j) {
    for (std::size_t i = 0; i < verdict.n1; ++i) {
      const State x = verdict.point(i, j);
      const std::size_t k = verdict.index(i, j);
      for (SetKind kind : {SetKind::Admissible, SetKind::Mrpi}) {
        const RegionSet& region = kind == SetKind::Admissible ? admissible : mrpi;
        Agreement& a = kind == SetKind::Admissible ? c.admissible : c.mrpi;
        const bool oracle = (kind == SetKind::Admissible ? verdict.admissible[k] : verdict.invariant[k]) != 0;
        const Membership m = contains(region, x, eps);
        const bool in_region = m.in_closure();
        const bool off_band = m.distance > band;
        ++a.total;
        if (off_band) ++a.off_band_total;
        if (oracle == in_region) {
          ++a.agree;
          if (off_band) ++a.off_band_agree;
        } else {
          c.disagreements.push_back(Disagreement{i, j, kind, oracle, in_region, m.distance});
        }
      }
    }
  }
  return c;
}

const char* to_string(StayReason reason) {
  switch (reason) {
    case StayReason::Left:
      return "left";
    case StayReason::NonIncreasing:
      return "non_increasing";
    case StayReason::BelowEquilibrium:
      return "below_equilibrium";
    case StayReason::TailDecreasing:
      return "tail_decreasing";
    case StayReason::TailAtEquilibrium:
      return "tail_at_equilibrium";
    case StayReason::TailRejected:
      return "tail_rejected";
  }
  return "?";
}

std::string verdict_csv(const GridVerdict& verdict) {
  std::string out = "x1,x2,admissible,invariant\n";
  for (std::size_t j = 0; j < verdict.n2; ++j) {
    for (std::size_t i = 0; i < verdict.n1; ++i) {
      const State x = verdict.point(i, j);
      const std::size_t k = verdict.index(i, j);
      out += fmt17(x.x1) + ',' + fmt17(x.x2) + ',' + (verdict.admissible[k] ? "1" : "0") + ',' +
             (verdict.invariant[k] ? "1" : "0") + '\n';
    }
  }
  return out;
}

std::string verdict_pgm(const GridVerdict& verdict) {
  std::string out = "P2\n" + std::to_string(verdict.n1) + ' ' + std::to_string(verdict.n2) + "\n255\n";
  for (std::size_t r = 0; r < verdict.n2; ++r) {
    const std::size_t j = verdict.n2 - 1 - r;
    for (std::size_t i = 0; i < verdict.n1; ++i) {
      const std::size_t k = verdict.index(i, j);
      const int level = verdict.invariant[k] ? 255 : (verdict.admissible[k] ? 128 : 0);
      if (i > 0) out += ' ';
      out += std::to_string(level);
    }
    out += '\n';
  }
  return out;
}

nlohmann::json to_json(const Comparison& c) {
  auto agreement = [](const Agreement& a) {
    return nlohmann::json{{"total", a.total},
                          {"agree", a.agree},
                          {"fraction", a.fraction()},
                          {"off_band_total", a.off_band_total},
                          {"off_band_agree", a.off_band_agree},
                          {"off_band_fraction", a.off_band_fraction()}};
  };
  nlohmann::json dis = nlohmann::json::array();
  for (const auto& d : c.disagreements) {
    dis.push_back({{"i", d.i},
                   {"j", d.j},
                   {"kind", to_string(d.kind)},
                   {"oracle", d.oracle},
                   {"region", d.region},
                   {"distance", d.distance}});
  }
  return {{"band", c.band},
          {"admissible", agreement(c.admissible)},
          {"mrpi", agreement(c.mrpi)},
          {"passed", c.passed()},
          {"disagreements", dis}};
}

}  // namespace capguard
