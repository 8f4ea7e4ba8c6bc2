#include "capguard/region.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace capguard {
namespace {

constexpr double kFaceTol = 1e-12;

std::vector<State> box_polygon(const ConstraintCaps& c) {
  return {{0.0, 0.0}, {c.xbar1, 0.0}, {c.xbar1, c.xbar2}, {0.0, c.xbar2}};
}

State clamp_to_box(const State& x, const ConstraintCaps& c) {
  return {std::clamp(x.x1, 0.0, c.xbar1), std::clamp(x.x2, 0.0, c.xbar2)};
}

// Counterclockwise arc-length coordinate along the box boundary, starting at
// the origin: bottom, right, top, left.
double perimeter_coord(const State& x, const ConstraintCaps& c) {
  const State y = clamp_to_box(x, c);
  const double d[4] = {y.x2, c.xbar1 - y.x1, c.xbar2 - y.x2, y.x1};
  const auto side = static_cast<int>(std::min_element(d, d + 4) - d);
  switch (side) {
    case 0:
      return y.x1;
    case 1:
      return c.xbar1 + y.x2;
    case 2:
      return c.xbar1 + c.xbar2 + (c.xbar1 - y.x1);
    default: {
      const double p = 2.0 * c.xbar1 + c.xbar2 + (c.xbar2 - y.x2);
      return p >= 2.0 * (c.xbar1 + c.xbar2) ? 0.0 : p;
    }
  }
}

State nearest_box_boundary_point(const State& x, const ConstraintCaps& c) {
  const State y = clamp_to_box(x, c);
  const double d[4] = {y.x2, c.xbar1 - y.x1, c.xbar2 - y.x2, y.x1};
  switch (static_cast<int>(std::min_element(d, d + 4) - d)) {
    case 0:
      return {y.x1, 0.0};
    case 1:
      return {c.xbar1, y.x2};
    case 2:
      return {y.x1, c.xbar2};
    default:
      return {0.0, y.x2};
  }
}

// Box corners strictly between `from` and `to` along the boundary, walked in the
// direction that passes the origin corner.
std::vector<State> boundary_walk(double from, double to, const ConstraintCaps& c) {
  const double perimeter = 2.0 * (c.xbar1 + c.xbar2);
  const double corner_p[4] = {0.0, c.xbar1, c.xbar1 + c.xbar2, 2.0 * c.xbar1 + c.xbar2};
  const std::vector<State> corners = box_polygon(c);
  auto wrap = [perimeter](double v) {
    v = std::fmod(v, perimeter);
    return v < 0.0 ? v + perimeter : v;
  };
  auto arc = [&](bool ccw, double p) { return ccw ? wrap(p - from) : wrap(from - p); };

  bool ccw = true;
  const double origin_ccw = arc(true, 0.0);
  if (!(origin_ccw > 0.0 && origin_ccw < arc(true, to))) ccw = false;

  std::vector<std::pair<double, State>> picked;
  const double end = arc(ccw, to);
  for (int i = 0; i < 4; ++i) {
    const double a = arc(ccw, corner_p[i]);
    if (a > 0.0 && a < end) picked.emplace_back(a, corners[static_cast<std::size_t>(i)]);
  }
  std::sort(picked.begin(), picked.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
  std::vector<State> out;
  for (const auto& [a, s] : picked) out.push_back(s);
  return out;
}

double point_segment_distance(const State& x, const State& a, const State& b) {
  const double dx = b.x1 - a.x1;
  const double dy = b.x2 - a.x2;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((x.x1 - a.x1) * dx + (x.x2 - a.x2) * dy) / len2, 0.0, 1.0);
  return std::hypot(x.x1 - (a.x1 + t * dx), x.x2 - (a.x2 + t * dy));
}

bool is_barrier_segment(const RegionSet& r, std::size_t i) {
  return r.barrier_range && i >= r.barrier_range->first && i < r.barrier_range->second;
}

bool on_cap_face_segment(const State& a, const State& b, const ConstraintCaps& c) {
  return (std::abs(a.x1 - c.xbar1) <= kFaceTol && std::abs(b.x1 - c.xbar1) <= kFaceTol) ||
         (std::abs(a.x2 - c.xbar2) <= kFaceTol && std::abs(b.x2 - c.xbar2) <= kFaceTol);
}

RegionSet box_region(SetKind kind, Regime regime, const ConstraintCaps& caps) {
  RegionSet r;
  r.kind = kind;
  r.regime = regime;
  r.caps = caps;
  r.polygon = box_polygon(caps);
  r.area = caps.xbar1 * caps.xbar2;
  r.closure = Closure::Box;
  return r;
}

RegionSet degenerate_region(SetKind kind, Regime regime, const ConstraintCaps& caps) {
  RegionSet r;
  r.kind = kind;
  r.regime = regime;
  r.caps = caps;
  r.polygon = {State{0.0, 0.0}};
  r.area = 0.0;
  r.closure = Closure::Degenerate;
  return r;
}

double cross(const State& o, const State& a, const State& b) {
  return (a.x1 - o.x1) * (b.x2 - o.x2) - (a.x2 - o.x2) * (b.x1 - o.x1);
}

bool on_segment(const State& a, const State& b, const State& p) {
  return std::min(a.x1, b.x1) <= p.x1 && p.x1 <= std::max(a.x1, b.x1) && std::min(a.x2, b.x2) <= p.x2 &&
         p.x2 <= std::max(a.x2, b.x2);
}

bool segments_intersect(const State& a, const State& b, const State& c, const State& d) {
  const double d1 = cross(c, d, a);
  const double d2 = cross(c, d, b);
  const double d3 = cross(a, b, c);
  const double d4 = cross(a, b, d);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  if (d1 == 0 && on_segment(c, d, a)) return true;
  if (d2 == 0 && on_segment(c, d, b)) return true;
  if (d3 == 0 && on_segment(a, b, c)) return true;
  if (d4 == 0 && on_segment(a, b, d)) return true;
  return false;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

RegionSet region_from_barrier(const BarrierCurve& curve, const ConstraintCaps& caps, Regime regime) {
  if (curve.samples.size() < 2) throw std::invalid_argument("region: barrier curve has fewer than two samples");
  if (curve.termination.kind == TerminationKind::HorizonExceeded) {
    throw std::invalid_argument("region: barrier curve did not terminate");
  }

  // Barrier from its far end to the tangent point.
  std::vector<State> barrier;
  barrier.reserve(curve.samples.size());
  for (auto it = curve.samples.rbegin(); it != curve.samples.rend(); ++it) {
    barrier.push_back(clamp_to_box(it->state, caps));
  }
  if (curve.termination.kind == TerminationKind::HitFace) barrier.front() = curve.termination.point;

  std::vector<State> poly;
  std::size_t first = 0;
  State walk_end = barrier.front();
  Closure closure = Closure::BarrierFace;
  if (curve.termination.kind == TerminationKind::VelocityStall) {
    walk_end = nearest_box_boundary_point(barrier.front(), caps);
    poly.push_back(walk_end);
    first = 1;
    closure = Closure::BarrierRadial;
  }
  for (const State& s : barrier) {
    if (!poly.empty() && poly.back() == s) continue;
    poly.push_back(s);
  }
  const std::size_t last = poly.size() - 1;
  for (const State& corner :
       boundary_walk(perimeter_coord(curve.tangent.point, caps), perimeter_coord(walk_end, caps), caps)) {
    if (corner == poly.back() || corner == poly.front()) continue;
    poly.push_back(corner);
  }

  RegionSet r;
  r.kind = curve.set_kind;
  r.regime = regime;
  r.caps = caps;
  r.closure = closure;
  double signed_area = polygon_area(poly);
  std::pair<std::size_t, std::size_t> range{first, last};
  if (signed_area < 0.0) {
    std::reverse(poly.begin(), poly.end());
    const std::size_t n = poly.size();
    range = {n - 1 - last, n - 1 - first};
    signed_area = -signed_area;
  }
  r.polygon = std::move(poly);
  r.barrier_range = range;
  r.area = signed_area;
  return r;
}

bool expects_barrier(const ModelParams& p, const ConstraintCaps& caps, const Classification& cls,
                     SetKind kind) {
  switch (cls.regime) {
    case Regime::Comfortable:
    case Regime::Desperate:
      return false;
    case Regime::Viable:
      return kind == SetKind::Admissible && select_tangent_point(p, caps, kind).has_value();
    case Regime::ComfortableViable:
      return kind == SetKind::Mrpi || select_tangent_point(p, caps, kind).has_value();
  }
  return false;
}

std::pair<RegionSet, RegionSet> build_regions(const ModelParams& p, const ConstraintCaps& caps,
                                              const Classification& cls,
                                              const std::optional<BarrierCurve>& admissible_curve,
                                              const std::optional<BarrierCurve>& mrpi_curve) {
  auto build = [&](SetKind kind, const std::optional<BarrierCurve>& curve) {
    const bool expected = expects_barrier(p, caps, cls, kind);
    if (expected != curve.has_value()) {
      throw std::invalid_argument(std::string("build_regions: ") + to_string(kind) + " curve " +
                                  (expected ? "missing" : "unexpected") + " for the " +
                                  to_string(cls.regime) + " regime");
    }
    if (curve) {
      if (curve->set_kind != kind) {
        throw std::invalid_argument(std::string("build_regions: curve supplied as ") + to_string(kind) +
                                    " has kind " + to_string(curve->set_kind));
      }
      return region_from_barrier(*curve, caps, cls.regime);
    }
    switch (cls.regime) {
      case Regime::Comfortable:
        return box_region(kind, cls.regime, caps);
      case Regime::Desperate:
        return degenerate_region(kind, cls.regime, caps);
      case Regime::Viable:
        return kind == SetKind::Admissible ? box_region(kind, cls.regime, caps)
                                           : degenerate_region(kind, cls.regime, caps);
      case Regime::ComfortableViable:
        return box_region(kind, cls.regime, caps);
    }
    throw std::logic_error("build_regions: unreachable");
  };
  return {build(SetKind::Admissible, admissible_curve), build(SetKind::Mrpi, mrpi_curve)};
}

Membership contains(const RegionSet& region, const State& x, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("contains: eps must be > 0");
  Membership m;
  if (region.degenerate()) {
    m.distance = std::hypot(x.x1, x.x2);
    m.kind = m.distance <= eps ? MembershipKind::Inside : MembershipKind::Outside;
    return m;
  }
  const auto& v = region.polygon;
  const std::size_t n = v.size();
  m.distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double d = point_segment_distance(x, v[i], v[(i + 1) % n]);
    if (d < m.distance) {
      m.distance = d;
      m.nearest_segment = i;
    }
  }
  if (m.distance <= eps) {
    m.kind = is_barrier_segment(region, m.nearest_segment) ? MembershipKind::OnBarrier
                                                           : MembershipKind::OnConstraintBoundary;
    return m;
  }
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const State& a = v[i];
    const State& b = v[j];
    if ((a.x2 > x.x2) != (b.x2 > x.x2)) {
      const double xi = (b.x1 - a.x1) * (x.x2 - a.x2) / (b.x2 - a.x2) + a.x1;
      if (x.x1 < xi) inside = !inside;
    }
  }
  m.kind = inside ? MembershipKind::Inside : MembershipKind::Outside;
  return m;
}

double distance_to_outer_boundary(const RegionSet& region, const State& x) {
  double best = std::numeric_limits<double>::infinity();
  if (region.degenerate()) return best;
  const auto& v = region.polygon;
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    const State& a = v[i];
    const State& b = v[(i + 1) % n];
    if (is_barrier_segment(region, i) || on_cap_face_segment(a, b, region.caps)) {
      best = std::min(best, point_segment_distance(x, a, b));
    }
  }
  return best;
}

double polygon_area(const std::vector<State>& polygon) {
  const std::size_t n = polygon.size();
  if (n < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const State& a = polygon[i];
    const State& b = polygon[(i + 1) % n];
    twice += a.x1 * b.x2 - b.x1 * a.x2;
  }
  return 0.5 * twice;
}

bool polygon_is_simple(const std::vector<State>& polygon) {
  const std::size_t n = polygon.size();
  if (n < 3) return true;
  for (std::size_t i = 0; i < n; ++i) {
    const State& a = polygon[i];
    const State& b = polygon[(i + 1) % n];
    for (std::size_t j = i + 1; j < n; ++j) {
      // Adjacent edges share a vertex by construction.
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_intersect(a, b, polygon[j], polygon[(j + 1) % n])) return false;
    }
  }
  return true;
}

std::optional<double> efficiency_ratio(const RegionSet& mrpi, const RegionSet& admissible) {
  if (admissible.degenerate() || !(admissible.area > 0.0)) return std::nullopt;
  if (mrpi.degenerate()) return 0.0;
  return std::clamp(mrpi.area / admissible.area, 0.0, 1.0);
}

const char* to_string(MembershipKind kind) {
  switch (kind) {
    case MembershipKind::Inside:
      return "inside";
    case MembershipKind::OnBarrier:
      return "on_barrier";
    case MembershipKind::OnConstraintBoundary:
      return "on_constraint_boundary";
    case MembershipKind::Outside:
      return "outside";
  }
  return "?";
}

const char* to_string(Closure closure) {
  switch (closure) {
    case Closure::Box:
      return "box";
    case Closure::Degenerate:
      return "degenerate";
    case Closure::BarrierFace:
      return "barrier_face";
    case Closure::BarrierRadial:
      return "barrier_radial";
  }
  return "?";
}

namespace {
Closure closure_from_string(const std::string& s) {
  for (Closure c : {Closure::Box, Closure::Degenerate, Closure::BarrierFace, Closure::BarrierRadial}) {
    if (s == to_string(c)) return c;
  }
  throw std::invalid_argument("unknown closure '" + s + "'");
}
}  // namespace

nlohmann::json to_json(const RegionSet& region) {
  nlohmann::json vertices = nlohmann::json::array();
  for (const State& v : region.polygon) vertices.push_back({v.x1, v.x2});
  nlohmann::json j = {{"kind", to_string(region.kind)},
                      {"case", to_string(region.regime)},
                      {"caps", to_json(region.caps)},
                      {"vertices", vertices},
                      {"area", region.area},
                      {"closure", to_string(region.closure)}};
  j["barrier_range"] = region.barrier_range
                           ? nlohmann::json{region.barrier_range->first, region.barrier_range->second}
                           : nlohmann::json(nullptr);
  return j;
}

RegionSet region_from_json(const nlohmann::json& j) {
  RegionSet r;
  r.kind = set_kind_from_string(j.at("kind").get<std::string>());
  r.regime = regime_from_string(j.at("case").get<std::string>());
  r.caps = caps_from_json(j.at("caps"));
  for (const auto& v : j.at("vertices")) r.polygon.push_back(State{v.at(0).get<double>(), v.at(1).get<double>()});
  r.area = j.at("area").get<double>();
  r.closure = closure_from_string(j.at("closure").get<std::string>());
  if (!j.at("barrier_range").is_null()) {
    r.barrier_range = std::make_pair(j.at("barrier_range").at(0).get<std::size_t>(),
                                     j.at("barrier_range").at(1).get<std::size_t>());
  }
  return r;
}

nlohmann::json to_json(const Membership& m) {
  return {{"kind", to_string(m.kind)}, {"distance", m.distance}};
}

std::string region_csv(const RegionSet& region) {
  std::string out = "x1,x2,on_barrier\n";
  for (std::size_t i = 0; i < region.polygon.size(); ++i) {
    const bool on_barrier =
        region.barrier_range && i >= region.barrier_range->first && i <= region.barrier_range->second;
    out += fmt17(region.polygon[i].x1) + ',' + fmt17(region.polygon[i].x2) + ',' + (on_barrier ? "1" : "0") + '\n';
  }
  return out;
}

}  // namespace capguard
