#pragma once

// Polygonal representations of the admissible set and the MRPI.
//
// A nontrivial region is bounded by its barrier polyline and by the part of the
// box boundary that keeps the origin enclosed. Vertices are stored
// counterclockwise; barrier_range marks the contiguous vertex run lying on the
// barrier proper.

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "capguard/barrier.hpp"
#include "capguard/classifier.hpp"
#include "capguard/model.hpp"
#include "capguard/tangency.hpp"

namespace capguard {

inline constexpr double kDefaultMembershipEps = 1e-9;

/// How the polygon was closed.
enum class Closure {
  Box,            // region equals the constraint box
  Degenerate,     // region is the single point (0, 0)
  BarrierFace,    // barrier ends on the box boundary; closed along the box
  BarrierRadial,  // barrier stalled at an equilibrium; joined to the nearest box point
};

struct RegionSet {
  SetKind kind = SetKind::Admissible;
  Regime regime = Regime::Comfortable;
  ConstraintCaps caps;
  std::vector<State> polygon;  // counterclockwise, not repeated at the end
  std::optional<std::pair<std::size_t, std::size_t>> barrier_range;  // inclusive vertex indices
  double area = 0.0;
  Closure closure = Closure::Box;

  bool degenerate() const { return closure == Closure::Degenerate; }
};

enum class MembershipKind { Inside, OnBarrier, OnConstraintBoundary, Outside };

struct Membership {
  MembershipKind kind = MembershipKind::Outside;
  double distance = 0.0;  // unsigned distance to the region boundary
  std::size_t nearest_segment = 0;

  bool in_closure() const { return kind != MembershipKind::Outside; }
};

/// Builds both regions. Curves must be supplied exactly for the sets that need
/// one: the MRPI in the comfortable-viable regime, and the admissible set in the
/// viable and comfortable-viable regimes whenever an admissible tangent point
/// exists. Otherwise the admissible set is the whole box.
/// Throws std::invalid_argument when the curves do not match the classification.
std::pair<RegionSet, RegionSet> build_regions(const ModelParams& p, const ConstraintCaps& caps,
                                              const Classification& cls,
                                              const std::optional<BarrierCurve>& admissible_curve,
                                              const std::optional<BarrierCurve>& mrpi_curve);

/// Whether build_regions expects a barrier curve for the given set.
bool expects_barrier(const ModelParams& p, const ConstraintCaps& caps, const Classification& cls,
                     SetKind kind);

/// Closes a single barrier into a polygon (exposed for tests).
RegionSet region_from_barrier(const BarrierCurve& curve, const ConstraintCaps& caps, Regime regime);

Membership contains(const RegionSet& region, const State& x, double eps = kDefaultMembershipEps);

/// Distance from x to the segments of the region boundary that can be crossed
/// outward: the barrier and the parts lying on the cap faces x1 = xbar1 or
/// x2 = xbar2. Infinite when the region has no such segments.
double distance_to_outer_boundary(const RegionSet& region, const State& x);

double polygon_area(const std::vector<State>& polygon);  // signed shoelace
bool polygon_is_simple(const std::vector<State>& polygon);

/// Area(M) / Area(A). nullopt when A is degenerate (the desperate regime).
std::optional<double> efficiency_ratio(const RegionSet& mrpi, const RegionSet& admissible);

const char* to_string(MembershipKind kind);
const char* to_string(Closure closure);

/// {"kind","case","vertices","barrier_range","area","closure"}
nlohmann::json to_json(const RegionSet& region);
RegionSet region_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Membership& m);

/// Vertex list "x1,x2,on_barrier".
std::string region_csv(const RegionSet& region);

}  // namespace capguard
