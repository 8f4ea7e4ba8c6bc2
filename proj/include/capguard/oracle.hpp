#pragma once

// Brute-force grid approximation of the admissible set and the MRPI.
//
// The dynamics are cooperative and decreasing in u, so the trajectory under
// u = u_max lies below every other admissible response and the one under
// u = u_min above it. A point is therefore admissible iff the u_max trajectory
// stays in the box, and robustly invariant iff the u_min trajectory does.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "capguard/model.hpp"
#include "capguard/ode.hpp"
#include "capguard/region.hpp"

namespace capguard {

struct OracleOptions {
  double horizon = 3000.0;
  double violation_tol = 1e-9;
  double equilibrium_tol = 1e-3;  // tail test: distance to the equilibrium counted as converged
  bool use_certificates = true;   // stop early once staying forever is certain
  ode::Tolerances tolerances{};
};

enum class StayReason {
  Left,               // crossed a face by more than violation_tol
  NonIncreasing,      // f(x) <= 0 componentwise inside the box
  BelowEquilibrium,   // x <= x* componentwise with x* in the box
  TailDecreasing,     // horizon reached with x2 < xbar2 and x2 nonincreasing
  TailAtEquilibrium,  // horizon reached next to an equilibrium inside the box
  TailRejected,       // horizon reached, tail test failed
};

struct StayResult {
  bool stays = false;
  StayReason reason = StayReason::Left;
  double time = 0.0;  // exit time, certificate time, or the horizon
};

/// Whether the trajectory from x0 under constant u remains in the box.
StayResult stays_in_box(const ModelParams& p, const ConstraintCaps& caps, const State& x0, double u,
                        const OracleOptions& options = {});

struct GridVerdict {
  ConstraintCaps caps;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  double horizon = 0.0;
  std::vector<std::uint8_t> admissible;  // row-major in x2: index j * n1 + i
  std::vector<std::uint8_t> invariant;

  State point(std::size_t i, std::size_t j) const;
  std::size_t index(std::size_t i, std::size_t j) const { return j * n1 + i; }
};

/// Grid points are (i * xbar1 / (n1 - 1), j * xbar2 / (n2 - 1)).
/// Throws std::invalid_argument when n1 or n2 is below 2.
GridVerdict grid_membership(const ModelParams& p, const ConstraintCaps& caps, std::size_t n1, std::size_t n2,
                            const OracleOptions& options = {});

struct Agreement {
  std::size_t total = 0;
  std::size_t agree = 0;
  std::size_t off_band_total = 0;
  std::size_t off_band_agree = 0;

  double fraction() const;           // 1 when total is 0
  double off_band_fraction() const;  // 1 when off_band_total is 0
};

struct Disagreement {
  std::size_t i = 0;
  std::size_t j = 0;
  SetKind kind = SetKind::Admissible;
  bool oracle = false;
  bool region = false;
  double distance = 0.0;  // to the region boundary
};

struct Comparison {
  double band = 0.01;
  Agreement admissible;
  Agreement mrpi;
  std::vector<Disagreement> disagreements;

  bool passed(double threshold = 0.99) const;
};

Comparison compare(const GridVerdict& verdict, const RegionSet& admissible, const RegionSet& mrpi,
                   double band = 0.01, double eps = kDefaultMembershipEps);

const char* to_string(StayReason reason);

/// "x1,x2,admissible,invariant"
std::string verdict_csv(const GridVerdict& verdict);

/// Plain PGM (P2), top row = largest x2: 0 outside, 128 admissible only, 255 invariant.
std::string verdict_pgm(const GridVerdict& verdict);

nlohmann::json to_json(const Comparison& c);

}  // namespace capguard
