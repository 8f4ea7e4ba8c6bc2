#pragma once

// End-to-end evaluation for one parameter set and cap pair: classification,
// barrier curves and the two regions built from them.

#include <optional>

#include "capguard/barrier.hpp"
#include "capguard/classifier.hpp"
#include "capguard/model.hpp"
#include "capguard/region.hpp"

namespace capguard {

struct Analysis {
  ModelParams params;
  ConstraintCaps caps;
  Classification classification;
  std::optional<BarrierCurve> admissible_barrier;
  std::optional<BarrierCurve> mrpi_barrier;
  RegionSet admissible;
  RegionSet mrpi;

  std::optional<double> efficiency_ratio() const;
};

/// Throws std::runtime_error when an expected barrier cannot be traced.
Analysis analyze(const ModelParams& p, const ConstraintCaps& caps, const BarrierOptions& options = {});

}  // namespace capguard
