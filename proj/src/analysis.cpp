#include "capguard/analysis.hpp"

#include <stdexcept>
#include <string>

namespace capguard {

std::optional<double> Analysis::efficiency_ratio() const {
  return capguard::efficiency_ratio(mrpi, admissible);
}

Analysis analyze(const ModelParams& p, const ConstraintCaps& caps, const BarrierOptions& options) {
  p.validate();
  caps.validate();
  Analysis a;
  a.params = p;
  a.caps = caps;
  a.classification = classify(p, caps);
  for (SetKind kind : {SetKind::Admissible, SetKind::Mrpi}) {
    if (!expects_barrier(p, caps, a.classification, kind)) continue;
    auto curve = compute_barrier(p, caps, kind, options);
    if (!curve) {
      throw std::runtime_error(std::string("analyze: the ") + to_string(kind) +
                               " barrier left the constraint set on its first step");
    }
    (kind == SetKind::Admissible ? a.admissible_barrier : a.mrpi_barrier) = std::move(curve);
  }
  auto [adm, mrpi] = build_regions(p, caps, a.classification, a.admissible_barrier, a.mrpi_barrier);
  a.admissible = std::move(adm);
  a.mrpi = std::move(mrpi);
  return a;
}

}  // namespace capguard
