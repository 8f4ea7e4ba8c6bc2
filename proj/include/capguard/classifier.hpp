#pragma once

#include <optional>
#include <string>
#include <vector>

#include "capguard/model.hpp"
#include "capguard/tangency.hpp"

namespace capguard {

/// Comfortable: A = M = box. ComfortableViable: both sets nontrivial.
/// Viable: A nontrivial, M = {0}. Desperate: A = M = {0}.
enum class Regime { Comfortable, ComfortableViable, Viable, Desperate };

/// One evaluated inequality, always in the form lhs > rhs.
struct AuditEntry {
  std::string id;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  bool holds = false;
  friend bool operator==(const AuditEntry&, const AuditEntry&) = default;
};

struct Classification {
  Regime regime = Regime::Comfortable;
  std::vector<AuditEntry> audits;
  std::optional<ConstraintFace> active_face;
  bool boundary = false;
  std::vector<std::string> path;

  const AuditEntry& audit(const std::string& id) const;
  friend bool operator==(const Classification&, const Classification&) = default;
};

/// Audit identifiers, in evaluation order.
namespace audit_id {
inline constexpr const char* kExistG1Admissible = "exist_g1_admissible";
inline constexpr const char* kExistG1Mrpi = "exist_g1_mrpi";
inline constexpr const char* kExistG3 = "exist_g3";
inline constexpr const char* kEntryG1Admissible = "entry_g1_admissible";
inline constexpr const char* kEntryG1Mrpi = "entry_g1_mrpi";
inline constexpr const char* kEntryG3Admissible = "entry_g3_admissible";
inline constexpr const char* kEntryG3Mrpi = "entry_g3_mrpi";
}  // namespace audit_id

Classification classify(const ModelParams& p, const ConstraintCaps& caps);

/// Plain-text report listing every inequality and the decision path.
std::string classification_report(const ModelParams& p, const ConstraintCaps& caps);
std::string format_report(const Classification& cls);
Classification parse_classification_report(const std::string& text);

const char* to_string(Regime regime);
Regime regime_from_string(const std::string& name);

/// Order used when comparing regimes: larger is more favorable.
int favorability(Regime regime);

nlohmann::json to_json(const Classification& cls);
Classification classification_from_json(const nlohmann::json& j);

}  // namespace capguard
