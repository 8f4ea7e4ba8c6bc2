#include "capguard/classifier.hpp"

#include <cmath>
#include <cassert>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace capguard {
namespace {

// Existence inequalities: a tangency appearing is the less favorable outcome,
// so margins inside the boundary band count as holding.
AuditEntry existence_audit(const char* id, const Inequality& ineq, bool face_reachable) {
  AuditEntry a{id, ineq.lhs, ineq.rhs, ineq.margin(), false};
  a.holds = face_reachable && (ineq.holds_strictly() || ineq.near_boundary());
  return a;
}

AuditEntry entry_audit(const char* id, const EntryCondition& c) {
  return AuditEntry{id, c.lhs, c.rhs, c.margin, c.holds};
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

const AuditEntry& Classification::audit(const std::string& id) const {
  for (const auto& a : audits) {
    if (a.id == id) return a;
  }
  throw std::out_of_range("no audit entry '" + id + "'");
}

Classification classify(const ModelParams& p, const ConstraintCaps& caps) {
  Classification cls;
  const bool g1_reachable = caps.xbar1 < 1.0;
  const bool g3_reachable = caps.xbar2 < 1.0;
  cls.audits = {
      existence_audit(audit_id::kExistG1Admissible, g1_existence(p, caps, SetKind::Admissible),
                      g1_reachable),
      existence_audit(audit_id::kExistG1Mrpi, g1_existence(p, caps, SetKind::Mrpi), g1_reachable),
      existence_audit(audit_id::kExistG3, g3_existence(p, caps), g3_reachable),
      entry_audit(audit_id::kEntryG1Admissible,
                  entry_condition(p, caps, SetKind::Admissible, ConstraintFace::G1)),
      entry_audit(audit_id::kEntryG1Mrpi,
                  entry_condition(p, caps, SetKind::Mrpi, ConstraintFace::G1)),
      entry_audit(audit_id::kEntryG3Admissible,
                  entry_condition(p, caps, SetKind::Admissible, ConstraintFace::G3)),
      entry_audit(audit_id::kEntryG3Mrpi,
                  entry_condition(p, caps, SetKind::Mrpi, ConstraintFace::G3)),
  };
  for (const auto& a : cls.audits) {
    if (std::abs(a.margin) <= kBoundaryMargin) cls.boundary = true;
  }

  const bool e1a = cls.audit(audit_id::kExistG1Admissible).holds;
  const bool e1m = cls.audit(audit_id::kExistG1Mrpi).holds;
  const bool e3 = cls.audit(audit_id::kExistG3).holds;
  const bool n1a = cls.audit(audit_id::kEntryG1Admissible).holds;
  const bool n1m = cls.audit(audit_id::kEntryG1Mrpi).holds;
  const bool n3a = cls.audit(audit_id::kEntryG3Admissible).holds;
  const bool n3m = cls.audit(audit_id::kEntryG3Mrpi).holds;

  // Desperate characterisations on the two faces never contradict a valid
  // barrier on the other face.
  assert(!(e3 && !n3a) || !(e1a && n1a));
  assert(!(e1a && !n1a) || !(e3 && n3a));

  auto& path = cls.path;
  // The box is robustly invariant iff max_u L_f g1 <= 0 on {xbar1} x [0, xbar2]
  // and L_f g3 <= 0 on [0, xbar1] x {xbar2}; max over u is attained at u_min.
  if (!e1m && !e3) {
    path = {"exist_g1_mrpi fails", "exist_g3 fails", "comfortable"};
    cls.regime = Regime::Comfortable;
    return cls;
  }
  path.push_back(e3 ? "exist_g3 holds" : "exist_g1_mrpi holds");
  if (e3 && !n3a) {
    path.insert(path.end(), {"entry_g3_admissible fails", "desperate"});
    cls.regime = Regime::Desperate;
    cls.active_face = ConstraintFace::G3;
  } else if (e1a && !n1a) {
    path.insert(path.end(), {"exist_g1_admissible holds", "entry_g1_admissible fails", "desperate"});
    cls.regime = Regime::Desperate;
    cls.active_face = ConstraintFace::G1;
  } else if (e3 && n3m) {
    path.insert(path.end(), {"entry_g3_mrpi holds", "comfortable_viable"});
    cls.regime = Regime::ComfortableViable;
    cls.active_face = ConstraintFace::G3;
  } else if (e1m && n1m) {
    path.insert(path.end(), {"entry_g1_mrpi holds", "comfortable_viable"});
    cls.regime = Regime::ComfortableViable;
    cls.active_face = ConstraintFace::G1;
  } else {
    if (e3) {
      path.insert(path.end(), {"entry_g3_admissible holds", "entry_g3_mrpi fails"});
    } else {
      path.push_back(e1a ? "entry_g1_admissible holds" : "exist_g1_admissible fails");
      path.push_back("entry_g1_mrpi fails");
    }
    path.push_back("viable");
    cls.regime = Regime::Viable;
    cls.active_face = e3 ? ConstraintFace::G3 : ConstraintFace::G1;
  }
  return cls;
}

std::string format_report(const Classification& cls) {
  std::ostringstream os;
  os << "case: " << to_string(cls.regime) << '\n';
  os << "active_face: " << (cls.active_face ? to_string(*cls.active_face) : "none") << '\n';
  os << "boundary: " << (cls.boundary ? "true" : "false") << '\n';
  os << "path:";
  for (const auto& step : cls.path) os << " | " << step;
  os << '\n';
  os << "inequalities (lhs > rhs):\n";
  for (const auto& a : cls.audits) {
    os << "  " << a.id << " lhs=" << format_double(a.lhs) << " rhs=" << format_double(a.rhs)
       << " margin=" << format_double(a.margin) << " holds=" << (a.holds ? "true" : "false")
       << '\n';
  }
  return os.str();
}

std::string classification_report(const ModelParams& p, const ConstraintCaps& caps) {
  return format_report(classify(p, caps));
}

Classification parse_classification_report(const std::string& text) {
  Classification cls;
  std::istringstream is(text);
  std::string line;
  auto value_after = [](const std::string& l, const std::string& prefix) {
    if (l.rfind(prefix, 0) != 0) throw std::invalid_argument("report: expected '" + prefix + "'");
    return l.substr(prefix.size());
  };
  std::getline(is, line);
  cls.regime = regime_from_string(value_after(line, "case: "));
  std::getline(is, line);
  const std::string face = value_after(line, "active_face: ");
  if (face != "none") cls.active_face = face_from_string(face);
  std::getline(is, line);
  cls.boundary = value_after(line, "boundary: ") == "true";
  std::getline(is, line);
  std::string rest = value_after(line, "path:");
  for (std::size_t pos = rest.find(" | "); pos != std::string::npos;) {
    const std::size_t next = rest.find(" | ", pos + 3);
    cls.path.push_back(rest.substr(pos + 3, next == std::string::npos ? next : next - pos - 3));
    pos = next;
  }
  std::getline(is, line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    AuditEntry a;
    std::string lhs, rhs, margin, holds;
    ls >> a.id >> lhs >> rhs >> margin >> holds;
    a.lhs = std::stod(value_after(lhs, "lhs="));
    a.rhs = std::stod(value_after(rhs, "rhs="));
    a.margin = std::stod(value_after(margin, "margin="));
    a.holds = value_after(holds, "holds=") == "true";
    cls.audits.push_back(a);
  }
  return cls;
}

const char* to_string(Regime regime) {
  switch (regime) {
    case Regime::Comfortable:
      return "comfortable";
    case Regime::ComfortableViable:
      return "comfortable_viable";
    case Regime::Viable:
      return "viable";
    case Regime::Desperate:
      return "desperate";
  }
  return "?";
}

Regime regime_from_string(const std::string& name) {
  if (name == "comfortable") return Regime::Comfortable;
  if (name == "comfortable_viable") return Regime::ComfortableViable;
  if (name == "viable") return Regime::Viable;
  if (name == "desperate") return Regime::Desperate;
  throw std::invalid_argument("unknown case '" + name + "'");
}

int favorability(Regime regime) {
  switch (regime) {
    case Regime::Desperate:
      return 0;
    case Regime::Viable:
      return 1;
    case Regime::ComfortableViable:
      return 2;
    case Regime::Comfortable:
      return 3;
  }
  return -1;
}

nlohmann::json to_json(const Classification& cls) {
  nlohmann::json audits = nlohmann::json::array();
  for (const auto& a : cls.audits) {
    audits.push_back(
        {{"id", a.id}, {"lhs", a.lhs}, {"rhs", a.rhs}, {"holds", a.holds}, {"margin", a.margin}});
  }
  return {{"case", to_string(cls.regime)},
          {"active_face",
           cls.active_face ? nlohmann::json(to_string(*cls.active_face)) : nlohmann::json(nullptr)},
          {"boundary", cls.boundary},
          {"path", cls.path},
          {"audits", audits}};
}

Classification classification_from_json(const nlohmann::json& j) {
  Classification cls;
  cls.regime = regime_from_string(j.at("case").get<std::string>());
  if (!j.at("active_face").is_null()) {
    cls.active_face = face_from_string(j.at("active_face").get<std::string>());
  }
  cls.boundary = j.at("boundary").get<bool>();
  if (j.contains("path")) cls.path = j.at("path").get<std::vector<std::string>>();
  for (const auto& a : j.at("audits")) {
    cls.audits.push_back(AuditEntry{a.at("id").get<std::string>(), a.at("lhs").get<double>(),
                                    a.at("rhs").get<double>(), a.at("margin").get<double>(),
                                    a.at("holds").get<bool>()});
  }
  return cls;
}

}  // namespace capguard
