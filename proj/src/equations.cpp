#include "mcontact/equations.hpp"

#include <sstream>

#include <json.hpp>

namespace mcontact {

std::string to_string(EquationKind k) {
  switch (k) {
    case EquationKind::Field: return "field";
    case EquationKind::Divergence: return "divergence";
    case EquationKind::Constraint: return "constraint";
    case EquationKind::Compatibility: return "compatibility";
  }
  return "?";
}

std::string EquationSet::text() const {
  std::ostringstream os;
  for (const auto& eq : equations)
    os << eq.name << " [" << to_string(eq.kind) << "]: " << to_string(eq.residual) << " = 0\n";
  if (!free_parameters.empty()) {
    os << "free parameters:";
    for (const auto& p : free_parameters) os << " " << p.name;
    os << "\n";
  }
  if (!notice.empty()) os << "notice: " << notice << "\n";
  return os.str();
}

std::string EquationSet::latex() const {
  std::ostringstream os;
  os << "\\begin{align}\n";
  for (std::size_t i = 0; i < equations.size(); ++i) {
    os << "  " << to_latex(equations[i].residual) << " &= 0";
    if (i + 1 < equations.size()) os << " \\\\";
    os << "\n";
  }
  os << "\\end{align}\n";
  return os.str();
}

std::string EquationSet::json() const {
  nlohmann::json j;
  j["equations"] = nlohmann::json::array();
  for (const auto& eq : equations) {
    nlohmann::json e;
    e["kind"] = to_string(eq.kind);
    e["name"] = eq.name;
    e["residual"] = to_string(eq.residual);
    j["equations"].push_back(e);
  }
  j["free_parameters"] = nlohmann::json::array();
  for (const auto& p : free_parameters) {
    nlohmann::json e;
    e["name"] = p.name;
    e["role"] = p.role;
    j["free_parameters"].push_back(e);
  }
  if (!notice.empty()) j["notice"] = notice;
  return j.dump(2);
}

}  // namespace mcontact
