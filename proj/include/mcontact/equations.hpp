#pragma once

#include <string>
#include <vector>

#include "mcontact/chart.hpp"

namespace mcontact {

enum class EquationKind { Field, Divergence, Constraint, Compatibility };

std::string to_string(EquationKind k);

// a single residual; the equation it encodes is residual == 0
struct Equation {
  std::string name;
  Expr residual;
  EquationKind kind = EquationKind::Field;
};

struct FreeParameter {
  std::string name;
  std::string role;
};

struct EquationSet {
  Chart chart;
  std::vector<Equation> equations;
  std::vector<FreeParameter> free_parameters;
  std::string notice;

  std::string text() const;
  std::string latex() const;
  std::string json() const;
};

}  // namespace mcontact
