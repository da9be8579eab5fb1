#pragma once

#include <map>
#include <vector>

#include "mcontact/chart.hpp"
#include "mcontact/form.hpp"

namespace mcontact {

// Section of the bundle the chart trivializes: every fiber coordinate gets an
// expression in the base coordinates alone.
struct Section {
  Chart chart;
  std::map<int, Expr> values;  // fiber chart index -> expression in base coords

  Expr value(int index) const;
  void validate() const;  // throws StructureError on gaps or fiber-dependent values
};

// velocity slots filled with derivatives of the field values
Section prolong_section(const Chart& chart, const std::map<int, Expr>& field_values,
                        const std::map<int, Expr>& other_values = {});

// tangent lift along x^mu: d/dx^mu + sum_A (d psi^A / dx^mu) d/dz^A
VectorField section_tangent(const Section& s, int mu);
MultiVector section_tangent_frame(const Section& s);  // lift along x^0 ^ ... ^ x^{m-1}

// formal counterparts with jet symbols in place of actual derivatives
VectorField prolongation_field(const JetContext& jets, int mu);
MultiVector prolongation_frame(const JetContext& jets);

// substitution table sending fiber coordinates and their jet symbols to the
// section's values and derivatives
std::map<SymbolId, Expr> section_jet_values(const JetContext& jets, const Section& s);

// psi^* a: fiber coefficients evaluated on the section, fiber differentials
// expanded into base differentials
Form pull_back(const Form& a, const Section& s);

// Smooth map between charts given by one source-coordinate expression per
// target coordinate.
struct ChartMap {
  Chart source;
  Chart target;
  std::vector<Expr> images;

  void validate() const;
};

Expr pull_back(const Expr& e, const ChartMap& f);
Form pull_back(const Form& a, const ChartMap& f);

}  // namespace mcontact
