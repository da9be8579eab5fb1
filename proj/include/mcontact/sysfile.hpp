#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>

#include "mcontact/simulate.hpp"

namespace mcontact {

// malformed system file (unreadable, bad syntax, unparseable expressions)
struct SystemFileError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SimulationBlock {
  double t_end = 1;
  double dt = 0;
  int points = 0;  // grid size, two-dimensional base only
  double x0 = 0;
  double length = 1;
  Boundary bc = Boundary::Periodic;
  int stride = 1;
  std::map<std::string, Expr> initial;  // coordinate name -> expression in base coords
};

// Parsed system description: a chart, one density (Lagrangian or Hamiltonian),
// numeric parameter values, and an optional simulation block.
struct SystemFile {
  std::string name;
  Chart velocity_chart;
  Chart chart;  // velocity_chart for Lagrangian entries, its momentum partner otherwise
  bool is_hamiltonian = false;
  Expr density;  // parsed against `chart`
  std::map<std::string, double> param_values;
  ParamTable params;                          // opaque functions with numeric bodies
  std::set<std::string> declared_functions;   // opaque functions left abstract

  bool has_simulation = false;
  SimulationBlock sim;
};

SystemFile parse_system(const std::string& text, const std::string& display_name);
SystemFile load_system(const std::string& path);

}  // namespace mcontact
