#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "mcontact/expr.hpp"

namespace mcontact {

enum class Role { Base, Field, Velocity, Momentum, Contact, Gauge, Generic };

struct Coordinate {
  std::string name;
  SymbolId symbol;
  Role role;
  int field_index = -1;  // Field/Velocity/Momentum: field number; Generic/Gauge: position
  int base_index = -1;   // Velocity/Momentum/Contact: base direction
};

// Immutable coordinate chart handle (cheap to copy, shared identity).
class Chart {
 public:
  Chart() = default;

  int m() const;
  int dim() const;
  int n_fields() const;
  const std::vector<Coordinate>& coordinates() const;
  const Coordinate& coordinate(int i) const;
  int index_of(const std::string& name) const;  // -1 when absent
  int index_of(SymbolId sym) const;
  bool has(const std::string& name) const { return index_of(name) >= 0; }

  int base_coord(int mu) const;  // chart index of the mu-th base coordinate
  int field_coord(int i) const;
  int velocity_coord(int i, int mu) const;  // -1 when the chart carries none
  int momentum_coord(int i, int mu) const;
  int contact_coord(int mu) const;
  std::vector<int> indices_with_role(Role r) const;
  std::vector<int> fiber_indices() const;
  bool has_velocities() const;
  bool has_momenta() const;
  bool has_contacts() const;

  const std::set<std::string>& param_symbols() const;
  const std::map<std::string, int>& param_functions() const;  // name -> arity

  Expr coord_expr(int i) const { return Expr::symbol(coordinate(i).symbol); }
  SymbolId coord_symbol(int i) const { return coordinate(i).symbol; }

  ParseContext parse_context() const;
  Expr parse(const std::string& text) const { return parse_expr(text, parse_context()); }

  bool same_as(const Chart& other) const { return data_ == other.data_; }
  explicit operator bool() const { return data_ != nullptr; }

 private:
  friend struct ChartBuilder;
  struct Data;
  std::shared_ptr<const Data> data_;
};

struct ChartBuilder {
  int m = 0;
  std::vector<std::string> base;
  std::vector<std::string> fields;
  std::vector<std::string> velocities;  // field-major (i*m + mu); empty -> "<field>_<base>"
  std::vector<std::string> momenta;     // field-major; empty -> default scheme
  std::vector<std::string> contacts;    // empty -> "s" (m==1) or "s_<base>"
  std::vector<std::string> generic;     // adapted-chart u coordinates
  std::vector<std::string> gauge;       // adapted-chart w coordinates
  bool with_velocities = false;
  bool with_momenta = false;
  bool with_contacts = false;
  std::set<std::string> params;                  // scalar parameter symbols
  std::map<std::string, int> param_functions;    // opaque function name -> arity

  Chart build() const;  // throws StructureError on inconsistent input
};

Chart make_lagrangian_chart(int m, std::vector<std::string> base,
                            std::vector<std::string> fields,
                            std::set<std::string> params = {},
                            std::map<std::string, int> param_functions = {});

Chart make_hamiltonian_chart(int m, std::vector<std::string> base,
                             std::vector<std::string> fields,
                             std::set<std::string> params = {},
                             std::map<std::string, int> param_functions = {});

Chart make_adapted_chart(int m, std::vector<std::string> base,
                         std::vector<std::string> generic,
                         std::vector<std::string> gauge = {},
                         std::set<std::string> params = {},
                         std::map<std::string, int> param_functions = {});

// First/second jet symbols of a chart's fiber coordinates, minted once.
// In charts with velocity coordinates the first jet of a field IS the matching
// velocity coordinate and the first jet of a velocity is the (symmetric)
// second-jet symbol of its field.
class JetContext {
 public:
  explicit JetContext(Chart chart);

  const Chart& chart() const { return chart_; }
  Expr first_jet(int coord_index, int mu) const;   // d z^A / d x^mu
  Expr second_jet(int field, int mu, int nu) const;
  bool is_jet_symbol(SymbolId s) const;

  // total derivative along x^mu: d/dx^mu + sum_A (first jet) d/dz^A
  Expr total_derivative(const Expr& e, int mu) const;

  ParseContext parse_context() const;  // chart names plus jet symbols
  Expr parse(const std::string& text) const { return parse_expr(text, parse_context()); }

 private:
  Chart chart_;
  std::vector<SymbolId> first_;                 // fiber-major [fiber][mu]
  std::vector<std::vector<SymbolId>> second_;   // [field][mu*m+nu]
  std::vector<int> fiber_;                      // fiber chart indices
  std::map<SymbolId, int> fiber_of_symbol_;
  std::set<SymbolId> jet_symbols_;
};

}  // namespace mcontact
