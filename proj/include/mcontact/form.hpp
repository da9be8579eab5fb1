#pragma once

#include <map>
#include <string>
#include <vector>

#include "mcontact/chart.hpp"
#include "mcontact/expr.hpp"

namespace mcontact {

struct VectorField {
  Chart chart;
  std::vector<Expr> components;  // one per chart coordinate

  static VectorField zero(const Chart& c);
  static VectorField coordinate(const Chart& c, int index);  // d/dz^index
  Expr component(int i) const { return components.at(i); }
  bool vertical() const;  // no base components (structurally)
};

VectorField operator+(const VectorField& a, const VectorField& b);
VectorField operator*(const Expr& f, const VectorField& x);

// Exterior form with sparse terms: strictly increasing chart-index tuples.
class Form {
 public:
  Form() = default;
  Form(Chart chart, int degree);
  static Form scalar(Chart chart, Expr value);

  int degree() const { return degree_; }
  const Chart& chart() const { return chart_; }
  const std::map<std::vector<int>, Expr>& terms() const { return terms_; }

  // accumulate a term given arbitrary index order; repeated indices vanish
  void add_term(std::vector<int> indices, Expr coeff);
  Expr coefficient(const std::vector<int>& indices) const;  // zero if absent
  Expr scalar_value() const;  // degree-0 coefficient

  bool structurally_zero() const { return terms_.empty(); }

 private:
  Chart chart_;
  int degree_ = 0;
  std::map<std::vector<int>, Expr> terms_;
};

Form operator+(const Form& a, const Form& b);
Form operator-(const Form& a, const Form& b);
Form operator-(const Form& a);
Form operator*(const Expr& f, const Form& a);

Form wedge(const Form& a, const Form& b);
Form exterior_derivative(const Form& a);
Form contract(const Form& a, const VectorField& x);

// Decomposable multivector X_1 ^ ... ^ X_k; contraction applies i(X_1) first:
// i(X_1 ^ ... ^ X_k) w = i(X_k) ... i(X_1) w.
struct MultiVector {
  std::vector<VectorField> factors;
  int degree() const { return static_cast<int>(factors.size()); }
};

Form contract(const Form& a, const MultiVector& x);

VectorField lie_bracket(const VectorField& x, const VectorField& y);

// twisted differential: d a + sigma ^ a
Form dbar(const Form& a, const Form& sigma);

Form volume_form(const Chart& c);                       // dx^0 ^ ... ^ dx^{m-1}
Form contracted_volume(const Chart& c, int mu);         // i(d/dx^mu) of the above

// semantic zero test over every coefficient
ZeroTest form_is_zero(const Form& a, const ProbeOptions& opts = {});
ZeroTest vector_field_is_zero(const VectorField& x, const ProbeOptions& opts = {});

std::string to_string(const Form& a);
std::string to_string(const VectorField& x);
Form parse_form(const std::string& text, const Chart& chart);

}  // namespace mcontact
