#include "mcontact/section.hpp"

#include <utility>

namespace mcontact {

Expr Section::value(int index) const {
  auto it = values.find(index);
  if (it == values.end())
    throw StructureError("section has no value for coordinate '" +
                         chart.coordinate(index).name + "'");
  return it->second;
}

void Section::validate() const {
  for (int i : chart.fiber_indices()) {
    Expr v = value(i);
    for (int j : chart.fiber_indices())
      if (depends_on(v, chart.coord_symbol(j)))
        throw StructureError("section value for '" + chart.coordinate(i).name +
                             "' depends on fiber coordinate '" +
                             chart.coordinate(j).name + "'");
  }
  for (const auto& [idx, v] : values)
    if (chart.coordinate(idx).role == Role::Base)
      throw StructureError("section assigns a value to base coordinate '" +
                           chart.coordinate(idx).name + "'");
}

Section prolong_section(const Chart& chart, const std::map<int, Expr>& field_values,
                        const std::map<int, Expr>& other_values) {
  Section s{chart, other_values};
  for (const auto& [idx, v] : field_values) {
    if (chart.coordinate(idx).role != Role::Field)
      throw StructureError("prolong_section: '" + chart.coordinate(idx).name +
                           "' is not a field coordinate");
    s.values[idx] = v;
    if (!chart.has_velocities()) continue;
    int i = chart.coordinate(idx).field_index;
    for (int mu = 0; mu < chart.m(); ++mu)
      s.values[chart.velocity_coord(i, mu)] =
          simplify(differentiate(v, chart.coord_symbol(chart.base_coord(mu))));
  }
  s.validate();
  return s;
}

VectorField section_tangent(const Section& s, int mu) {
  VectorField x = VectorField::coordinate(s.chart, s.chart.base_coord(mu));
  SymbolId xmu = s.chart.coord_symbol(s.chart.base_coord(mu));
  for (int a : s.chart.fiber_indices())
    x.components[a] = simplify(differentiate(s.value(a), xmu));
  return x;
}

MultiVector section_tangent_frame(const Section& s) {
  MultiVector mv;
  for (int mu = 0; mu < s.chart.m(); ++mu) mv.factors.push_back(section_tangent(s, mu));
  return mv;
}

VectorField prolongation_field(const JetContext& jets, int mu) {
  const Chart& c = jets.chart();
  VectorField x = VectorField::coordinate(c, c.base_coord(mu));
  for (int a : c.fiber_indices()) x.components[a] = jets.first_jet(a, mu);
  return x;
}

MultiVector prolongation_frame(const JetContext& jets) {
  MultiVector mv;
  for (int mu = 0; mu < jets.chart().m(); ++mu)
    mv.factors.push_back(prolongation_field(jets, mu));
  return mv;
}

std::map<SymbolId, Expr> section_jet_values(const JetContext& jets, const Section& s) {
  const Chart& c = jets.chart();
  std::map<SymbolId, Expr> out;
  for (int a : c.fiber_indices()) {
    Expr v = s.value(a);
    out[c.coord_symbol(a)] = v;
    for (int mu = 0; mu < c.m(); ++mu) {
      Expr dv = simplify(differentiate(v, c.coord_symbol(c.base_coord(mu))));
      const Expr jet = jets.first_jet(a, mu);
      if (jet.kind() == ExprKind::Symbol) out[jet.node().symbol] = dv;
    }
  }
  // second jets of fields; entries above may already cover them through
  // velocity first jets, the direct values win on conflicts by being equal
  for (int i = 0; i < c.n_fields(); ++i) {
    Expr v = s.value(c.field_coord(i));
    for (int mu = 0; mu < c.m(); ++mu)
      for (int nu = mu; nu < c.m(); ++nu) {
        Expr dd = simplify(differentiate(differentiate(v, c.coord_symbol(c.base_coord(mu))),
                                         c.coord_symbol(c.base_coord(nu))));
        out[jets.second_jet(i, mu, nu).node().symbol] = dd;
      }
  }
  return out;
}

Form pull_back(const Form& a, const Section& s) {
  if (!a.chart().same_as(s.chart))
    throw StructureError("pull back: form and section live on different charts");
  const Chart& c = s.chart;
  std::map<SymbolId, Expr> subst;
  for (int i : c.fiber_indices()) subst[c.coord_symbol(i)] = s.value(i);

  Form r(c, a.degree());
  for (const auto& [idx, coeff] : a.terms()) {
    Expr base_coeff = substitute(coeff, subst);
    // expand each fiber differential into base differentials
    std::vector<std::pair<std::vector<int>, Expr>> partial;
    partial.emplace_back(std::vector<int>{}, base_coeff);
    for (int index : idx) {
      std::vector<std::pair<std::vector<int>, Expr>> next;
      if (c.coordinate(index).role == Role::Base) {
        for (auto& [ids, cf] : partial) {
          ids.push_back(index);
          next.emplace_back(std::move(ids), std::move(cf));
        }
      } else {
        Expr v = s.value(index);
        for (int mu = 0; mu < c.m(); ++mu) {
          Expr dv = simplify(differentiate(v, c.coord_symbol(c.base_coord(mu))));
          if (dv.is_zero_literal()) continue;
          for (const auto& [ids, cf] : partial) {
            std::vector<int> ext = ids;
            ext.push_back(c.base_coord(mu));
            next.emplace_back(std::move(ext), cf * dv);
          }
        }
      }
      partial = std::move(next);
    }
    for (auto& [ids, cf] : partial) r.add_term(std::move(ids), std::move(cf));
  }
  return r;
}

void ChartMap::validate() const {
  if (static_cast<int>(images.size()) != target.dim())
    throw StructureError("chart map needs one image per target coordinate");
  for (const Expr& im : images)
    for (SymbolId sym : free_symbols(im))
      if (source.index_of(sym) < 0 && source.param_symbols().count(symbol_name(sym)) == 0 &&
          symbol_name(sym) != "pi")
        throw StructureError("chart map image uses unknown symbol '" +
                             symbol_name(sym) + "'");
}

Expr pull_back(const Expr& e, const ChartMap& f) {
  std::map<SymbolId, Expr> subst;
  for (int i = 0; i < f.target.dim(); ++i) subst[f.target.coord_symbol(i)] = f.images[i];
  return simplify(substitute(e, subst));
}

Form pull_back(const Form& a, const ChartMap& f) {
  if (!a.chart().same_as(f.target))
    throw StructureError("pull back: form does not live on the map's target chart");
  std::map<SymbolId, Expr> subst;
  for (int i = 0; i < f.target.dim(); ++i) subst[f.target.coord_symbol(i)] = f.images[i];

  // d(image) of every target coordinate as a 1-form on the source chart
  std::vector<Form> dim_forms;
  dim_forms.reserve(f.target.dim());
  for (int i = 0; i < f.target.dim(); ++i) {
    Form d(f.source, 1);
    for (int j = 0; j < f.source.dim(); ++j) {
      Expr dj = simplify(differentiate(f.images[i], f.source.coord_symbol(j)));
      if (!dj.is_zero_literal()) d.add_term({j}, dj);
    }
    dim_forms.push_back(std::move(d));
  }

  Form r(f.source, a.degree());
  for (const auto& [idx, coeff] : a.terms()) {
    Form acc = Form::scalar(f.source, substitute(coeff, subst));
    for (int index : idx) acc = wedge(acc, dim_forms[index]);
    for (const auto& [ids, cf] : acc.terms()) r.add_term(ids, cf);
  }
  return r;
}

}  // namespace mcontact
