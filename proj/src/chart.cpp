#include "mcontact/chart.hpp"

#include <algorithm>
#include <cctype>

namespace mcontact {

struct Chart::Data {
  int m = 0;
  std::vector<Coordinate> coords;
  std::map<std::string, int> by_name;
  std::map<SymbolId, int> by_symbol;
  std::vector<int> base, fields, velocities, momenta, contacts;  // role indices
  std::set<std::string> params;
  std::map<std::string, int> param_functions;
  int n_fields = 0;
};

int Chart::m() const { return data_->m; }
int Chart::dim() const { return static_cast<int>(data_->coords.size()); }
int Chart::n_fields() const { return data_->n_fields; }
const std::vector<Coordinate>& Chart::coordinates() const { return data_->coords; }
const Coordinate& Chart::coordinate(int i) const { return data_->coords.at(i); }

int Chart::index_of(const std::string& name) const {
  auto it = data_->by_name.find(name);
  return it == data_->by_name.end() ? -1 : it->second;
}

int Chart::index_of(SymbolId sym) const {
  auto it = data_->by_symbol.find(sym);
  return it == data_->by_symbol.end() ? -1 : it->second;
}

int Chart::base_coord(int mu) const { return data_->base.at(mu); }
int Chart::field_coord(int i) const { return data_->fields.at(i); }

int Chart::velocity_coord(int i, int mu) const {
  if (data_->velocities.empty()) return -1;
  return data_->velocities.at(i * data_->m + mu);
}

int Chart::momentum_coord(int i, int mu) const {
  if (data_->momenta.empty()) return -1;
  return data_->momenta.at(i * data_->m + mu);
}

int Chart::contact_coord(int mu) const { return data_->contacts.at(mu); }

std::vector<int> Chart::indices_with_role(Role r) const {
  std::vector<int> out;
  for (int i = 0; i < dim(); ++i)
    if (data_->coords[i].role == r) out.push_back(i);
  return out;
}

std::vector<int> Chart::fiber_indices() const {
  std::vector<int> out;
  for (int i = 0; i < dim(); ++i)
    if (data_->coords[i].role != Role::Base) out.push_back(i);
  return out;
}

bool Chart::has_velocities() const { return !data_->velocities.empty(); }
bool Chart::has_momenta() const { return !data_->momenta.empty(); }
bool Chart::has_contacts() const { return !data_->contacts.empty(); }

const std::set<std::string>& Chart::param_symbols() const { return data_->params; }
const std::map<std::string, int>& Chart::param_functions() const {
  return data_->param_functions;
}

ParseContext Chart::parse_context() const {
  auto data = data_;
  ParseContext ctx;
  ctx.is_symbol = [data](const std::string& s) {
    return s == "pi" || data->by_name.count(s) > 0 || data->params.count(s) > 0;
  };
  ctx.function_arity = [data](const std::string& s) {
    auto it = data->param_functions.find(s);
    return it == data->param_functions.end() ? -1 : it->second;
  };
  return ctx;
}

namespace {
bool valid_identifier(const std::string& s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return true;
}
}  // namespace

Chart ChartBuilder::build() const {
  if (m < 1) throw StructureError("chart needs at least one base coordinate");
  if (static_cast<int>(base.size()) != m)
    throw StructureError("base coordinate names must match the base dimension");
  auto data = std::make_shared<Chart::Data>();
  data->m = m;
  data->params = params;
  data->param_functions = param_functions;
  data->n_fields = static_cast<int>(fields.size());

  auto add = [&](const std::string& name, Role role, int fi, int bi) {
    if (!valid_identifier(name))
      throw StructureError("invalid coordinate name '" + name + "'");
    if (name == "pi" || is_elementary_function(name))
      throw StructureError("coordinate name '" + name + "' is reserved");
    if (params.count(name) || param_functions.count(name))
      throw StructureError("coordinate name '" + name + "' collides with a parameter");
    if (data->by_name.count(name))
      throw StructureError("duplicate coordinate name '" + name + "'");
    int idx = static_cast<int>(data->coords.size());
    Coordinate c{name, intern_symbol(name), role, fi, bi};
    data->by_name.emplace(name, idx);
    data->by_symbol.emplace(c.symbol, idx);
    data->coords.push_back(std::move(c));
    return idx;
  };

  for (int mu = 0; mu < m; ++mu) data->base.push_back(add(base[mu], Role::Base, -1, mu));
  int n = data->n_fields;
  for (int i = 0; i < n; ++i) data->fields.push_back(add(fields[i], Role::Field, i, -1));
  if (with_velocities) {
    std::vector<std::string> names = velocities;
    if (names.empty())
      for (int i = 0; i < n; ++i)
        for (int mu = 0; mu < m; ++mu) names.push_back(fields[i] + "_" + base[mu]);
    if (static_cast<int>(names.size()) != n * m)
      throw StructureError("expected one velocity name per field and base direction");
    for (int i = 0; i < n; ++i)
      for (int mu = 0; mu < m; ++mu)
        data->velocities.push_back(add(names[i * m + mu], Role::Velocity, i, mu));
  }
  if (with_momenta) {
    std::vector<std::string> names = momenta;
    if (names.empty()) {
      for (int i = 0; i < n; ++i)
        for (int mu = 0; mu < m; ++mu) {
          if (n == 1 && m == 1)
            names.push_back("p");
          else if (n == 1)
            names.push_back("p_" + base[mu]);
          else
            names.push_back("p_" + fields[i] + "_" + base[mu]);
        }
    }
    if (static_cast<int>(names.size()) != n * m)
      throw StructureError("expected one momentum name per field and base direction");
    for (int i = 0; i < n; ++i)
      for (int mu = 0; mu < m; ++mu)
        data->momenta.push_back(add(names[i * m + mu], Role::Momentum, i, mu));
  }
  for (std::size_t i = 0; i < generic.size(); ++i)
    add(generic[i], Role::Generic, static_cast<int>(i), -1);
  for (std::size_t i = 0; i < gauge.size(); ++i)
    add(gauge[i], Role::Gauge, static_cast<int>(i), -1);
  if (with_contacts) {
    std::vector<std::string> names = contacts;
    if (names.empty()) {
      if (m == 1)
        names.push_back("s");
      else
        for (int mu = 0; mu < m; ++mu) names.push_back("s_" + base[mu]);
    }
    if (static_cast<int>(names.size()) != m)
      throw StructureError("expected one contact name per base direction");
    for (int mu = 0; mu < m; ++mu)
      data->contacts.push_back(add(names[mu], Role::Contact, -1, mu));
  }

  Chart chart;
  chart.data_ = std::move(data);
  return chart;
}

Chart make_lagrangian_chart(int m, std::vector<std::string> base,
                            std::vector<std::string> fields, std::set<std::string> params,
                            std::map<std::string, int> param_functions) {
  ChartBuilder b;
  b.m = m;
  b.base = std::move(base);
  b.fields = std::move(fields);
  b.with_velocities = true;
  b.with_contacts = true;
  b.params = std::move(params);
  b.param_functions = std::move(param_functions);
  return b.build();
}

Chart make_hamiltonian_chart(int m, std::vector<std::string> base,
                             std::vector<std::string> fields, std::set<std::string> params,
                             std::map<std::string, int> param_functions) {
  ChartBuilder b;
  b.m = m;
  b.base = std::move(base);
  b.fields = std::move(fields);
  b.with_momenta = true;
  b.with_contacts = true;
  b.params = std::move(params);
  b.param_functions = std::move(param_functions);
  return b.build();
}

Chart make_adapted_chart(int m, std::vector<std::string> base,
                         std::vector<std::string> generic, std::vector<std::string> gauge,
                         std::set<std::string> params,
                         std::map<std::string, int> param_functions) {
  ChartBuilder b;
  b.m = m;
  b.base = std::move(base);
  b.generic = std::move(generic);
  b.gauge = std::move(gauge);
  b.with_contacts = true;
  b.params = std::move(params);
  b.param_functions = std::move(param_functions);
  return b.build();
}

// ---------------------------------------------------------------------------
// jets
// ---------------------------------------------------------------------------

JetContext::JetContext(Chart chart) : chart_(std::move(chart)) {
  const int m = chart_.m();
  fiber_ = chart_.fiber_indices();
  for (std::size_t f = 0; f < fiber_.size(); ++f)
    fiber_of_symbol_.emplace(chart_.coord_symbol(fiber_[f]), static_cast<int>(f));

  auto mint = [&](const std::string& name) {
    if (chart_.has(name))
      throw StructureError("jet symbol '" + name + "' collides with a chart coordinate");
    SymbolId id = intern_symbol(name);
    jet_symbols_.insert(id);
    return id;
  };

  // second jets of fields, symmetric in the two base indices
  second_.resize(chart_.n_fields());
  for (int i = 0; i < chart_.n_fields(); ++i) {
    second_[i].assign(m * m, 0);
    for (int mu = 0; mu < m; ++mu)
      for (int nu = mu; nu < m; ++nu) {
        const std::string name = chart_.coordinate(chart_.field_coord(i)).name + "_" +
                                 chart_.coordinate(chart_.base_coord(mu)).name +
                                 chart_.coordinate(chart_.base_coord(nu)).name;
        SymbolId id = mint(name);
        second_[i][mu * m + nu] = id;
        second_[i][nu * m + mu] = id;
      }
  }

  first_.assign(fiber_.size() * m, 0);
  for (std::size_t f = 0; f < fiber_.size(); ++f) {
    const Coordinate& c = chart_.coordinate(fiber_[f]);
    for (int mu = 0; mu < m; ++mu) {
      SymbolId id;
      if (c.role == Role::Field && chart_.has_velocities()) {
        id = chart_.coord_symbol(chart_.velocity_coord(c.field_index, mu));
      } else if (c.role == Role::Velocity) {
        id = second_[c.field_index][c.base_index * m + mu];
      } else {
        id = mint(c.name + "_" + chart_.coordinate(chart_.base_coord(mu)).name);
      }
      first_[f * m + mu] = id;
    }
  }
}

Expr JetContext::first_jet(int coord_index, int mu) const {
  auto it = fiber_of_symbol_.find(chart_.coord_symbol(coord_index));
  if (it == fiber_of_symbol_.end())
    throw StructureError("first jets exist only for fiber coordinates");
  return Expr::symbol(first_[it->second * chart_.m() + mu]);
}

Expr JetContext::second_jet(int field, int mu, int nu) const {
  return Expr::symbol(second_.at(field).at(mu * chart_.m() + nu));
}

bool JetContext::is_jet_symbol(SymbolId s) const { return jet_symbols_.count(s) > 0; }

Expr JetContext::total_derivative(const Expr& e, int mu) const {
  std::vector<Expr> parts;
  parts.push_back(differentiate(e, chart_.coord_symbol(chart_.base_coord(mu))));
  for (std::size_t f = 0; f < fiber_.size(); ++f) {
    SymbolId z = chart_.coord_symbol(fiber_[f]);
    if (!depends_on(e, z)) continue;
    parts.push_back(Expr::symbol(first_[f * chart_.m() + mu]) * differentiate(e, z));
  }
  return simplify(Expr::add(std::move(parts)));
}

ParseContext JetContext::parse_context() const {
  ParseContext base = chart_.parse_context();
  auto jets = std::make_shared<std::set<std::string>>();
  for (SymbolId id : jet_symbols_) jets->insert(symbol_name(id));
  ParseContext ctx;
  ctx.function_arity = base.function_arity;
  auto base_is_symbol = base.is_symbol;
  ctx.is_symbol = [jets, base_is_symbol](const std::string& s) {
    return jets->count(s) > 0 || base_is_symbol(s);
  };
  return ctx;
}

}  // namespace mcontact
