#include "mcontact/hamiltonian.hpp"

#include <cmath>
#include <sstream>

#include "mint.hpp"

namespace mcontact {

namespace {

Form coord_differential(const Chart& c, int idx) {
  Form f(c, 1);
  f.add_term({idx}, Expr::number(1));
  return f;
}

void require_momentum_chart(const Expr& H, const Chart& c) {
  if (!c.has_contacts())
    throw StructureError("chart is missing roles: Contact");
  if (c.n_fields() > 0 && !c.has_momenta())
    throw StructureError("chart is missing roles: Momentum");
  for (SymbolId s : free_symbols(H)) {
    const std::string& name = symbol_name(s);
    if (c.index_of(s) < 0 && !c.param_symbols().count(name) && name != "pi")
      throw StructureError("Hamiltonian depends on '" + name + "' which is not in the chart");
  }
}

// base, field and contact coordinates must agree by name so that the two
// charts share symbols and maps between them stay substitution-free there
void require_momentum_partner(const Chart& source, const Chart& target) {
  if (!source.has_velocities())
    throw StructureError("Legendre source chart carries no velocity coordinates");
  if (target.m() != source.m() || target.n_fields() != source.n_fields())
    throw StructureError("momentum chart does not match the velocity chart's shape");
  auto same = [&](int a, int b, const char* what) {
    if (source.coordinate(a).name != target.coordinate(b).name)
      throw StructureError(std::string("momentum chart renames a ") + what +
                           " coordinate; shared coordinates must keep their names");
  };
  for (int mu = 0; mu < source.m(); ++mu) {
    same(source.base_coord(mu), target.base_coord(mu), "base");
    same(source.contact_coord(mu), target.contact_coord(mu), "contact");
  }
  for (int i = 0; i < source.n_fields(); ++i)
    same(source.field_coord(i), target.field_coord(i), "field");
  if (source.n_fields() > 0 && !target.has_momenta())
    throw StructureError("momentum chart carries no momentum coordinates");
}

}  // namespace

Form build_theta_H(const Expr& H, const Chart& c) {
  require_momentum_chart(H, c);
  Form theta = simplify(H) * volume_form(c);
  for (int mu = 0; mu < c.m(); ++mu) {
    theta = theta + wedge(coord_differential(c, c.contact_coord(mu)), contracted_volume(c, mu));
    for (int i = 0; i < c.n_fields(); ++i)
      theta = theta - c.coord_expr(c.momentum_coord(i, mu)) *
                          wedge(coord_differential(c, c.field_coord(i)),
                                contracted_volume(c, mu));
  }
  return theta;
}

HamiltonianSystem make_hamiltonian_system(const Expr& H, const Chart& c) {
  HamiltonianSystem sys;
  sys.chart = c;
  sys.density = simplify(H);
  sys.theta = build_theta_H(sys.density, c);
  sys.sigma = Form(c, 1);
  for (int mu = 0; mu < c.m(); ++mu) {
    Expr ds = simplify(differentiate(sys.density, c.coord_symbol(c.contact_coord(mu))));
    sys.sigma.add_term({c.base_coord(mu)}, ds);
  }
  return sys;
}

Chart momentum_chart(const Chart& v) {
  if (!v.has_velocities() || !v.has_contacts())
    throw StructureError("momentum partner needs a chart with velocities and contacts");
  ChartBuilder b;
  b.m = v.m();
  for (int mu = 0; mu < v.m(); ++mu) b.base.push_back(v.coordinate(v.base_coord(mu)).name);
  for (int i = 0; i < v.n_fields(); ++i)
    b.fields.push_back(v.coordinate(v.field_coord(i)).name);
  for (int mu = 0; mu < v.m(); ++mu)
    b.contacts.push_back(v.coordinate(v.contact_coord(mu)).name);
  b.with_momenta = true;
  b.with_contacts = true;
  b.params = v.param_symbols();
  b.param_functions = v.param_functions();
  return b.build();
}

ChartMap legendre_map(const Expr& L, const Chart& source, const Chart& target) {
  require_momentum_partner(source, target);
  ChartMap fl;
  fl.source = source;
  fl.target = target;
  Expr Ls = simplify(L);
  for (int j = 0; j < target.dim(); ++j) {
    const Coordinate& tc = target.coordinate(j);
    if (tc.role == Role::Momentum) {
      int v = source.velocity_coord(tc.field_index, tc.base_index);
      fl.images.push_back(simplify(differentiate(Ls, source.coord_symbol(v))));
    } else {
      int idx = source.index_of(tc.name);
      if (idx < 0)
        throw StructureError("momentum chart coordinate '" + tc.name +
                             "' has no source counterpart");
      fl.images.push_back(source.coord_expr(idx));
    }
  }
  fl.validate();
  return fl;
}

ChartMap legendre_map(const Expr& L, const Chart& source) {
  return legendre_map(L, source, momentum_chart(source));
}

LegendreInverse invert_legendre(const Expr& L, const Chart& source, const Chart& target,
                                const ProbeOptions& opts) {
  require_momentum_partner(source, target);
  LegendreInverse inv;
  inv.source = source;
  inv.target = target;
  inv.density = simplify(L);

  RegularityReport reg = regularity(inv.density, source, opts);
  if (reg.verdict == Regularity::Singular)
    throw StructureError("Legendre inverse requires a regular velocity hessian (rank " +
                         std::to_string(reg.rank) + " of " + std::to_string(reg.dimension) +
                         ")");

  const int n = source.n_fields(), m = source.m();
  std::vector<Expr> vels;
  for (int i = 0; i < n; ++i)
    for (int mu = 0; mu < m; ++mu) {
      vels.push_back(source.coord_expr(source.velocity_coord(i, mu)));
      inv.momentum_rows.push_back(
          simplify(differentiate(inv.density, source.coord_symbol(source.velocity_coord(i, mu)))));
    }
  inv.hessian = velocity_hessian(inv.density, source);

  bool quadratic = true;
  for (int r = 0; r < inv.hessian.rows() && quadratic; ++r)
    for (int c = 0; c < inv.hessian.cols() && quadratic; ++c)
      for (const Expr& v : vels)
        if (depends_on(inv.hessian.at(r, c), v.node().symbol)) {
          quadratic = false;
          break;
        }
  if (!quadratic) return inv;

  ExprMatrix a(0, n * m);
  std::vector<Expr> b;
  linearize(inv.momentum_rows, vels, a, b);
  std::vector<Expr> rhs;
  for (int i = 0; i < n; ++i)
    for (int mu = 0; mu < m; ++mu) {
      Expr p = target.coord_expr(target.momentum_coord(i, mu));
      rhs.push_back(simplify(p - b[static_cast<std::size_t>(i) * m + mu]));
    }
  LinearSolution sol = solve_linear(a, rhs, opts);
  if (!sol.solvable || !sol.kernel.empty() || !sol.certain) return inv;

  inv.closed_form = true;
  inv.inverse.source = target;
  inv.inverse.target = source;
  for (int j = 0; j < source.dim(); ++j) {
    const Coordinate& sc = source.coordinate(j);
    if (sc.role == Role::Velocity) {
      inv.inverse.images.push_back(sol.particular[static_cast<std::size_t>(sc.field_index) * m +
                                                  sc.base_index]);
    } else {
      int idx = target.index_of(sc.name);
      if (idx < 0)
        throw StructureError("velocity chart coordinate '" + sc.name +
                             "' has no momentum-chart counterpart");
      inv.inverse.images.push_back(target.coord_expr(idx));
    }
  }
  inv.inverse.validate();
  return inv;
}

LegendreInverse invert_legendre(const Expr& L, const Chart& source, const ProbeOptions& opts) {
  return invert_legendre(L, source, momentum_chart(source), opts);
}

std::vector<double> LegendreInverse::velocities(const std::map<SymbolId, double>& point,
                                                const ParamTable& params,
                                                std::vector<double> initial) const {
  const int n = source.n_fields(), m = source.m();
  const int N = n * m;
  std::vector<double> pvals(N);
  for (int i = 0; i < n; ++i)
    for (int mu = 0; mu < m; ++mu) {
      SymbolId p = target.coord_symbol(target.momentum_coord(i, mu));
      auto it = point.find(p);
      if (it == point.end())
        throw EvalError("Legendre inverse point does not bind momentum '" +
                        symbol_name(p) + "'");
      pvals[static_cast<std::size_t>(i) * m + mu] = it->second;
    }

  std::vector<double> v = initial.empty() ? std::vector<double>(N, 0.0) : std::move(initial);
  if (static_cast<int>(v.size()) != N)
    throw EvalError("initial iterate has the wrong dimension");

  std::map<SymbolId, double> bind = point;
  double resnorm = 0;
  for (int iter = 0; iter <= max_iterations; ++iter) {
    for (int k = 0; k < N; ++k)
      bind[source.coord_symbol(source.velocity_coord(k / m, k % m))] = v[k];
    std::vector<double> f(N);
    resnorm = 0;
    for (int k = 0; k < N; ++k) {
      f[k] = evaluate(momentum_rows[k], bind, params) - pvals[k];
      resnorm = std::max(resnorm, std::abs(f[k]));
    }
    if (resnorm <= tolerance) return v;
    if (iter == max_iterations) break;

    // dense Newton step with partial pivoting
    std::vector<std::vector<double>> j(N, std::vector<double>(N + 1));
    for (int r = 0; r < N; ++r) {
      for (int c = 0; c < N; ++c) j[r][c] = evaluate(hessian.at(r, c), bind, params);
      j[r][N] = f[r];
    }
    for (int col = 0; col < N; ++col) {
      int piv = col;
      for (int r = col + 1; r < N; ++r)
        if (std::abs(j[r][col]) > std::abs(j[piv][col])) piv = r;
      if (std::abs(j[piv][col]) < 1e-14)
        throw NewtonFailure("singular jacobian in the Legendre Newton solve", v, resnorm);
      std::swap(j[col], j[piv]);
      for (int r = 0; r < N; ++r) {
        if (r == col) continue;
        double fac = j[r][col] / j[col][col];
        if (fac == 0) continue;
        for (int c = col; c <= N; ++c) j[r][c] -= fac * j[col][c];
      }
    }
    for (int k = 0; k < N; ++k) v[k] -= j[k][N] / j[k][k];
    for (double x : v)
      if (!std::isfinite(x))
        throw NewtonFailure("Legendre Newton solve left the finite domain", v, resnorm);
  }
  throw NewtonFailure("Legendre Newton solve did not converge", v, resnorm);
}

double LegendreInverse::hamiltonian_value(const std::map<SymbolId, double>& point,
                                          const ParamTable& params) const {
  const int n = source.n_fields(), m = source.m();
  std::vector<double> v = velocities(point, params);
  std::map<SymbolId, double> bind = point;
  double pv = 0;
  for (int i = 0; i < n; ++i)
    for (int mu = 0; mu < m; ++mu) {
      int k = i * m + mu;
      bind[source.coord_symbol(source.velocity_coord(i, mu))] = v[k];
      pv += point.at(target.coord_symbol(target.momentum_coord(i, mu))) * v[k];
    }
  return pv - evaluate(density, bind, params);
}

HamiltonianSystem hamiltonian_from_lagrangian(const Expr& L, const Chart& source,
                                              const Chart& target, const ProbeOptions& opts) {
  LagrangianSystem lsys = make_lagrangian_system(L, source, opts);
  if (lsys.regularity.verdict != Regularity::Regular) {
    std::ostringstream os;
    os << "Hamiltonian construction needs a Regular Lagrangian; the velocity hessian is "
       << to_string(lsys.regularity.verdict) << " (rank " << lsys.regularity.rank << " of "
       << lsys.regularity.dimension << ")";
    throw StructureError(os.str());
  }
  LegendreInverse inv = invert_legendre(lsys.density, source, target, opts);
  if (!inv.closed_form)
    throw StructureError(
        "no closed-form Legendre inverse: the Lagrangian is not quadratic in the "
        "velocities; evaluate the Hamiltonian through the numeric inverse instead");

  Expr H = Expr::number(0);
  const int m = source.m();
  for (int i = 0; i < source.n_fields(); ++i)
    for (int mu = 0; mu < m; ++mu)
      H = H + target.coord_expr(target.momentum_coord(i, mu)) *
                  inv.inverse.images[source.velocity_coord(i, mu)];
  H = simplify(H - pull_back(lsys.density, inv.inverse));

  HamiltonianSystem hsys = make_hamiltonian_system(H, target);
  ChartMap fl = legendre_map(lsys.density, source, target);
  if (form_is_zero(pull_back(hsys.theta, fl) - lsys.theta, opts) == ZeroTest::NonZero)
    throw StructureError(
        "pull-back of the momentum-side structure form disagrees with the velocity side");
  return hsys;
}

HamiltonianSystem hamiltonian_from_lagrangian(const Expr& L, const Chart& source,
                                              const ProbeOptions& opts) {
  return hamiltonian_from_lagrangian(L, source, momentum_chart(source), opts);
}

EquationSet hdw_equations(const Expr& H, const Chart& c) {
  require_momentum_chart(H, c);
  JetContext jets(c);
  EquationSet out;
  out.chart = c;
  Expr Hs = simplify(H);

  std::vector<Expr> contact_partials;
  for (int mu = 0; mu < c.m(); ++mu)
    contact_partials.push_back(
        simplify(differentiate(Hs, c.coord_symbol(c.contact_coord(mu)))));

  for (int i = 0; i < c.n_fields(); ++i) {
    const std::string& y = c.coordinate(c.field_coord(i)).name;
    for (int mu = 0; mu < c.m(); ++mu) {
      Expr hp = differentiate(Hs, c.coord_symbol(c.momentum_coord(i, mu)));
      out.equations.push_back({"field " + y + " " + c.coordinate(c.base_coord(mu)).name,
                               simplify(jets.first_jet(c.field_coord(i), mu) - hp),
                               EquationKind::Field});
    }
  }
  for (int i = 0; i < c.n_fields(); ++i) {
    const std::string& y = c.coordinate(c.field_coord(i)).name;
    Expr r = differentiate(Hs, c.coord_symbol(c.field_coord(i)));
    for (int mu = 0; mu < c.m(); ++mu) {
      r = r + jets.first_jet(c.momentum_coord(i, mu), mu);
      r = r + c.coord_expr(c.momentum_coord(i, mu)) * contact_partials[mu];
    }
    out.equations.push_back({"momentum " + y, simplify(r), EquationKind::Divergence});
  }
  Expr div = Hs;
  for (int mu = 0; mu < c.m(); ++mu) {
    div = div + jets.first_jet(c.contact_coord(mu), mu);
    for (int i = 0; i < c.n_fields(); ++i) {
      Expr p = c.coord_expr(c.momentum_coord(i, mu));
      div = div - p * differentiate(Hs, p.node().symbol);
    }
  }
  out.equations.push_back({"contact divergence", simplify(div), EquationKind::Divergence});
  return out;
}

Expr pull_back_jet_residual(const Expr& residual, const ChartMap& fl,
                            const JetContext& source_jets,
                            const JetContext& target_jets) {
  const Chart& t = fl.target;
  std::map<SymbolId, Expr> sub;
  for (int j = 0; j < t.dim(); ++j) {
    sub[t.coord_symbol(j)] = fl.images[j];
    if (t.coordinate(j).role == Role::Base) continue;
    for (int mu = 0; mu < t.m(); ++mu) {
      Expr jet = target_jets.first_jet(j, mu);
      if (jet.kind() == ExprKind::Symbol)
        sub[jet.node().symbol] = source_jets.total_derivative(fl.images[j], mu);
    }
  }
  return simplify(substitute(residual, sub));
}

namespace {

void require_cocontact_chart(const Expr& H, const Chart& c) {
  require_momentum_chart(H, c);
  if (c.m() != 1)
    throw StructureError("the cocontact evolution field exists only over one base dimension");
}

}  // namespace

VectorField cocontact_vector_field_solved(const Expr& H, const Chart& c,
                                          const ProbeOptions& opts) {
  require_cocontact_chart(H, c);
  HamiltonianSystem sys = make_hamiltonian_system(H, c);

  std::vector<int> fiber = c.fiber_indices();
  std::vector<Expr> unknowns;
  VectorField x = VectorField::zero(c);
  x.components[c.base_coord(0)] = Expr::number(1);
  for (int idx : fiber) {
    Expr u = mint_unknown(c, "X_" + c.coordinate(idx).name);
    x.components[idx] = u;
    unknowns.push_back(u);
  }

  MultiVector frame;
  frame.factors.push_back(x);
  std::vector<Expr> rows;
  rows.push_back(contract(sys.theta, frame).scalar_value());
  Form of = contract(dbar(sys.theta, sys.sigma), frame);
  for (const auto& [idx, coeff] : of.terms()) rows.push_back(coeff);

  ExprMatrix a(0, static_cast<int>(unknowns.size()));
  std::vector<Expr> b;
  linearize(rows, unknowns, a, b);
  for (Expr& e : b) e = simplify(Expr::number(-1) * e);
  LinearSolution sol = solve_linear(a, b, opts);
  if (!sol.solvable || !sol.kernel.empty())
    throw StructureError("the frame equations did not determine a unique evolution field");

  VectorField out = VectorField::zero(c);
  out.components[c.base_coord(0)] = Expr::number(1);
  for (std::size_t k = 0; k < fiber.size(); ++k) out.components[fiber[k]] = sol.particular[k];
  return out;
}

VectorField cocontact_vector_field(const Expr& H, const Chart& c, const ProbeOptions& opts) {
  require_cocontact_chart(H, c);
  Expr Hs = simplify(H);
  Expr hs = differentiate(Hs, c.coord_symbol(c.contact_coord(0)));

  VectorField x = VectorField::zero(c);
  x.components[c.base_coord(0)] = Expr::number(1);
  Expr sdot = Expr::number(-1) * Hs;
  for (int i = 0; i < c.n_fields(); ++i) {
    Expr p = c.coord_expr(c.momentum_coord(i, 0));
    Expr hp = simplify(differentiate(Hs, p.node().symbol));
    x.components[c.field_coord(i)] = hp;
    x.components[c.momentum_coord(i, 0)] =
        simplify(Expr::number(-1) *
                 (differentiate(Hs, c.coord_symbol(c.field_coord(i))) + p * hs));
    sdot = sdot + p * hp;
  }
  x.components[c.contact_coord(0)] = simplify(sdot);

  VectorField solved = cocontact_vector_field_solved(Hs, c, opts);
  for (int i = 0; i < c.dim(); ++i)
    if (equal_test(x.components[i], solved.components[i], opts) == ZeroTest::NonZero)
      throw StructureError("closed-form evolution field disagrees with the frame equations");
  return x;
}

}  // namespace mcontact
