#include "mcontact/lagrangian.hpp"

#include <sstream>

#include "mint.hpp"

namespace mcontact {

namespace {

Form coord_differential(const Chart& c, int idx) {
  Form f(c, 1);
  f.add_term({idx}, Expr::number(1));
  return f;
}

void require_velocity_chart(const Expr& L, const Chart& c) {
  std::vector<std::string> missing;
  if (c.n_fields() == 0) missing.push_back("Field");
  if (!c.has_velocities()) missing.push_back("Velocity");
  if (!c.has_contacts()) missing.push_back("Contact");
  if (!missing.empty()) {
    std::ostringstream os;
    os << "chart is missing roles:";
    for (const auto& r : missing) os << " " << r;
    throw StructureError(os.str());
  }
  for (SymbolId s : free_symbols(L)) {
    const std::string& name = symbol_name(s);
    if (c.index_of(s) < 0 && !c.param_symbols().count(name) && name != "pi")
      throw StructureError("Lagrangian depends on '" + name + "' which is not in the chart");
  }
}

}  // namespace

std::string to_string(Regularity r) {
  switch (r) {
    case Regularity::Regular: return "Regular";
    case Regularity::Singular: return "Singular";
    case Regularity::Unknown: return "Unknown";
  }
  return "?";
}

Expr lagrangian_energy(const Expr& L, const Chart& c) {
  require_velocity_chart(L, c);
  Expr e = Expr::mul({Expr::number(-1), L});
  for (int i = 0; i < c.n_fields(); ++i)
    for (int mu = 0; mu < c.m(); ++mu) {
      int v = c.velocity_coord(i, mu);
      e = e + differentiate(L, c.coord_symbol(v)) * c.coord_expr(v);
    }
  return simplify(e);
}

Form build_theta_L(const Expr& L, const Chart& c) {
  require_velocity_chart(L, c);
  Form theta = lagrangian_energy(L, c) * volume_form(c);
  for (int mu = 0; mu < c.m(); ++mu) {
    theta = theta + wedge(coord_differential(c, c.contact_coord(mu)), contracted_volume(c, mu));
    for (int i = 0; i < c.n_fields(); ++i) {
      Expr p = simplify(differentiate(L, c.coord_symbol(c.velocity_coord(i, mu))));
      theta = theta - p * wedge(coord_differential(c, c.field_coord(i)), contracted_volume(c, mu));
    }
  }
  return theta;
}

ExprMatrix velocity_hessian(const Expr& L, const Chart& c) {
  require_velocity_chart(L, c);
  const int n = c.n_fields(), m = c.m();
  ExprMatrix h(0, n * m);
  for (int i = 0; i < n; ++i)
    for (int mu = 0; mu < m; ++mu) {
      Expr first = differentiate(L, c.coord_symbol(c.velocity_coord(i, mu)));
      std::vector<Expr> row;
      for (int j = 0; j < n; ++j)
        for (int nu = 0; nu < m; ++nu)
          row.push_back(simplify(differentiate(first, c.coord_symbol(c.velocity_coord(j, nu)))));
      h.append_row(std::move(row));
    }
  return h;
}

RegularityReport regularity(const Expr& L, const Chart& c, const ProbeOptions& opts) {
  ExprMatrix h = velocity_hessian(L, c);
  RankResult r = rank(h, opts);
  RegularityReport rep;
  rep.dimension = h.cols();
  rep.rank = r.value;
  rep.certain = r.certain;
  if (!r.certain) {
    rep.verdict = Regularity::Unknown;
    rep.rank = numeric_rank(h, opts.seed);
  } else {
    rep.verdict = r.value == rep.dimension ? Regularity::Regular : Regularity::Singular;
  }
  return rep;
}

LagrangianSystem make_lagrangian_system(const Expr& L, const Chart& c,
                                        const ProbeOptions& opts) {
  LagrangianSystem sys;
  sys.chart = c;
  sys.density = simplify(L);
  sys.energy = lagrangian_energy(sys.density, c);
  sys.theta = build_theta_L(sys.density, c);
  sys.sigma = Form(c, 1);
  for (int mu = 0; mu < c.m(); ++mu) {
    Expr ds = simplify(differentiate(sys.density, c.coord_symbol(c.contact_coord(mu))));
    sys.sigma.add_term({c.base_coord(mu)}, Expr::number(-1) * ds);
  }
  sys.hessian = velocity_hessian(sys.density, c);
  RankResult r = rank(sys.hessian, opts);
  sys.regularity.dimension = sys.hessian.cols();
  sys.regularity.rank = r.value;
  sys.regularity.certain = r.certain;
  if (!r.certain) {
    sys.regularity.verdict = Regularity::Unknown;
    sys.regularity.rank = numeric_rank(sys.hessian, opts.seed);
  } else {
    sys.regularity.verdict =
        r.value == sys.regularity.dimension ? Regularity::Regular : Regularity::Singular;
  }
  return sys;
}

std::vector<VectorField> lagrangian_reeb(const LagrangianSystem& sys,
                                         const ProbeOptions& opts) {
  const Chart& c = sys.chart;
  const int n = c.n_fields(), m = c.m();
  if (sys.regularity.verdict != Regularity::Regular)
    throw StructureError("closed-form Reeb frame requires a regular velocity hessian");
  if (n * m > 8)
    throw StructureError("symbolic hessian inversion is limited to 8 velocity coordinates");
  std::vector<VectorField> reeb;
  for (int mu = 0; mu < m; ++mu) {
    Expr s_mu = c.coord_expr(c.contact_coord(mu));
    std::vector<Expr> rhs;
    for (int j = 0; j < n; ++j)
      for (int nu = 0; nu < m; ++nu) {
        Expr mixed = differentiate(
            differentiate(sys.density, c.coord_symbol(c.velocity_coord(j, nu))), s_mu.node().symbol);
        rhs.push_back(simplify(Expr::number(-1) * mixed));
      }
    LinearSolution sol = solve_linear(sys.hessian, rhs, opts);
    if (!sol.solvable || !sol.kernel.empty())
      throw StructureError("hessian solve failed despite a Regular verdict");
    VectorField r = VectorField::zero(c);
    r.components[c.contact_coord(mu)] = Expr::number(1);
    for (int i = 0; i < n; ++i)
      for (int nu = 0; nu < m; ++nu)
        r.components[c.velocity_coord(i, nu)] = sol.particular[i * m + nu];
    reeb.push_back(std::move(r));
  }
  return reeb;
}

EquationSet herglotz_el_equations(const Expr& L, const Chart& c) {
  require_velocity_chart(L, c);
  JetContext jets(c);
  EquationSet out;
  out.chart = c;
  Expr Ls = simplify(L);
  for (int i = 0; i < c.n_fields(); ++i) {
    Expr lhs = Expr::number(0);
    Expr rhs = differentiate(Ls, c.coord_symbol(c.field_coord(i)));
    for (int mu = 0; mu < c.m(); ++mu) {
      Expr p = simplify(differentiate(Ls, c.coord_symbol(c.velocity_coord(i, mu))));
      lhs = lhs + jets.total_derivative(p, mu);
      rhs = rhs + differentiate(Ls, c.coord_symbol(c.contact_coord(mu))) * p;
    }
    out.equations.push_back({"field " + c.coordinate(c.field_coord(i)).name,
                             simplify(lhs - rhs), EquationKind::Field});
  }
  Expr div = Expr::number(-1) * Ls;
  for (int mu = 0; mu < c.m(); ++mu)
    div = div + jets.first_jet(c.contact_coord(mu), mu);
  out.equations.push_back({"contact divergence", simplify(div), EquationKind::Divergence});
  return out;
}

SopdeSolution sopde_coefficients(const LagrangianSystem& sys, const ProbeOptions& opts) {
  const Chart& c = sys.chart;
  const int n = c.n_fields(), m = c.m();
  SopdeSolution out;
  out.equations.chart = c;

  // frame X_mu = d/dx^mu + xf d/dy + xa d/dv + xs d/ds with minted unknowns
  std::vector<std::vector<Expr>> xf(n, std::vector<Expr>(m, Expr::number(0)));
  std::vector<std::vector<std::vector<Expr>>> xa(
      n, std::vector<std::vector<Expr>>(m, std::vector<Expr>(m, Expr::number(0))));
  std::vector<std::vector<Expr>> xs(m, std::vector<Expr>(m, Expr::number(0)));
  std::vector<Expr> unknowns;
  for (int i = 0; i < n; ++i)
    for (int mu = 0; mu < m; ++mu) {
      const std::string& f = c.coordinate(c.field_coord(i)).name;
      const std::string& b = c.coordinate(c.base_coord(mu)).name;
      xf[i][mu] = mint_unknown(c, "xf_" + f + "_" + b);
      unknowns.push_back(xf[i][mu]);
    }
  std::vector<Expr> second_block;
  for (int i = 0; i < n; ++i)
    for (int nu = 0; nu < m; ++nu)
      for (int mu = 0; mu < m; ++mu) {
        const std::string& f = c.coordinate(c.field_coord(i)).name;
        xa[i][nu][mu] = mint_unknown(c, "xa_" + f + "_" +
                                            c.coordinate(c.base_coord(nu)).name + "_" +
                                            c.coordinate(c.base_coord(mu)).name);
        second_block.push_back(xa[i][nu][mu]);
      }
  for (int nu = 0; nu < m; ++nu)
    for (int mu = 0; mu < m; ++mu) {
      xs[nu][mu] = mint_unknown(c, "xs_" + c.coordinate(c.base_coord(nu)).name + "_" +
                                       c.coordinate(c.base_coord(mu)).name);
      second_block.push_back(xs[nu][mu]);
    }

  MultiVector frame;
  for (int mu = 0; mu < m; ++mu) {
    VectorField x = VectorField::zero(c);
    x.components[c.base_coord(mu)] = Expr::number(1);
    for (int i = 0; i < n; ++i) {
      x.components[c.field_coord(i)] = xf[i][mu];
      for (int nu = 0; nu < m; ++nu) x.components[c.velocity_coord(i, nu)] = xa[i][nu][mu];
    }
    for (int nu = 0; nu < m; ++nu) x.components[c.contact_coord(nu)] = xs[nu][mu];
    frame.factors.push_back(std::move(x));
  }

  Expr pairing = contract(sys.theta, frame).scalar_value();
  Form one_form = contract(dbar(sys.theta, sys.sigma), frame);

  out.equations.equations.push_back({"pairing", pairing, EquationKind::Constraint});
  for (const auto& [idx, coeff] : one_form.terms()) {
    const Coordinate& z = c.coordinate(idx.at(0));
    EquationKind kind = z.role == Role::Field ? EquationKind::Field
                                              : EquationKind::Compatibility;
    out.equations.equations.push_back({"component d" + z.name, coeff, kind});
  }

  if (sys.regularity.verdict != Regularity::Regular) {
    out.solved = false;
    out.notice = "velocity hessian is " + to_string(sys.regularity.verdict) + " (rank " +
                 std::to_string(sys.regularity.rank) + " of " +
                 std::to_string(sys.regularity.dimension) +
                 "); component equations returned unsolved";
    out.equations.notice = out.notice;
    return out;
  }

  // stage 1: the velocity-differential components force the field block
  std::vector<Expr> stage1;
  for (int j = 0; j < n; ++j)
    for (int nu = 0; nu < m; ++nu) {
      Expr row = one_form.coefficient({c.velocity_coord(j, nu)});
      for (const Expr& u : second_block)
        if (depends_on(row, u.node().symbol))
          throw StructureError("velocity components unexpectedly couple to the second block");
      stage1.push_back(std::move(row));
    }
  ExprMatrix a1(0, static_cast<int>(unknowns.size()));
  std::vector<Expr> b1;
  linearize(stage1, unknowns, a1, b1);
  for (Expr& e : b1) e = simplify(Expr::number(-1) * e);
  LinearSolution s1 = solve_linear(a1, b1, opts);
  if (!s1.solvable || !s1.kernel.empty())
    throw StructureError("semi-holonomy solve failed despite a Regular verdict");
  std::map<SymbolId, Expr> fixed;
  for (std::size_t k = 0; k < unknowns.size(); ++k) fixed[unknowns[k].node().symbol] = s1.particular[k];
  for (int i = 0; i < n; ++i)
    for (int mu = 0; mu < m; ++mu)
      out.field.push_back({symbol_name(xf[i][mu].node().symbol), s1.particular[i * m + mu]});

  // stage 2: with the field block substituted the rest is affine
  std::vector<Expr> stage2;
  stage2.push_back(simplify(substitute(pairing, fixed)));
  for (const auto& [idx, coeff] : one_form.terms()) {
    if (c.coordinate(idx.at(0)).role == Role::Velocity) continue;
    stage2.push_back(simplify(substitute(coeff, fixed)));
  }
  ExprMatrix a2(0, static_cast<int>(second_block.size()));
  std::vector<Expr> b2;
  linearize(stage2, second_block, a2, b2);
  for (Expr& e : b2) e = simplify(Expr::number(-1) * e);
  LinearSolution s2 = solve_linear(a2, b2, opts);
  if (!s2.solvable)
    throw StructureError("second-order coefficient solve failed despite a Regular verdict");

  // general solution keeps the kernel directions as named parameters
  std::vector<Expr> general = s2.particular;
  for (std::size_t k = 0; k < s2.kernel.size(); ++k) {
    Expr lambda = mint_unknown(c, "lambda" + std::to_string(k));
    out.free_parameters.push_back(
        {symbol_name(lambda.node().symbol), "kernel direction of the coefficient system"});
    for (std::size_t j = 0; j < general.size(); ++j)
      general[j] = simplify(general[j] + lambda * s2.kernel[k][j]);
  }
  std::size_t pos = 0;
  for (int i = 0; i < n; ++i)
    for (int nu = 0; nu < m; ++nu)
      for (int mu = 0; mu < m; ++mu)
        out.acceleration.push_back({symbol_name(xa[i][nu][mu].node().symbol), general[pos++]});
  for (int nu = 0; nu < m; ++nu)
    for (int mu = 0; mu < m; ++mu)
      out.contact.push_back({symbol_name(xs[nu][mu].node().symbol), general[pos++]});
  out.solved = true;
  out.equations.free_parameters = out.free_parameters;
  return out;
}

}  // namespace mcontact
