#include <doctest.h>

#include <cmath>

#include "mcontact/hamiltonian.hpp"

using namespace mcontact;

namespace {

Chart oscillator_chart() { return make_lagrangian_chart(1, {"t"}, {"q"}, {"gamma"}); }

Expr oscillator_L(const Chart& c) { return c.parse("q_t^2/2 - q^2/2 - gamma*s"); }

Chart string_chart() {
  return make_lagrangian_chart(2, {"t", "x"}, {"u"}, {"rho", "tau"}, {{"gamma", 1}});
}

Expr string_L(const Chart& c) { return c.parse("rho*u_t^2/2 - tau*u_x^2/2 - gamma(t)*s_t"); }

}  // namespace

TEST_CASE("momentum chart mirrors the velocity chart") {
  Chart lc = string_chart();
  Chart hc = momentum_chart(lc);
  CHECK(hc.m() == 2);
  CHECK(hc.n_fields() == 1);
  CHECK(hc.has("p_t"));
  CHECK(hc.has("p_x"));
  CHECK(hc.has("s_t"));
  CHECK_FALSE(hc.has("u_t"));
  CHECK_FALSE(hc.has_velocities());
  CHECK(hc.param_symbols().count("rho") == 1);
  CHECK(hc.param_functions().count("gamma") == 1);
}

TEST_CASE("fiber derivative of the string Lagrangian") {
  Chart lc = string_chart();
  Chart hc = momentum_chart(lc);
  ChartMap fl = legendre_map(string_L(lc), lc, hc);
  CHECK(is_zero(fl.images[hc.index_of("p_t")] - lc.parse("rho*u_t")) == ZeroTest::Zero);
  CHECK(is_zero(fl.images[hc.index_of("p_x")] + lc.parse("tau*u_x")) == ZeroTest::Zero);
  CHECK(is_zero(fl.images[hc.index_of("u")] - lc.parse("u")) == ZeroTest::Zero);
  CHECK(is_zero(fl.images[hc.index_of("s_x")] - lc.parse("s_x")) == ZeroTest::Zero);
}

TEST_CASE("velocity-contact products map the momenta onto the contacts") {
  Chart lc = make_lagrangian_chart(2, {"t", "x"}, {"u"});
  ChartMap fl = legendre_map(lc.parse("u_t*s_t + u_x*s_x"), lc);
  const Chart& hc = fl.target;
  CHECK(is_zero(fl.images[hc.index_of("p_t")] - lc.parse("s_t")) == ZeroTest::Zero);
  CHECK(is_zero(fl.images[hc.index_of("p_x")] - lc.parse("s_x")) == ZeroTest::Zero);
}

TEST_CASE("free quadratic Lagrangian has the identity fiber derivative") {
  Chart lc = make_lagrangian_chart(1, {"t"}, {"q"});
  ChartMap fl = legendre_map(lc.parse("q_t^2/2"), lc);
  CHECK(is_zero(fl.images[fl.target.index_of("p")] - lc.parse("q_t")) == ZeroTest::Zero);

  LegendreInverse inv = invert_legendre(lc.parse("q_t^2/2"), lc);
  REQUIRE(inv.closed_form);
  CHECK(is_zero(inv.inverse.images[lc.index_of("q_t")] -
                Expr::symbol(inv.target.coord_symbol(inv.target.index_of("p")))) ==
        ZeroTest::Zero);
}

TEST_CASE("closed-form inverse of the string fiber derivative") {
  Chart lc = string_chart();
  LegendreInverse inv = invert_legendre(string_L(lc), lc);
  REQUIRE(inv.closed_form);
  const Chart& hc = inv.target;
  CHECK(is_zero(inv.inverse.images[lc.index_of("u_t")] - hc.parse("p_t/rho")) ==
        ZeroTest::Zero);
  CHECK(is_zero(inv.inverse.images[lc.index_of("u_x")] + hc.parse("p_x/tau")) ==
        ZeroTest::Zero);
}

TEST_CASE("transcendental Lagrangians fall back to Newton") {
  Chart lc = make_lagrangian_chart(1, {"t"}, {"q"});
  LegendreInverse inv = invert_legendre(lc.parse("cosh(q_t)"), lc);
  CHECK_FALSE(inv.closed_form);

  // sinh(v) = 1 has the solution asinh(1)
  std::map<SymbolId, double> point{{inv.target.coord_symbol(inv.target.index_of("p")), 1.0}};
  std::vector<double> v = inv.velocities(point);
  REQUIRE(v.size() == 1);
  CHECK(std::abs(v[0] - std::asinh(1.0)) < 1e-9);
  CHECK(std::abs(v[0] - 0.881374) < 1e-6);

  // p v - L at the solved point
  double h = inv.hamiltonian_value(point);
  CHECK(std::abs(h - (std::asinh(1.0) - std::cosh(std::asinh(1.0)))) < 1e-9);
}

TEST_CASE("Newton reports its last iterate when the jacobian degenerates") {
  Chart lc = make_lagrangian_chart(1, {"t"}, {"q"});
  LegendreInverse inv = invert_legendre(lc.parse("q_t^4/4"), lc);
  CHECK_FALSE(inv.closed_form);
  std::map<SymbolId, double> point{{inv.target.coord_symbol(inv.target.index_of("p")), 1.0}};
  try {
    inv.velocities(point);  // starts at v = 0 where the hessian 3v^2 vanishes
    FAIL("expected a NewtonFailure");
  } catch (const NewtonFailure& e) {
    REQUIRE(e.last_iterate.size() == 1);
    CHECK(e.last_iterate[0] == 0.0);
    CHECK(e.residual == 1.0);
  }
  // a better start converges to the root of v^3 = 1
  std::vector<double> v = inv.velocities(point, {}, {2.0});
  CHECK(std::abs(v[0] - 1.0) < 1e-9);
}

TEST_CASE("Hamiltonian of the damped oscillator") {
  Chart lc = oscillator_chart();
  HamiltonianSystem sys = hamiltonian_from_lagrangian(oscillator_L(lc), lc);
  CHECK(is_zero(sys.density - sys.chart.parse("p^2/2 + q^2/2 + gamma*s")) == ZeroTest::Zero);
  CHECK(form_is_zero(sys.sigma - parse_form("gamma*dt", sys.chart)) == ZeroTest::Zero);
}

TEST_CASE("Hamiltonian of the damped string pulls its structure form back") {
  Chart lc = string_chart();
  HamiltonianSystem sys = hamiltonian_from_lagrangian(string_L(lc), lc);
  const Chart& hc = sys.chart;
  CHECK(is_zero(sys.density - hc.parse("p_t^2/(2*rho) - p_x^2/(2*tau) + gamma(t)*s_t")) ==
        ZeroTest::Zero);

  LagrangianSystem lsys = make_lagrangian_system(string_L(lc), lc);
  ChartMap fl = legendre_map(lsys.density, lc, hc);
  CHECK(form_is_zero(pull_back(sys.theta, fl) - lsys.theta) == ZeroTest::Zero);
  CHECK(form_is_zero(sys.sigma - parse_form("gamma(t)*dt", hc)) == ZeroTest::Zero);
}

TEST_CASE("free quadratic Lagrangian gives the free Hamiltonian") {
  Chart lc = make_lagrangian_chart(2, {"t", "x"}, {"u"});
  HamiltonianSystem sys = hamiltonian_from_lagrangian(lc.parse("u_t^2/2 + u_x^2/2"), lc);
  CHECK(is_zero(sys.density - sys.chart.parse("p_t^2/2 + p_x^2/2")) == ZeroTest::Zero);
}

TEST_CASE("singular Lagrangians are refused with a diagnostic") {
  Chart lc = make_lagrangian_chart(1, {"t"}, {"q"});
  Expr L = lc.parse("q_t*s");
  try {
    hamiltonian_from_lagrangian(L, lc);
    FAIL("expected a StructureError");
  } catch (const StructureError& e) {
    CHECK(std::string(e.what()).find("Singular") != std::string::npos);
  }
  CHECK_THROWS_AS(invert_legendre(L, lc), StructureError);
}

TEST_CASE("theta matches the Darboux expression and classifies as multicontact") {
  Chart lc = string_chart();
  HamiltonianSystem sys = hamiltonian_from_lagrangian(string_L(lc), lc);
  Form expected = parse_form(
      "ds_t^dx + dt^ds_x - p_t*du^dx - p_x*dt^du"
      " + (p_t^2/(2*rho) - p_x^2/(2*tau) + gamma(t)*s_t)*dt^dx",
      sys.chart);
  CHECK(form_is_zero(sys.theta - expected) == ZeroTest::Zero);

  Classification cl = classify(sys.theta);
  CHECK(cl.kind == StructureKind::Multicontact);
  DissipationResult d = dissipation_form(sys.theta, cl);
  CHECK(d.verified == ZeroTest::Zero);
  CHECK(form_is_zero(d.sigma - sys.sigma) == ZeroTest::Zero);
}

TEST_CASE("first-order equations of the string Hamiltonian") {
  Chart lc = string_chart();
  HamiltonianSystem sys = hamiltonian_from_lagrangian(string_L(lc), lc);
  EquationSet eqs = hdw_equations(sys.density, sys.chart);
  JetContext jets(sys.chart);
  REQUIRE(eqs.equations.size() == 4);
  CHECK(is_zero(eqs.equations[0].residual - jets.parse("u_t - p_t/rho")) == ZeroTest::Zero);
  CHECK(is_zero(eqs.equations[1].residual - jets.parse("u_x + p_x/tau")) == ZeroTest::Zero);
  CHECK(is_zero(eqs.equations[2].residual -
                jets.parse("p_t_t + p_x_x + gamma(t)*p_t")) == ZeroTest::Zero);
  CHECK(is_zero(eqs.equations[3].residual -
                jets.parse("s_t_t + s_x_x - p_t^2/(2*rho) + p_x^2/(2*tau) + gamma(t)*s_t")) ==
        ZeroTest::Zero);
}

TEST_CASE("contact-free Hamiltonians recover the undamped equations") {
  Chart hc = make_hamiltonian_chart(1, {"t"}, {"q"}, {}, {{"V", 1}});
  EquationSet eqs = hdw_equations(hc.parse("p^2/2 + V(q)"), hc);
  JetContext jets(hc);
  REQUIRE(eqs.equations.size() == 3);
  CHECK(is_zero(eqs.equations[0].residual - jets.parse("q_t - p")) == ZeroTest::Zero);
  CHECK(is_zero(eqs.equations[1].residual - jets.parse("p_t + V'(q)")) == ZeroTest::Zero);
  CHECK(is_zero(eqs.equations[2].residual - jets.parse("s_t - p^2/2 + V(q)")) ==
        ZeroTest::Zero);
}

TEST_CASE("first-order equations pull back to the second-order ones") {
  Chart lc = string_chart();
  Chart hc = momentum_chart(lc);
  Expr L = string_L(lc);
  HamiltonianSystem sys = hamiltonian_from_lagrangian(L, lc, hc);
  ChartMap fl = legendre_map(L, lc, hc);
  JetContext lj(lc), hj(hc);

  EquationSet first = hdw_equations(sys.density, hc);
  EquationSet second = herglotz_el_equations(L, lc);

  // the field gradients become the identities of the prolongation
  CHECK(is_zero(pull_back_jet_residual(first.equations[0].residual, fl, lj, hj)) ==
        ZeroTest::Zero);
  CHECK(is_zero(pull_back_jet_residual(first.equations[1].residual, fl, lj, hj)) ==
        ZeroTest::Zero);
  // momentum divergence becomes the second-order field equation
  CHECK(is_zero(pull_back_jet_residual(first.equations[2].residual, fl, lj, hj) -
                second.equations[0].residual) == ZeroTest::Zero);
  // the contact divergences agree on the nose
  CHECK(is_zero(pull_back_jet_residual(first.equations[3].residual, fl, lj, hj) -
                second.equations[1].residual) == ZeroTest::Zero);
}

TEST_CASE("evolution field of the damped oscillator") {
  Chart lc = oscillator_chart();
  HamiltonianSystem sys = hamiltonian_from_lagrangian(oscillator_L(lc), lc);
  const Chart& hc = sys.chart;
  VectorField x = cocontact_vector_field(sys.density, hc);
  CHECK(is_zero(x.component(hc.index_of("t")) - Expr::number(1)) == ZeroTest::Zero);
  CHECK(is_zero(x.component(hc.index_of("q")) - hc.parse("p")) == ZeroTest::Zero);
  CHECK(is_zero(x.component(hc.index_of("p")) + hc.parse("q + gamma*p")) == ZeroTest::Zero);
  CHECK(is_zero(x.component(hc.index_of("s")) -
                hc.parse("p^2/2 - q^2/2 - gamma*s")) == ZeroTest::Zero);
}

TEST_CASE("trivial evolution fields") {
  Chart hc = make_hamiltonian_chart(1, {"t"}, {"q"}, {}, {{"f", 1}});
  VectorField x = cocontact_vector_field(hc.parse("f(t)"), hc);
  CHECK(is_zero(x.component(hc.index_of("q"))) == ZeroTest::Zero);
  CHECK(is_zero(x.component(hc.index_of("p"))) == ZeroTest::Zero);
  CHECK(is_zero(x.component(hc.index_of("s")) + hc.parse("f(t)")) == ZeroTest::Zero);

  VectorField y = cocontact_vector_field(hc.parse("p^2/2"), hc);
  CHECK(is_zero(y.component(hc.index_of("q")) - hc.parse("p")) == ZeroTest::Zero);
  CHECK(is_zero(y.component(hc.index_of("s")) - hc.parse("p^2/2")) == ZeroTest::Zero);
}

TEST_CASE("opaque Hamiltonians satisfy the defining contractions") {
  Chart hc = make_hamiltonian_chart(1, {"t"}, {"q"}, {}, {{"h", 4}});
  Expr H = hc.parse("h(t,q,p,s)");
  VectorField x = cocontact_vector_field(H, hc);
  VectorField solved = cocontact_vector_field_solved(H, hc);
  VectorField diff = x + Expr::number(-1) * solved;
  CHECK(vector_field_is_zero(diff) == ZeroTest::Zero);

  Form tau = parse_form("dt", hc);
  Form eta = parse_form("ds - p*dq", hc);
  CHECK(is_zero(contract(tau, x).scalar_value() - Expr::number(1)) == ZeroTest::Zero);
  CHECK(is_zero(contract(eta, x).scalar_value() + H) == ZeroTest::Zero);

  Expr hs = differentiate(H, hc.coord_symbol(hc.index_of("s")));
  Expr ht = differentiate(H, hc.coord_symbol(hc.index_of("t")));
  Form lhs = contract(exterior_derivative(eta), x);
  Form rhs = exterior_derivative(Form::scalar(hc, H)) - hs * eta - ht * tau;
  CHECK(form_is_zero(lhs - rhs) == ZeroTest::Zero);
}
