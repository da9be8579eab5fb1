#include <doctest.h>

#include <set>
#include <string>
#include <vector>

#include "mcontact/chart.hpp"
#include "mcontact/form.hpp"

using namespace mcontact;

namespace {

Expr num(long n) { return Expr::integer(n); }

void check_same_form(const Form& a, const Form& b) {
  REQUIRE(a.degree() == b.degree());
  CHECK(form_is_zero(a - b) == ZeroTest::Zero);
}

}  // namespace

TEST_CASE("lagrangian chart coordinates and default names") {
  Chart c = make_lagrangian_chart(1, {"t"}, {"q"}, {"gamma"});
  CHECK(c.m() == 1);
  CHECK(c.dim() == 4);
  CHECK(c.n_fields() == 1);
  CHECK(c.coordinate(c.base_coord(0)).name == "t");
  CHECK(c.coordinate(c.field_coord(0)).name == "q");
  CHECK(c.coordinate(c.velocity_coord(0, 0)).name == "q_t");
  CHECK(c.coordinate(c.contact_coord(0)).name == "s");
  CHECK(c.has_velocities());
  CHECK_FALSE(c.has_momenta());
  CHECK(c.index_of("q_t") == c.velocity_coord(0, 0));
  CHECK(c.index_of("nope") == -1);

  Expr L = c.parse("q_t^2/2 - q^2/2 - gamma*s");
  CHECK(to_string(simplify(differentiate(L, "q_t"))) == "q_t");
}

TEST_CASE("hamiltonian chart default momentum names") {
  Chart one = make_hamiltonian_chart(1, {"t"}, {"q"});
  CHECK(one.coordinate(one.momentum_coord(0, 0)).name == "p");

  Chart field = make_hamiltonian_chart(2, {"t", "x"}, {"u"});
  CHECK(field.dim() == 7);
  CHECK(field.coordinate(field.momentum_coord(0, 0)).name == "p_t");
  CHECK(field.coordinate(field.momentum_coord(0, 1)).name == "p_x");
  CHECK(field.coordinate(field.contact_coord(0)).name == "s_t");
  CHECK(field.coordinate(field.contact_coord(1)).name == "s_x");

  Chart two = make_hamiltonian_chart(1, {"t"}, {"q1", "q2"});
  CHECK(two.coordinate(two.momentum_coord(0, 0)).name == "p_q1_t");
  CHECK(two.coordinate(two.momentum_coord(1, 0)).name == "p_q2_t");
}

TEST_CASE("chart rejects reserved and colliding names") {
  CHECK_THROWS_AS(make_lagrangian_chart(1, {"t"}, {"pi"}), StructureError);
  CHECK_THROWS_AS(make_lagrangian_chart(1, {"t"}, {"sin"}), StructureError);
  CHECK_THROWS_AS(make_lagrangian_chart(1, {"t"}, {"t"}), StructureError);
  CHECK_THROWS_AS(make_lagrangian_chart(1, {"t"}, {"q"}, {"q"}), StructureError);
  CHECK_THROWS_AS(make_lagrangian_chart(1, {"t"}, {"2bad"}), StructureError);

  ChartBuilder b;
  b.m = 1;
  b.base = {"t"};
  b.fields = {"q", "q"};
  CHECK_THROWS_AS(b.build(), StructureError);
}

TEST_CASE("jet symbols reuse velocities and stay symmetric") {
  Chart c = make_lagrangian_chart(2, {"t", "x"}, {"u"});
  JetContext jets(c);

  CHECK(to_string(jets.first_jet(c.field_coord(0), 0)) == "u_t");
  CHECK(to_string(jets.first_jet(c.field_coord(0), 1)) == "u_x");
  CHECK(to_string(jets.first_jet(c.velocity_coord(0, 0), 1)) == "u_tx");
  CHECK(to_string(jets.first_jet(c.velocity_coord(0, 1), 0)) == "u_tx");
  CHECK(to_string(jets.second_jet(0, 1, 1)) == "u_xx");
  CHECK(structurally_equal(jets.second_jet(0, 0, 1), jets.second_jet(0, 1, 0)));
  CHECK(to_string(jets.first_jet(c.contact_coord(0), 1)) == "s_t_x");

  // jet symbols parse under the extended context but not under the bare chart
  CHECK_NOTHROW(jets.parse("u_tx + u_xx"));
  CHECK_THROWS_AS(c.parse("u_tx"), ParseError);
}

TEST_CASE("total derivative follows the chain rule through jets") {
  Chart c = make_lagrangian_chart(2, {"t", "x"}, {"u"});
  JetContext jets(c);
  Expr e = c.parse("u * u_x");
  Expr dx = jets.total_derivative(e, 1);
  Expr expected = jets.parse("u_x^2 + u * u_xx");
  CHECK(structurally_equal(simplify(dx - expected), num(0)));

  // base dependence enters through the plain partial
  Chart c1 = make_lagrangian_chart(1, {"t"}, {"q"});
  JetContext j1(c1);
  Expr d = j1.total_derivative(c1.parse("t * q"), 0);
  CHECK(structurally_equal(simplify(d - j1.parse("q + t * q_t")), num(0)));
}

TEST_CASE("hamiltonian jets mint fresh momentum derivatives") {
  Chart c = make_hamiltonian_chart(1, {"t"}, {"q"});
  JetContext jets(c);
  CHECK(to_string(jets.first_jet(c.index_of("p"), 0)) == "p_t");
  CHECK(to_string(jets.first_jet(c.index_of("q"), 0)) == "q_t");
  CHECK(to_string(jets.first_jet(c.index_of("s"), 0)) == "s_t");
}

TEST_CASE("interior product sign fixtures") {
  Chart c = make_adapted_chart(2, {"x0", "x1"}, {"u"});
  Form vol = volume_form(c);

  VectorField d0 = VectorField::coordinate(c, c.base_coord(0));
  VectorField d1 = VectorField::coordinate(c, c.base_coord(1));

  // i(d1)(dx0 ^ dx1) = -dx0
  Form c1 = contract(vol, d1);
  CHECK(c1.degree() == 1);
  CHECK(structurally_equal(c1.coefficient({c.base_coord(0)}), num(-1)));
  CHECK(structurally_equal(c1.coefficient({c.base_coord(1)}), num(0)));

  // i(d0)(dx0 ^ dx1) = dx1
  Form c0 = contract(vol, d0);
  CHECK(structurally_equal(c0.coefficient({c.base_coord(1)}), num(1)));

  // pairing applies the first factor first: i(d0 ^ d1) vol = i(d1) i(d0) vol = 1
  Form paired = contract(vol, MultiVector{{d0, d1}});
  CHECK(paired.degree() == 0);
  CHECK(structurally_equal(paired.scalar_value(), num(1)));
  Form swapped = contract(vol, MultiVector{{d1, d0}});
  CHECK(structurally_equal(swapped.scalar_value(), num(-1)));
}

TEST_CASE("contracted volume complements recover the volume form") {
  for (int m : {2, 3}) {
    std::vector<std::string> base;
    for (int mu = 0; mu < m; ++mu) base.push_back("x" + std::to_string(mu));
    Chart c = make_adapted_chart(m, base, {"u"});
    Form vol = volume_form(c);
    for (int mu = 0; mu < m; ++mu) {
      Form dxmu(c, 1);
      dxmu.add_term({c.base_coord(mu)}, num(1));
      check_same_form(wedge(dxmu, contracted_volume(c, mu)), vol);
    }
  }
  // explicit m=3 fixture: i(d1)(dx0^dx1^dx2) = -dx0^dx2
  Chart c3 = make_adapted_chart(3, {"x0", "x1", "x2"}, {"u"});
  Form w = contracted_volume(c3, 1);
  CHECK(structurally_equal(w.coefficient({c3.base_coord(0), c3.base_coord(2)}), num(-1)));
  CHECK(w.terms().size() == 1);
}

TEST_CASE("wedge is graded anticommutative and nilpotent on repeats") {
  Chart c = make_adapted_chart(2, {"x0", "x1"}, {"u", "v"});
  Form a = parse_form("u * dx0 + v * dx1", c);
  Form b = parse_form("x1 * dx0 - u * du", c);
  check_same_form(wedge(a, b), -wedge(b, a));
  CHECK(wedge(a, a).structurally_zero());

  Form f = Form::scalar(c, c.parse("u*v"));
  Form g = Form::scalar(c, c.parse("x0"));
  // scalars commute
  check_same_form(wedge(f, g), wedge(g, f));
  // mixed degree: scalar times 1-form
  check_same_form(wedge(f, a), wedge(a, f));
}

TEST_CASE("exterior derivative squares to zero") {
  Chart c = make_adapted_chart(3, {"x0", "x1", "x2"}, {"u"});
  Form f = Form::scalar(c, c.parse("sin(x0) * x1^2 * u + exp(x2)"));
  Form df = exterior_derivative(f);
  CHECK(exterior_derivative(df).structurally_zero());

  Form a = parse_form("u * x2 * dx0 + x0^2 * dx1 + sin(x1) * du", c);
  CHECK(exterior_derivative(exterior_derivative(a)).structurally_zero());
}

TEST_CASE("exterior derivative orientation fixture") {
  Chart c = make_adapted_chart(2, {"x0", "x1"}, {"u"});
  // d(x1 dx0) = dx1 ^ dx0 = -dx0 ^ dx1
  Form a = parse_form("x1 * dx0", c);
  Form da = exterior_derivative(a);
  CHECK(structurally_equal(da.coefficient({c.base_coord(0), c.base_coord(1)}), num(-1)));
}

TEST_CASE("contraction is an antiderivation") {
  Chart c = make_adapted_chart(2, {"x0", "x1"}, {"u", "v"});
  VectorField x = VectorField::zero(c);
  x.components[c.base_coord(0)] = c.parse("u");
  x.components[c.index_of("v")] = c.parse("x1");

  Form alpha = parse_form("v * dx0 + x0 * du", c);      // degree 1
  Form beta = parse_form("u * dx1 - x1 * dv", c);       // degree 1
  Form lhs = contract(wedge(alpha, beta), x);
  Form rhs = wedge(contract(alpha, x), beta) - wedge(alpha, contract(beta, x));
  check_same_form(lhs, rhs);

  Form gamma = parse_form("x0 * dx0^dx1 + u * dx1^dv", c);  // degree 2
  Form lhs2 = contract(wedge(gamma, beta), x);
  Form rhs2 = wedge(contract(gamma, x), beta) + wedge(gamma, contract(beta, x));
  check_same_form(lhs2, rhs2);
}

TEST_CASE("lie bracket fixtures") {
  Chart c = make_adapted_chart(1, {"x0"}, {"u"});
  VectorField dx = VectorField::coordinate(c, c.base_coord(0));
  VectorField xdu = VectorField::zero(c);
  xdu.components[c.index_of("u")] = c.parse("x0");

  // [d/dx0, x0 d/du] = d/du
  VectorField br = lie_bracket(dx, xdu);
  CHECK(structurally_equal(br.components[c.index_of("u")], num(1)));
  CHECK(structurally_equal(br.components[c.base_coord(0)], num(0)));
  CHECK(vector_field_is_zero(lie_bracket(xdu, xdu)) == ZeroTest::Zero);

  // bracket is antisymmetric
  VectorField sum = lie_bracket(dx, xdu) + lie_bracket(xdu, dx);
  CHECK(vector_field_is_zero(sum) == ZeroTest::Zero);

  // scaling rule: [X, fY] = f[X, Y] + (Xf) Y
  Chart c2 = make_adapted_chart(2, {"x0", "x1"}, {"u"});
  VectorField a = VectorField::zero(c2);
  a.components[c2.base_coord(0)] = c2.parse("x1");
  a.components[c2.index_of("u")] = c2.parse("sin(x0)");
  VectorField b = VectorField::zero(c2);
  b.components[c2.base_coord(1)] = c2.parse("u");
  Expr f = c2.parse("x0 * u");
  VectorField lhs = lie_bracket(a, f * b);
  Expr xf = Expr::integer(0);
  for (int i = 0; i < c2.dim(); ++i)
    xf = xf + a.components[i] * differentiate(f, c2.coord_symbol(i));
  VectorField rhs = f * lie_bracket(a, b) + simplify(xf) * b;
  for (int i = 0; i < c2.dim(); ++i)
    CHECK(is_zero(lhs.components[i] - rhs.components[i]) == ZeroTest::Zero);
}

TEST_CASE("twisted differential squares to curvature multiplication") {
  Chart c = make_adapted_chart(2, {"x0", "x1"}, {"u"});
  Form sigma = parse_form("x1 * dx0 + u * dx1", c);  // deliberately non-closed

  Form f = Form::scalar(c, c.parse("x0 * u + sin(x1)"));
  Form lhs0 = dbar(dbar(f, sigma), sigma);
  Form rhs0 = wedge(exterior_derivative(sigma), f);
  check_same_form(lhs0, rhs0);

  Form a = parse_form("u^2 * dx0 + x0 * du", c);
  Form lhs1 = dbar(dbar(a, sigma), sigma);
  Form rhs1 = wedge(exterior_derivative(sigma), a);
  check_same_form(lhs1, rhs1);
}

TEST_CASE("form parsing and printing") {
  ChartBuilder b;
  b.m = 2;
  b.base = {"x0", "x1"};
  b.generic = {"u"};
  b.with_contacts = true;
  b.contacts = {"s0", "s1"};
  b.params = {"H"};
  Chart c = b.build();

  Form theta = parse_form("H * dx0^dx1 + ds0^dx1 - ds1^dx0", c);
  CHECK(theta.degree() == 2);
  CHECK(structurally_equal(theta.coefficient({c.index_of("s0"), c.base_coord(1)}), num(1)));
  CHECK(structurally_equal(theta.coefficient({c.index_of("s1"), c.base_coord(0)}), num(-1)));
  CHECK(to_string(theta) == "H * dx0^dx1 + ds0^dx1 - ds1^dx0");

  // round trip through print and reparse
  Form again = parse_form(to_string(theta), c);
  check_same_form(theta, again);

  // coefficient factors may sit anywhere in the product
  Form g = parse_form("2 * dx0^dx1 * H", c);
  CHECK(structurally_equal(g.coefficient({c.base_coord(0), c.base_coord(1)}),
                           simplify(c.parse("2*H"))));

  // reversed index query flips the sign
  CHECK(structurally_equal(theta.coefficient({c.base_coord(1), c.base_coord(0)}),
                           simplify(-c.parse("H"))));

  // scalar forms, scientific literals, unary minus
  Form s = parse_form("-u^2 + 1e-2", c);
  CHECK(s.degree() == 0);
  CHECK(to_string(parse_form("0", c)) == "0");

  CHECK_THROWS_AS(parse_form("u * dx0 + u", c), ParseError);
  CHECK_THROWS_AS(parse_form("u * dq0", c), ParseError);
}

TEST_CASE("form zero test distinguishes semantic and structural zero") {
  Chart c = make_adapted_chart(1, {"x0"}, {"u"});
  Form a(c, 1);
  a.add_term({c.base_coord(0)}, c.parse("sin(x0)^2 + cos(x0)^2 - 1"));
  CHECK_FALSE(a.structurally_zero());
  CHECK(form_is_zero(a) == ZeroTest::Zero);

  Form b(c, 1);
  b.add_term({c.base_coord(0)}, c.parse("u"));
  CHECK(form_is_zero(b) == ZeroTest::NonZero);

  // repeated index kills a term outright
  Form d(c, 2);
  d.add_term({c.base_coord(0), c.base_coord(0)}, c.parse("u"));
  CHECK(d.structurally_zero());
}

TEST_CASE("form arithmetic guards") {
  Chart c = make_adapted_chart(2, {"x0", "x1"}, {"u"});
  Chart other = make_adapted_chart(2, {"x0", "x1"}, {"u"});
  Form a = parse_form("u * dx0", c);
  Form b = parse_form("u * dx0", other);
  CHECK_THROWS_AS(a + b, StructureError);               // distinct chart identity
  CHECK_THROWS_AS(a + parse_form("u * dx0^dx1", c), StructureError);
  CHECK_THROWS_AS(contract(Form::scalar(c, num(1)), VectorField::zero(c)),
                  StructureError);
  CHECK_THROWS_AS(dbar(a, parse_form("u * dx0^dx1", c)), StructureError);
}
