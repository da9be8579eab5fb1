#include <doctest.h>

#include "mcontact/section.hpp"

using namespace mcontact;

TEST_CASE("prolonged sections carry field derivatives into velocity slots") {
  Chart c = make_lagrangian_chart(2, {"t", "x"}, {"u"});
  Section s = prolong_section(
      c, {{c.field_coord(0), c.parse("sin(t) * cos(x)")}},
      {{c.contact_coord(0), c.parse("t")}, {c.contact_coord(1), Expr::integer(0)}});
  CHECK(structurally_equal(s.value(c.velocity_coord(0, 0)),
                           simplify(c.parse("cos(t) * cos(x)"))));
  CHECK(is_zero(s.value(c.velocity_coord(0, 1)) + c.parse("sin(t) * sin(x)")) ==
        ZeroTest::Zero);

  // tangent lift in the t direction
  VectorField xt = section_tangent(s, 0);
  CHECK(structurally_equal(xt.components[c.base_coord(0)], Expr::integer(1)));
  CHECK(structurally_equal(xt.components[c.base_coord(1)], Expr::integer(0)));
  CHECK(is_zero(xt.components[c.field_coord(0)] - c.parse("cos(t)*cos(x)")) ==
        ZeroTest::Zero);
  CHECK(structurally_equal(xt.components[c.contact_coord(0)], Expr::integer(1)));
}

TEST_CASE("section validation rejects fiber dependent values") {
  Chart c = make_lagrangian_chart(1, {"t"}, {"q"});
  Section s{c, {}};
  s.values[c.field_coord(0)] = c.parse("q");  // self referential
  s.values[c.velocity_coord(0, 0)] = Expr::integer(0);
  s.values[c.contact_coord(0)] = Expr::integer(0);
  CHECK_THROWS_AS(s.validate(), StructureError);
  CHECK_THROWS_AS(Section({c, {}}).value(c.field_coord(0)), StructureError);
}

TEST_CASE("pull back along a section") {
  Chart c = make_lagrangian_chart(1, {"t"}, {"q"});
  Section s = prolong_section(c, {{c.field_coord(0), c.parse("t^2")}},
                              {{c.contact_coord(0), c.parse("t^3")}});

  Form dq(c, 1);
  dq.add_term({c.field_coord(0)}, Expr::integer(1));
  Form pulled = pull_back(dq, s);
  CHECK(is_zero(pulled.coefficient({c.base_coord(0)}) - c.parse("2*t")) ==
        ZeroTest::Zero);

  // dq ^ ds collapses on a one dimensional base
  Form dqds(c, 2);
  dqds.add_term({c.field_coord(0), c.contact_coord(0)}, Expr::integer(1));
  CHECK(pull_back(dqds, s).structurally_zero());

  // coefficients are evaluated on the section
  Form qdt = parse_form("q * dt", c);
  CHECK(is_zero(pull_back(qdt, s).coefficient({c.base_coord(0)}) - c.parse("t^2")) ==
        ZeroTest::Zero);
}

TEST_CASE("formal prolongation uses jet symbols") {
  Chart c = make_lagrangian_chart(2, {"t", "x"}, {"u"});
  JetContext jets(c);
  VectorField x1 = prolongation_field(jets, 1);
  CHECK(structurally_equal(x1.components[c.base_coord(1)], Expr::integer(1)));
  CHECK(to_string(x1.components[c.field_coord(0)]) == "u_x");
  CHECK(to_string(x1.components[c.velocity_coord(0, 0)]) == "u_tx");
  CHECK(to_string(x1.components[c.contact_coord(1)]) == "s_x_x");

  MultiVector frame = prolongation_frame(jets);
  CHECK(frame.degree() == 2);

  // substitution table matches an actual section's derivatives
  Section s = prolong_section(
      c, {{c.field_coord(0), c.parse("t * x^2")}},
      {{c.contact_coord(0), Expr::integer(0)}, {c.contact_coord(1), Expr::integer(0)}});
  auto table = section_jet_values(jets, s);
  Expr uxx = jets.second_jet(0, 1, 1);
  CHECK(is_zero(substitute(uxx, table) - c.parse("2*t")) == ZeroTest::Zero);
  Expr ut = jets.first_jet(c.field_coord(0), 0);
  CHECK(is_zero(substitute(ut, table) - c.parse("x^2")) == ZeroTest::Zero);
}

TEST_CASE("pull back along a chart map") {
  Chart lag = make_lagrangian_chart(1, {"t"}, {"q"});
  Chart ham = make_hamiltonian_chart(1, {"t"}, {"q"});

  // fiber derivative map of L = q_t^2/2: p = q_t
  ChartMap fl{lag, ham, {}};
  fl.images = {lag.coord_expr(lag.base_coord(0)), lag.coord_expr(lag.field_coord(0)),
               lag.coord_expr(lag.velocity_coord(0, 0)),
               lag.coord_expr(lag.contact_coord(0))};
  fl.validate();

  Form p_dq(ham, 1);
  p_dq.add_term({ham.field_coord(0)}, ham.coord_expr(ham.momentum_coord(0, 0)));
  Form pulled = pull_back(p_dq, fl);
  CHECK(is_zero(pulled.coefficient({lag.field_coord(0)}) -
                lag.coord_expr(lag.velocity_coord(0, 0))) == ZeroTest::Zero);

  Form dp(ham, 1);
  dp.add_term({ham.momentum_coord(0, 0)}, Expr::integer(1));
  Form dq_t = pull_back(dp, fl);
  CHECK(is_zero(dq_t.coefficient({lag.velocity_coord(0, 0)}) - Expr::integer(1)) ==
        ZeroTest::Zero);

  // scalar pull back substitutes coordinates
  Expr h = ham.parse("p^2/2");
  CHECK(is_zero(pull_back(h, fl) - lag.parse("q_t^2/2")) == ZeroTest::Zero);

  ChartMap broken{lag, ham, {Expr::integer(0)}};
  CHECK_THROWS_AS(broken.validate(), StructureError);
}
