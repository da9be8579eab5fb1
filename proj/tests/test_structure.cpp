#include <doctest.h>

#include "mcontact/structure.hpp"

using namespace mcontact;

namespace {

// damped oscillator, Hamiltonian picture: H = p^2/2 + q^2/2 + gamma s
struct Oscillator {
  Chart chart = make_hamiltonian_chart(1, {"t"}, {"q"}, {"gamma"});
  Form theta = parse_form("ds - p*dq + (p^2/2 + q^2/2 + gamma*s)*dt", chart);
};

// vibrating string with time dependent damping, Lagrangian picture
struct String {
  Chart chart = make_lagrangian_chart(2, {"t", "x"}, {"u"}, {"rho", "tau"},
                                      {{"gamma", 1}});
  Form theta = parse_form(
      "(rho*u_t^2/2 - tau*u_x^2/2 + gamma(t)*s_t) * dt^dx"
      " - rho*u_t * du^dx + tau*u_x * dt^du + ds_t^dx + dt^ds_x",
      chart);
};

}  // namespace

TEST_CASE("oscillator form is multicontact with Reeb field d/ds") {
  Oscillator osc;
  Classification cl = classify(osc.theta);
  CHECK(cl.kind == StructureKind::Multicontact);
  CHECK(cl.certain);
  CHECK(cl.vertical_rank == 3);
  CHECK(cl.reeb_rank == 1);
  CHECK(cl.characteristic_rank == 0);
  REQUIRE(cl.reeb.size() == 1);
  const Chart& c = osc.chart;
  CHECK(structurally_equal(cl.reeb[0].components[c.contact_coord(0)], Expr::integer(1)));
  CHECK(structurally_equal(cl.reeb[0].components[c.index_of("q")], Expr::integer(0)));
  CHECK(structurally_equal(cl.reeb[0].components[c.index_of("p")], Expr::integer(0)));

  DissipationResult d = dissipation_form(osc.theta, cl);
  CHECK(d.verified == ZeroTest::Zero);
  CHECK(is_zero(d.sigma.coefficient({c.base_coord(0)}) - c.parse("gamma")) ==
        ZeroTest::Zero);
}

TEST_CASE("string form is multicontact with sigma = gamma(t) dt") {
  String st;
  Classification cl = classify(st.theta);
  CHECK(cl.kind == StructureKind::Multicontact);
  CHECK(cl.certain);
  CHECK(cl.vertical_rank == 5);
  CHECK(cl.reeb_rank == 2);
  CHECK(cl.characteristic_rank == 0);
  REQUIRE(cl.reeb.size() == 2);
  const Chart& c = st.chart;
  CHECK(structurally_equal(cl.reeb[0].components[c.contact_coord(0)], Expr::integer(1)));
  CHECK(structurally_equal(cl.reeb[0].components[c.contact_coord(1)], Expr::integer(0)));
  CHECK(structurally_equal(cl.reeb[1].components[c.contact_coord(1)], Expr::integer(1)));

  DissipationResult d = dissipation_form(st.theta, cl);
  CHECK(d.verified == ZeroTest::Zero);
  CHECK(is_zero(d.sigma.coefficient({c.base_coord(0)}) - c.parse("gamma(t)")) ==
        ZeroTest::Zero);
  CHECK(structurally_equal(d.sigma.coefficient({c.base_coord(1)}), Expr::integer(0)));

  CHECK(is_variational(st.theta));
}

TEST_CASE("bare volume form has no Reeb distribution") {
  Chart c = make_adapted_chart(2, {"x0", "x1"}, {"u"});
  Form theta = volume_form(c);
  Classification cl = classify(theta);
  CHECK(cl.kind == StructureKind::NotMulticontact);
  CHECK(cl.reason == "no Reeb distribution");
  CHECK(cl.certain);
}

TEST_CASE("degenerate singular form fails the constructive Reeb solve") {
  // theta = ds - s du on (t, u, v, s): vertical directions exist but none of
  // them pairs with the base volume
  ChartBuilder b;
  b.m = 1;
  b.base = {"t"};
  b.generic = {"u", "v"};
  b.with_contacts = true;
  Chart c = b.build();
  Form theta = parse_form("ds - s*du", c);

  DistributionResult dr = reeb_distribution(theta);
  CHECK(dr.dist.rank() == 1);  // only d/dv survives
  CHECK(structurally_equal(dr.dist.basis[0].components[c.index_of("v")],
                           Expr::integer(1)));
  DistributionResult ch = characteristic_distribution(theta);
  CHECK(ch.dist.rank() == 1);

  Classification cl = classify(theta);
  CHECK(cl.kind == StructureKind::NotMulticontact);
  CHECK(cl.reason == "no Reeb distribution");
  CHECK(cl.certain);
  CHECK_THROWS_AS(dissipation_form(theta, cl), StructureError);
}

TEST_CASE("spectator direction produces a premulticontact structure") {
  ChartBuilder b;
  b.m = 1;
  b.base = {"t"};
  b.generic = {"q", "p", "w"};
  b.with_contacts = true;
  b.params = {"gamma"};
  Chart c = b.build();
  Form theta = parse_form("ds - p*dq + (p^2/2 + q^2/2 + gamma*s)*dt", c);

  Classification cl = classify(theta);
  CHECK(cl.kind == StructureKind::Premulticontact);
  CHECK(cl.certain);
  CHECK(cl.reeb_rank == 2);
  CHECK(cl.characteristic_rank == 1);
  REQUIRE(cl.characteristic.basis.size() == 1);
  CHECK(structurally_equal(cl.characteristic.basis[0].components[c.index_of("w")],
                           Expr::integer(1)));
  // canonical Reeb representative zeroes the characteristic component
  REQUIRE(cl.reeb.size() == 1);
  CHECK(structurally_equal(cl.reeb[0].components[c.contact_coord(0)], Expr::integer(1)));
  CHECK(structurally_equal(cl.reeb[0].components[c.index_of("w")], Expr::integer(0)));
}

TEST_CASE("undecidable coefficients yield an honest indeterminate verdict") {
  ChartBuilder b;
  b.m = 1;
  b.base = {"t"};
  b.generic = {"u", "v"};
  b.with_contacts = true;
  Chart c = b.build();
  // the du coefficient is identically zero but beyond the proof fragment
  Form theta = parse_form("ds + (sin(2*t) - 2*sin(t)*cos(t)) * du", c);
  Classification cl = classify(theta);
  CHECK(cl.kind == StructureKind::Indeterminate);
  CHECK(cl.reason == "rank indeterminate");
  CHECK_FALSE(cl.certain);
}

TEST_CASE("variational detection counts fiber differentials per term") {
  Chart c = make_adapted_chart(2, {"t", "x"}, {"u", "v"});
  CHECK(is_variational(parse_form("ds_t^dx - v*du^dx", c)));
  CHECK_FALSE(is_variational(parse_form("ds_t^dx + du^dv", c)));
}

TEST_CASE("holonomic frame residuals recover the damped oscillator equation") {
  Chart c = make_lagrangian_chart(1, {"t"}, {"q"}, {"gamma"});
  // L = q_t^2/2 - q^2/2 - gamma s
  Form theta = parse_form("ds - q_t*dq + (q_t^2/2 + q^2/2 + gamma*s)*dt", c);
  Form sigma = parse_form("gamma*dt", c);
  JetContext jets(c);
  MvfResiduals r = mvf_residuals(theta, sigma, jets);

  // pairing: s_t - L
  Expr pairing_expected = jets.parse("s_t - q_t^2/2 + q^2/2 + gamma*s");
  CHECK(is_zero(r.pairing - pairing_expected) == ZeroTest::Zero);
  CHECK(structurally_equal(simplify(r.transversality), Expr::integer(0)));

  // field slot: -(q_tt + q + gamma q_t) on dq
  Expr el = jets.parse("q_tt + q + gamma*q_t");
  CHECK(is_zero(r.one_form.coefficient({c.field_coord(0)}) + el) == ZeroTest::Zero);
  // velocity slot carries no condition, base slot is q_t times the field slot
  CHECK(is_zero(r.one_form.coefficient({c.velocity_coord(0, 0)})) == ZeroTest::Zero);
  CHECK(is_zero(r.one_form.coefficient({c.base_coord(0)}) -
                jets.parse("q_t") * el) == ZeroTest::Zero);
}

TEST_CASE("section routes agree up to the dimension sign") {
  Chart c = make_lagrangian_chart(1, {"t"}, {"q"}, {"gamma"});
  Form theta = parse_form("ds - q_t*dq + (q_t^2/2 + q^2/2 + gamma*s)*dt", c);
  Form sigma = parse_form("gamma*dt", c);
  Section psi = prolong_section(c, {{c.field_coord(0), c.parse("t^2")}},
                                {{c.contact_coord(0), c.parse("t^3")}});

  std::vector<VectorField> tests;
  tests.push_back(VectorField::coordinate(c, c.field_coord(0)));
  tests.push_back(VectorField::coordinate(c, c.contact_coord(0)));
  VectorField mixed = VectorField::zero(c);
  mixed.components[c.field_coord(0)] = c.parse("sin(t)*q");
  mixed.components[c.velocity_coord(0, 0)] = c.parse("q_t + t");
  tests.push_back(mixed);

  SectionRoutes routes = section_routes(theta, sigma, psi, tests);
  CHECK(routes.agreement == ZeroTest::Zero);

  // the field direction restricts to the damped equation on the section
  Expr on_section = c.parse("2 + t^2 + gamma*2*t");  // (q'' + q + gamma q') at q=t^2
  CHECK(is_zero(routes.restricted[0] - on_section) == ZeroTest::Zero);
}

TEST_CASE("connection residuals match the frame pairing when m = 1") {
  Chart c = make_lagrangian_chart(1, {"t"}, {"q"}, {"gamma"});
  Form theta = parse_form("ds - q_t*dq + (q_t^2/2 + q^2/2 + gamma*s)*dt", c);
  Form sigma = parse_form("gamma*dt", c);
  JetContext jets(c);
  MvfResiduals mvf = mvf_residuals(theta, sigma, jets);
  ConnectionResiduals con = connection_residuals(theta, sigma, jets);

  CHECK(is_zero(con.theta_residual.coefficient({c.base_coord(0)}) - mvf.pairing) ==
        ZeroTest::Zero);
  CHECK(is_zero(con.dbar_residual.coefficient({c.base_coord(0), c.field_coord(0)}) -
                mvf.one_form.coefficient({c.field_coord(0)})) == ZeroTest::Zero);
}

TEST_CASE("current residual of the Hamiltonian is its explicit time drift") {
  Chart c = make_hamiltonian_chart(1, {"t"}, {"q"}, {}, {{"gamma", 1}});
  Expr H = c.parse("p^2/2 + q^2/2 + gamma(t)*s");
  Form sigma(c, 1);
  sigma.add_term({c.base_coord(0)}, simplify(differentiate(H, c.coord_symbol(c.contact_coord(0)))));

  VectorField xh = VectorField::zero(c);
  xh.components[c.base_coord(0)] = Expr::integer(1);
  Expr hq = simplify(differentiate(H, c.coord_symbol(c.field_coord(0))));
  Expr hp = simplify(differentiate(H, c.coord_symbol(c.momentum_coord(0, 0))));
  Expr hs = simplify(differentiate(H, c.coord_symbol(c.contact_coord(0))));
  Expr p = c.coord_expr(c.momentum_coord(0, 0));
  xh.components[c.field_coord(0)] = hp;
  xh.components[c.momentum_coord(0, 0)] = simplify(-(hq + p * hs));
  xh.components[c.contact_coord(0)] = simplify(p * hp - H);

  Expr res = current_residual(Form::scalar(c, H), sigma, MultiVector{{xh}});
  CHECK(is_zero(res - c.parse("gamma'(t)*s")) == ZeroTest::Zero);
}
