#include <doctest.h>

#include "mcontact/linalg.hpp"

using namespace mcontact;

namespace {

Expr sym(const std::string& s) { return Expr::symbol(s); }

ExprMatrix from_rows(std::vector<std::vector<Expr>> rows) {
  ExprMatrix m;
  for (auto& r : rows) m.append_row(std::move(r));
  return m;
}

}  // namespace

TEST_CASE("rank of numeric matrices") {
  ExprMatrix a = from_rows({{Expr::integer(1), Expr::integer(2)},
                            {Expr::integer(2), Expr::integer(4)}});
  RankResult ra = rank(a);
  CHECK(ra.value == 1);
  CHECK(ra.certain);

  ExprMatrix b = from_rows({{Expr::integer(1), Expr::integer(0)},
                            {Expr::integer(3), Expr::integer(5)}});
  CHECK(rank(b).value == 2);

  ExprMatrix z(3, 2);
  CHECK(rank(z).value == 0);
  CHECK(rank(z).certain);
}

TEST_CASE("rank sees through semantic zeros") {
  Expr x = sym("x");
  Expr zero_in_disguise = Expr::call("sin", x) * Expr::call("sin", x) +
                          Expr::call("cos", x) * Expr::call("cos", x) - Expr::integer(1);
  ExprMatrix m = from_rows({{zero_in_disguise}});
  RankResult r = rank(m);
  CHECK(r.value == 0);
  CHECK(r.certain);

  // same identity plus a visible offset is provably nonzero
  ExprMatrix m2 = from_rows({{zero_in_disguise + Expr::number(mpq_class(1, 1000))}});
  CHECK(rank(m2).value == 1);
}

TEST_CASE("undecidable pivots surface as uncertainty") {
  Expr x = sym("x");
  // sin(2x) - 2 sin(x) cos(x): identically zero but outside the proof fragment
  Expr tricky = Expr::call("sin", Expr::integer(2) * x) -
                Expr::integer(2) * Expr::call("sin", x) * Expr::call("cos", x);
  REQUIRE(is_zero(tricky) == ZeroTest::Unknown);
  ExprMatrix m = from_rows({{tricky}});
  RankResult r = rank(m);
  CHECK(r.value == 0);
  CHECK_FALSE(r.certain);
  CHECK(numeric_rank(m) == 0);
}

TEST_CASE("null space basis and canonical free columns") {
  // x + y + z = 0
  ExprMatrix m = from_rows({{Expr::integer(1), Expr::integer(1), Expr::integer(1)}});
  auto basis = null_space(m);
  REQUIRE(basis.size() == 2);
  CHECK(structurally_equal(basis[0][0], Expr::integer(-1)));
  CHECK(structurally_equal(basis[0][1], Expr::integer(1)));
  CHECK(structurally_equal(basis[0][2], Expr::integer(0)));
  CHECK(structurally_equal(basis[1][0], Expr::integer(-1)));
  CHECK(structurally_equal(basis[1][2], Expr::integer(1)));

  // symbolic entries
  Expr a = sym("a");
  ExprMatrix s = from_rows({{a, a * Expr::integer(2)}});
  auto nb = null_space(s);
  REQUIRE(nb.size() == 1);
  CHECK(structurally_equal(simplify(nb[0][0] + Expr::integer(2)), Expr::integer(0)));
  CHECK(structurally_equal(nb[0][1], Expr::integer(1)));
}

TEST_CASE("linear solve with unique and free solutions") {
  ExprMatrix a = from_rows({{Expr::integer(1), Expr::integer(1)},
                            {Expr::integer(1), Expr::integer(-1)}});
  LinearSolution s = solve_linear(a, {Expr::integer(2), Expr::integer(0)});
  REQUIRE(s.solvable);
  CHECK(s.certain);
  CHECK(s.kernel.empty());
  CHECK(structurally_equal(s.particular[0], Expr::integer(1)));
  CHECK(structurally_equal(s.particular[1], Expr::integer(1)));

  ExprMatrix u = from_rows({{Expr::integer(1), Expr::integer(1)}});
  LinearSolution us = solve_linear(u, {Expr::integer(1)});
  REQUIRE(us.solvable);
  CHECK(structurally_equal(us.particular[0], Expr::integer(1)));
  CHECK(structurally_equal(us.particular[1], Expr::integer(0)));  // free slot zeroed
  REQUIRE(us.kernel.size() == 1);

  ExprMatrix bad = from_rows({{Expr::integer(1), Expr::integer(1)},
                              {Expr::integer(1), Expr::integer(1)}});
  LinearSolution nope = solve_linear(bad, {Expr::integer(1), Expr::integer(2)});
  CHECK_FALSE(nope.solvable);
  CHECK(nope.certain);
}

TEST_CASE("solve with symbolic right hand side") {
  Expr a = sym("a");
  ExprMatrix m = from_rows({{Expr::integer(2)}});
  LinearSolution s = solve_linear(m, {a});
  REQUIRE(s.solvable);
  CHECK(structurally_equal(s.particular[0], simplify(a / Expr::integer(2))));

  // pivoting on a symbol divides through it
  ExprMatrix n = from_rows({{a}});
  LinearSolution t = solve_linear(n, {Expr::integer(1)});
  REQUIRE(t.solvable);
  CHECK(is_zero(t.particular[0] * a - Expr::integer(1)) == ZeroTest::Zero);
}

TEST_CASE("numeric rank fallback") {
  Expr x = sym("x");
  ExprMatrix m = from_rows({{x, x}, {x, x}});
  CHECK(numeric_rank(m) == 1);
  ExprMatrix id = from_rows({{Expr::integer(1), Expr::integer(0)},
                             {Expr::integer(0), Expr::integer(1)}});
  CHECK(numeric_rank(id) == 2);
}

TEST_CASE("matrix construction guards") {
  ExprMatrix m;
  m.append_row({Expr::integer(1), Expr::integer(2)});
  CHECK_THROWS_AS(m.append_row({Expr::integer(1)}), StructureError);
  CHECK_THROWS_AS(solve_linear(m, {Expr::integer(1), Expr::integer(2)}), StructureError);
}
