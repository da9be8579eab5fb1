#include "mcontact/sysfile.hpp"

#include "doctest.h"

using namespace mcontact;

namespace {

const char* kOscillator = R"(# a damped oscillator
name = oscillator

[chart]
m = 1
base = t
fields = q

[parameters]
gamma = 0.2

[lagrangian]
density = q_t^2/2 - q^2/2 - gamma*s

[simulation]
t_end = 20
dt = 0.001
initial q = 1
)";

}  // namespace

TEST_CASE("a Lagrangian system file parses into a chart and a density") {
  SystemFile sys = parse_system(kOscillator, "oscillator.sys");
  CHECK(sys.name == "oscillator");
  CHECK_FALSE(sys.is_hamiltonian);
  CHECK(sys.chart.m() == 1);
  CHECK(sys.chart.has("q"));
  CHECK(sys.chart.has("q_t"));
  CHECK(sys.chart.has("s"));
  CHECK(sys.chart.same_as(sys.velocity_chart));
  CHECK(sys.param_values.at("gamma") == doctest::Approx(0.2));
  CHECK(is_zero(sys.density - sys.chart.parse("q_t^2/2 - q^2/2 - gamma*s")) ==
        ZeroTest::Zero);
  REQUIRE(sys.has_simulation);
  CHECK(sys.sim.t_end == doctest::Approx(20.0));
  CHECK(sys.sim.dt == doctest::Approx(0.001));
  CHECK(sys.sim.initial.count("q") == 1);
  CHECK(evaluate(sys.sim.initial.at("q"), {}) == doctest::Approx(1.0));
}

TEST_CASE("a Hamiltonian entry parses against the momentum chart") {
  SystemFile sys = parse_system(R"(
[chart]
m = 1
base = t
fields = q

[parameters]
gamma = 0.2

[hamiltonian]
density = p^2/2 + q^2/2 + gamma*s
)",
                                "inline");
  CHECK(sys.is_hamiltonian);
  CHECK(sys.chart.has("p"));
  CHECK_FALSE(sys.chart.has("q_t"));
  CHECK(sys.velocity_chart.has("q_t"));
  CHECK(is_zero(sys.density - sys.chart.parse("p^2/2 + q^2/2 + gamma*s")) ==
        ZeroTest::Zero);
  CHECK_FALSE(sys.has_simulation);
  CHECK(sys.name == "inline");  // falls back to the display name
}

TEST_CASE("parameter functions carry numeric bodies or stay abstract") {
  SystemFile sys = parse_system(R"(
[chart]
m = 2
base = t x
fields = u

[parameters]
rho = 1
tau = 1
gamma(t) = 3*(1 + sin(t)/2)/10
f(x0, x1)

[lagrangian]
density = rho*u_t^2/2 - tau*u_x^2/2 - gamma(t)*s_t + 0*f(t, x)

[simulation]
dt = 0.01
points = 64
bc = dirichlet0
initial u = sin(2*pi*x)
)",
                                "inline");
  REQUIRE(sys.params.count("gamma") == 1);
  CHECK(sys.params.at("gamma").formal_args.size() == 1);
  CHECK(sys.declared_functions.count("f") == 1);
  CHECK(sys.sim.bc == Boundary::Dirichlet0);
  CHECK(sys.sim.points == 64);
  // the body evaluates through the usual parameter table path
  std::map<SymbolId, double> at_zero{{sys.params.at("gamma").formal_args[0], 0.0}};
  CHECK(evaluate(sys.params.at("gamma").body, at_zero) == doctest::Approx(0.3));
  // initial data may reference base coordinates
  SymbolId x = sys.chart.coord_symbol(sys.chart.index_of("x"));
  CHECK(evaluate(sys.sim.initial.at("u"), {{x, 0.25}}) == doctest::Approx(1.0));
}

TEST_CASE("system files reject malformed input with located messages") {
  const char* head = "[chart]\nm = 1\nbase = t\nfields = q\n";

  CHECK_THROWS_WITH_AS(parse_system("[chart]\nm = 1\nbase = t\nfields = q\n",
                                    "f.sys"),
                       doctest::Contains("exactly one of"), SystemFileError);
  CHECK_THROWS_WITH_AS(
      parse_system(std::string(head) +
                       "[lagrangian]\ndensity = q\n[hamiltonian]\ndensity = q\n",
                   "f.sys"),
      doctest::Contains("exactly one of"), SystemFileError);
  CHECK_THROWS_WITH_AS(
      parse_system(std::string(head) + "[lagrangian]\n", "f.sys"),
      doctest::Contains("density entry is missing"), SystemFileError);
  CHECK_THROWS_WITH_AS(parse_system("[orbit]\n", "f.sys"),
                       doctest::Contains("unknown section"), SystemFileError);
  CHECK_THROWS_WITH_AS(
      parse_system("[chart]\nm = 1\nbase = t\nshape = q\n", "f.sys"),
      doctest::Contains("f.sys:4"), SystemFileError);
  CHECK_THROWS_WITH_AS(
      parse_system(std::string(head) + "[lagrangian]\ndensity = q_t +* 2\n",
                   "f.sys"),
      doctest::Contains("f.sys:6"), SystemFileError);
  CHECK_THROWS_WITH_AS(
      parse_system(std::string(head) +
                       "[lagrangian]\ndensity = q\n[simulation]\ninitial w = 1\n",
                   "f.sys"),
      doctest::Contains("unknown coordinate 'w'"), SystemFileError);
  CHECK_THROWS_WITH_AS(
      parse_system(std::string(head) +
                       "[lagrangian]\ndensity = q\n[simulation]\nt_end = 1\n",
                   "f.sys"),
      doctest::Contains("dt > 0"), SystemFileError);
  CHECK_THROWS_WITH_AS(
      parse_system(std::string(head) + "[chart]\n", "f.sys"),
      doctest::Contains("duplicate section"), SystemFileError);
  // initial data is a function of the base and constants only
  CHECK_THROWS_WITH_AS(
      parse_system(std::string(head) +
                       "[lagrangian]\ndensity = q\n[simulation]\ndt = 1\ninitial q = q + 1\n",
                   "f.sys"),
      doctest::Contains("initial data for 'q'"), SystemFileError);
}

TEST_CASE("system files load from disk") {
  const std::string path = std::string(MCONTACT_SOURCE_DIR) + "/systems/oscillator.sys";
  SystemFile sys = load_system(path);
  CHECK(sys.name == "oscillator");
  CHECK(sys.has_simulation);
  CHECK_THROWS_WITH_AS(load_system("/nonexistent/nothing.sys"),
                       doctest::Contains("cannot read"), SystemFileError);
}
