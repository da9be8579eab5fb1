#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mcontact/hamiltonian.hpp"
#include "mcontact/simulate.hpp"
#include "mcontact/structure.hpp"
#include "mcontact/sysfile.hpp"

using namespace mcontact;

namespace {

struct Options {
  std::string format = "text";
  std::string out_dir = ".";
  std::uint64_t seed = ProbeOptions{}.seed;

  ProbeOptions probes() const {
    ProbeOptions o;
    o.seed = seed;
    return o;
  }
};

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* zero_name(ZeroTest z) {
  switch (z) {
    case ZeroTest::Zero: return "Zero";
    case ZeroTest::NonZero: return "NonZero";
    default: return "Unknown";
  }
}

std::map<SymbolId, double> param_bindings(const SystemFile& sys) {
  std::map<SymbolId, double> b;
  for (const auto& [name, v] : sys.param_values) b[intern_symbol(name)] = v;
  return b;
}

std::string headline(const Classification& cl) {
  switch (cl.kind) {
    case StructureKind::Multicontact:
      return "Multicontact";
    case StructureKind::Premulticontact:
      return "Premulticontact k=" + std::to_string(cl.characteristic_rank);
    case StructureKind::NotMulticontact:
      return "NotMulticontact: " + cl.reason;
    default:
      return "Indeterminate: " + cl.reason;
  }
}

bool structured(const Classification& cl) {
  return cl.kind == StructureKind::Multicontact || cl.kind == StructureKind::Premulticontact;
}

// structure data shared by classify and verify
struct BuiltSystem {
  Form theta;
  Form sigma;  // from the density: -dL/ds^mu dx^mu or +dH/ds^mu dx^mu
  bool lagrangian = false;
  RegularityReport reg;
};

BuiltSystem build(const SystemFile& sys, const ProbeOptions& probes) {
  BuiltSystem b;
  if (sys.is_hamiltonian) {
    HamiltonianSystem h = make_hamiltonian_system(sys.density, sys.chart);
    b.theta = h.theta;
    b.sigma = h.sigma;
  } else {
    LagrangianSystem l = make_lagrangian_system(sys.density, sys.chart, probes);
    b.theta = l.theta;
    b.sigma = l.sigma;
    b.lagrangian = true;
    b.reg = l.regularity;
  }
  return b;
}

double worst_residual(const RunReport& rep) {
  const std::string tag = " max_linf";
  double w = 0;
  for (const auto& [k, v] : rep.stats)
    if (k.size() > tag.size() && k.compare(k.size() - tag.size(), tag.size(), tag) == 0)
      w = std::max(w, v);
  return w;
}

// ---------------------------------------------------------------- classify

int cmd_classify(const SystemFile& sys, const Options& opt) {
  const ProbeOptions probes = opt.probes();
  BuiltSystem b = build(sys, probes);
  Classification cl = classify(b.theta, probes);
  DissipationResult d;
  if (structured(cl)) d = dissipation_form(b.theta, cl, probes);

  if (opt.format == "json") {
    nlohmann::json j;
    j["name"] = sys.name;
    j["kind"] = to_string(cl.kind);
    j["headline"] = headline(cl);
    j["vertical_rank"] = cl.vertical_rank;
    j["reeb_rank"] = cl.reeb_rank;
    j["characteristic_rank"] = cl.characteristic_rank;
    j["certain"] = cl.certain;
    if (!cl.reason.empty()) j["reason"] = cl.reason;
    j["chart"] = {{"dim", sys.chart.dim()},
                  {"fields", sys.chart.n_fields()},
                  {"m", sys.chart.m()}};
    if (structured(cl)) {
      j["sigma"] = to_string(d.sigma);
      j["sigma_verified"] = zero_name(d.verified);
    }
    std::printf("%s\n", j.dump(2).c_str());
    return 0;
  }

  std::printf("%s: %s\n", sys.name.c_str(), headline(cl).c_str());
  std::printf("  chart: %d coordinates (m = %d, %d field%s)\n", sys.chart.dim(), sys.chart.m(),
              sys.chart.n_fields(), sys.chart.n_fields() == 1 ? "" : "s");
  std::printf("  vertical rank: %d\n", cl.vertical_rank);
  std::printf("  reeb rank: %d\n", cl.reeb_rank);
  std::printf("  characteristic rank: %d\n", cl.characteristic_rank);
  if (structured(cl)) {
    std::printf("  dissipation form: %s\n", to_string(d.sigma).c_str());
    if (d.verified != ZeroTest::Zero)
      std::printf("  note: dissipation identity not certified (%s)\n", zero_name(d.verified));
  }
  if (!cl.certain)
    std::printf("  note: a rank decision relied on unproven zero tests\n");
  return 0;
}

// ------------------------------------------------------------------ derive

int cmd_derive(const SystemFile& sys, const Options& opt) {
  const EquationSet eqs = sys.is_hamiltonian ? hdw_equations(sys.density, sys.chart)
                                             : herglotz_el_equations(sys.density, sys.chart);
  const char* label = sys.is_hamiltonian ? "Hamilton-de Donder-Weyl equations"
                                         : "Herglotz-Euler-Lagrange equations";

  // one-dimensional base: supplement with the first-order evolution field
  bool have_field = false;
  VectorField xh;
  Chart hc;
  if (sys.chart.m() == 1) {
    try {
      Expr H = sys.density;
      hc = sys.chart;
      if (!sys.is_hamiltonian) {
        HamiltonianSystem h = hamiltonian_from_lagrangian(sys.density, sys.chart, opt.probes());
        H = h.density;
        hc = h.chart;
      }
      xh = cocontact_vector_field(H, hc, opt.probes());
      have_field = true;
    } catch (const StructureError&) {
      // singular or no closed-form Legendre inverse: the residual set stands alone
    }
  }

  if (opt.format == "latex") {
    std::fputs(eqs.latex().c_str(), stdout);
    return 0;
  }
  if (opt.format == "json") {
    nlohmann::json j;
    j["name"] = sys.name;
    j[sys.is_hamiltonian ? "hdw" : "herglotz_el"] = nlohmann::json::parse(eqs.json());
    if (have_field) {
      nlohmann::json f;
      for (int i : hc.fiber_indices())
        f[hc.coordinate(i).name] = to_string(simplify(xh.component(i)));
      j["cocontact"] = f;
    }
    std::printf("%s\n", j.dump(2).c_str());
    return 0;
  }

  std::printf("%s: %s\n", sys.name.c_str(), label);
  std::fputs(eqs.text().c_str(), stdout);
  if (have_field) {
    const std::string t = hc.coordinate(hc.base_coord(0)).name;
    std::printf("\ncocontact evolution field:\n");
    for (int i : hc.fiber_indices())
      std::printf("d%s/d%s = %s\n", hc.coordinate(i).name.c_str(), t.c_str(),
                  to_string(simplify(xh.component(i))).c_str());
  }
  return 0;
}

// ---------------------------------------------------------------- legendre

int cmd_legendre(const SystemFile& sys, const Options& opt) {
  if (sys.is_hamiltonian) {
    std::printf("%s: the density already lives on the momentum chart; nothing to invert\n",
                sys.name.c_str());
    return 0;
  }
  const Chart& lc = sys.chart;
  const int n = lc.n_fields(), m = lc.m();
  RegularityReport reg = regularity(sys.density, lc, opt.probes());
  if (reg.verdict == Regularity::Singular)
    throw StructureError("singular velocity hessian (rank " + std::to_string(reg.rank) + " of " +
                         std::to_string(reg.dimension) + "); no Legendre inverse");

  LegendreInverse inv = invert_legendre(sys.density, lc, opt.probes());
  std::vector<std::pair<std::string, Expr>> momenta, inverse;
  for (int i = 0; i < n; ++i)
    for (int mu = 0; mu < m; ++mu) {
      momenta.emplace_back(inv.target.coordinate(inv.target.momentum_coord(i, mu)).name,
                           simplify(inv.momentum_rows[static_cast<std::size_t>(i) * m + mu]));
      if (inv.closed_form) {
        const int vi = lc.velocity_coord(i, mu);
        inverse.emplace_back(lc.coordinate(vi).name, simplify(inv.inverse.images[vi]));
      }
    }
  Expr H;
  if (inv.closed_form)
    H = hamiltonian_from_lagrangian(sys.density, lc, opt.probes()).density;

  if (opt.format == "json") {
    nlohmann::json j;
    j["name"] = sys.name;
    j["closed_form"] = inv.closed_form;
    nlohmann::json fwd;
    for (const auto& [k, e] : momenta) fwd[k] = to_string(e);
    j["momenta"] = fwd;
    if (inv.closed_form) {
      nlohmann::json back;
      for (const auto& [k, e] : inverse) back[k] = to_string(e);
      j["inverse"] = back;
      j["hamiltonian"] = to_string(H);
    }
    std::printf("%s\n", j.dump(2).c_str());
    return 0;
  }
  if (opt.format == "latex") {
    std::printf("\\begin{align}\n");
    for (const auto& [k, e] : momenta)
      std::printf("  %s &= %s \\\\\n", k.c_str(), to_latex(e).c_str());
    if (inv.closed_form)
      std::printf("  H &= %s\n", to_latex(H).c_str());
    std::printf("\\end{align}\n");
    return 0;
  }

  std::printf("%s: Legendre map\n", sys.name.c_str());
  for (const auto& [k, e] : momenta)
    std::printf("  %s = %s\n", k.c_str(), to_string(e).c_str());
  if (!inv.closed_form) {
    std::printf("no closed-form inverse; velocities remain available pointwise by Newton iteration\n");
    return 0;
  }
  std::printf("inverse:\n");
  for (const auto& [k, e] : inverse)
    std::printf("  %s = %s\n", k.c_str(), to_string(e).c_str());
  std::printf("Hamiltonian density:\n  %s\n", to_string(H).c_str());
  return 0;
}

// ---------------------------------------------------------------- simulate

OdeState ode_initial(const SystemFile& sys, const Chart& hc) {
  bool any_vel = false, any_mom = false;
  for (const auto& [k, e] : sys.sim.initial) {
    const int i = hc.index_of(k);
    if (i >= 0) {
      if (hc.coordinate(i).role == Role::Momentum) any_mom = true;
    } else {
      any_vel = true;  // the file parser pinned it to the velocity chart
    }
  }
  if (any_vel && sys.is_hamiltonian)
    throw SystemFileError(sys.name + ": velocity initial data needs a Lagrangian entry");
  if (any_vel && any_mom)
    throw SystemFileError(sys.name + ": give initial velocities or initial momenta, not both");

  std::map<SymbolId, double> bind = param_bindings(sys);
  bind[hc.coord_symbol(hc.base_coord(0))] = 0.0;
  auto value_of = [&](const std::string& coord) -> double {
    auto it = sys.sim.initial.find(coord);
    return it == sys.sim.initial.end() ? 0.0 : evaluate(it->second, bind, sys.params);
  };

  OdeState st;
  st.t = 0.0;
  st.values.assign(static_cast<std::size_t>(hc.dim()), 0.0);
  for (int i : hc.fiber_indices()) {
    const Coordinate& c = hc.coordinate(i);
    if (c.role != Role::Momentum) st.values[static_cast<std::size_t>(i)] = value_of(c.name);
  }
  if (any_vel) {
    // momenta through the fiber derivative at the velocity-side initial point
    const Chart& lc = sys.velocity_chart;
    std::map<SymbolId, double> vb = bind;
    for (int i : lc.fiber_indices()) vb[lc.coord_symbol(i)] = value_of(lc.coordinate(i).name);
    for (int i = 0; i < lc.n_fields(); ++i)
      for (int mu = 0; mu < lc.m(); ++mu) {
        const Expr row = differentiate(sys.density, lc.coord_symbol(lc.velocity_coord(i, mu)));
        st.values[static_cast<std::size_t>(hc.momentum_coord(i, mu))] =
            evaluate(row, vb, sys.params);
      }
  } else {
    for (int i : hc.indices_with_role(Role::Momentum))
      st.values[static_cast<std::size_t>(i)] = value_of(hc.coordinate(i).name);
  }
  return st;
}

struct RunOutcome {
  std::string csv;
  RunReport report;
};

RunOutcome run_ode(const SystemFile& sys, const ProbeOptions& probes, double dt, int) {
  Expr H = sys.density;
  Chart hc = sys.chart;
  if (!sys.is_hamiltonian) {
    HamiltonianSystem h = hamiltonian_from_lagrangian(sys.density, sys.chart, probes);
    H = h.density;
    hc = h.chart;
  }
  VectorField field = cocontact_vector_field(H, hc, probes);
  OdeState init = ode_initial(sys, hc);
  OdeTrajectory tr = integrate_ode(field, init, sys.sim.t_end, dt, sys.params, sys.param_values);

  RunOutcome out;
  out.csv = to_csv(tr);
  out.report = residual_norms(tr, hdw_equations(H, hc), sys.param_values, sys.params);
  if (!sys.is_hamiltonian)
    out.report.stats["action identity max"] =
        action_identity_check(tr, sys.density, sys.chart, sys.param_values, sys.params);
  out.report.stats["t_end"] = sys.sim.t_end;
  return out;
}

// shape data for the damped-string integrator, extracted from the density
struct WaveShape {
  double rho = 0, tau = 0;
  Expr damping;
  SymbolId time_symbol = 0;
};

WaveShape wave_shape(const SystemFile& sys, const ProbeOptions& probes) {
  const Chart& lc = sys.chart;
  const SymbolId tsym = lc.coord_symbol(lc.base_coord(0));
  const SymbolId xsym = lc.coord_symbol(lc.base_coord(1));
  const Expr vt = lc.coord_expr(lc.velocity_coord(0, 0));
  const Expr vx = lc.coord_expr(lc.velocity_coord(0, 1));
  const Expr ct = lc.coord_expr(lc.contact_coord(0));
  const SymbolId vt_s = lc.coord_symbol(lc.velocity_coord(0, 0));
  const SymbolId vx_s = lc.coord_symbol(lc.velocity_coord(0, 1));
  const SymbolId ct_s = lc.coord_symbol(lc.contact_coord(0));

  const Expr zero = Expr::integer(0);
  const Expr rho_e = simplify(differentiate(differentiate(sys.density, vt_s), vt_s));
  const Expr tau_e = simplify(zero - differentiate(differentiate(sys.density, vx_s), vx_s));
  const Expr g_e = simplify(zero - differentiate(sys.density, ct_s));
  const Expr two = Expr::integer(2);
  const Expr model = rho_e * vt * vt / two - tau_e * vx * vx / two - g_e * ct;
  if (is_zero(simplify(sys.density - model), probes) != ZeroTest::Zero)
    throw StructureError(
        "the grid integrator covers densities of the form "
        "rho*u_t^2/2 - tau*u_x^2/2 - gamma(t)*s_t");
  for (SymbolId s : free_symbols(g_e))
    if (s != tsym && !lc.param_symbols().count(symbol_name(s)))
      throw StructureError("the damping coefficient may depend on '" +
                           symbol_name(tsym) + "' only");
  (void)xsym;

  std::map<SymbolId, double> bind = param_bindings(sys);
  WaveShape w;
  try {
    w.rho = evaluate(rho_e, bind, sys.params);
    w.tau = evaluate(tau_e, bind, sys.params);
  } catch (const EvalError&) {
    throw StructureError("rho and tau must evaluate to constants");
  }
  w.damping = g_e;
  w.time_symbol = tsym;
  return w;
}

RunOutcome run_wave(const SystemFile& sys, const ProbeOptions& probes, int points, double dt,
                    int stride) {
  const Chart& lc = sys.chart;
  const WaveShape w = wave_shape(sys, probes);

  if (points < 8)
    throw SystemFileError(sys.name + ": the simulation block needs points >= 8");
  const double dx = sys.sim.bc == Boundary::Periodic ? sys.sim.length / points
                                                     : sys.sim.length / (points - 1);
  GridState g0;
  g0.t = 0;
  g0.x0 = sys.sim.x0;
  g0.dx = dx;
  g0.bc = sys.sim.bc;
  g0.u.assign(static_cast<std::size_t>(points), 0.0);
  g0.ut.assign(static_cast<std::size_t>(points), 0.0);
  g0.st.assign(static_cast<std::size_t>(points), 0.0);

  const std::string fname = lc.coordinate(lc.field_coord(0)).name;
  const std::string vname = lc.coordinate(lc.velocity_coord(0, 0)).name;
  const std::string cname = lc.coordinate(lc.contact_coord(0)).name;
  for (const auto& [k, e] : sys.sim.initial)
    if (k != fname && k != vname && k != cname)
      throw SystemFileError(sys.name + ": the grid integrator takes initial data for '" + fname +
                            "', '" + vname + "' and '" + cname + "' only");
  std::map<SymbolId, double> bind = param_bindings(sys);
  bind[w.time_symbol] = 0.0;
  const SymbolId xsym = lc.coord_symbol(lc.base_coord(1));
  auto fill = [&](const std::string& key, std::vector<double>& dst) {
    auto it = sys.sim.initial.find(key);
    if (it == sys.sim.initial.end()) return;
    for (int j = 0; j < points; ++j) {
      bind[xsym] = sys.sim.x0 + j * dx;
      dst[static_cast<std::size_t>(j)] = evaluate(it->second, bind, sys.params);
    }
  };
  fill(fname, g0.u);
  fill(vname, g0.ut);
  fill(cname, g0.st);
  if (sys.sim.bc == Boundary::Dirichlet0) {
    g0.u.front() = g0.u.back() = 0.0;
    g0.ut.front() = g0.ut.back() = 0.0;
  }

  WaveConfig cfg;
  cfg.rho = w.rho;
  cfg.tau = w.tau;
  cfg.damping = w.damping;
  cfg.time_symbol = w.time_symbol;
  cfg.params = sys.params;
  cfg.param_values = sys.param_values;
  WaveTrajectory tr = integrate_wave(cfg, g0, sys.sim.t_end, dt, stride);

  RunOutcome out;
  out.csv = to_csv(tr);
  out.report =
      residual_norms(tr, herglotz_el_equations(sys.density, lc), sys.param_values, sys.params);
  out.report.stats["action identity max"] =
      action_identity_check(tr, sys.density, lc, sys.param_values, sys.params);
  const std::vector<double> energy = wave_energy_series(tr, w.rho, w.tau);
  out.report.stats["energy initial"] = energy.front();
  out.report.stats["energy final"] = energy.back();
  out.report.stats["t_end"] = sys.sim.t_end;
  return out;
}

bool wave_supported(const SystemFile& sys) {
  return !sys.is_hamiltonian && sys.chart.m() == 2 && sys.chart.n_fields() == 1;
}

int cmd_simulate(const SystemFile& sys, const Options& opt) {
  if (!sys.has_simulation)
    throw SystemFileError(sys.name + ": no simulation block");

  RunOutcome out;
  if (sys.chart.m() == 1)
    out = run_ode(sys, opt.probes(), sys.sim.dt, sys.sim.stride);
  else if (wave_supported(sys))
    out = run_wave(sys, opt.probes(), sys.sim.points, sys.sim.dt, sys.sim.stride);
  else
    throw StructureError(
        "no integrator for this system shape (supported: one-dimensional base, or "
        "two-dimensional base with a single-field Lagrangian entry)");

  namespace fs = std::filesystem;
  fs::create_directories(opt.out_dir);
  const fs::path csv_path = fs::path(opt.out_dir) / "trajectory.csv";
  const fs::path rep_path = fs::path(opt.out_dir) / "report.json";
  std::ofstream(csv_path) << out.csv;
  std::ofstream(rep_path) << out.report.json() << "\n";

  std::printf("%s: integrated to t = %s\n", sys.name.c_str(), fmt17(sys.sim.t_end).c_str());
  std::printf("  wrote %s\n", csv_path.string().c_str());
  std::printf("  wrote %s\n", rep_path.string().c_str());
  std::printf("  residual max: %s\n", fmt17(worst_residual(out.report)).c_str());
  const auto act = out.report.stats.find("action identity max");
  if (act != out.report.stats.end())
    std::printf("  action identity max: %s\n", fmt17(act->second).c_str());
  return 0;
}

// ------------------------------------------------------------------ verify

struct CheckRow {
  std::string name;
  int status = 0;  // 0 pass, 1 fail, 2 skip
  std::string detail;
};

int cmd_verify(const SystemFile& sys, const Options& opt) {
  const ProbeOptions probes = opt.probes();
  std::vector<CheckRow> rows;
  auto pass = [&](const std::string& n, const std::string& d = "") { rows.push_back({n, 0, d}); };
  auto fail = [&](const std::string& n, const std::string& d = "") { rows.push_back({n, 1, d}); };
  auto skip = [&](const std::string& n, const std::string& d) { rows.push_back({n, 2, d}); };

  BuiltSystem b = build(sys, probes);
  Classification cl = classify(b.theta, probes);
  if (structured(cl))
    pass("structure classification", headline(cl));
  else
    fail("structure classification", headline(cl));

  if (structured(cl)) {
    DissipationResult d = dissipation_form(b.theta, cl, probes);
    const bool formula = form_is_zero(d.sigma - b.sigma, probes) == ZeroTest::Zero;
    if (d.verified == ZeroTest::Zero && formula)
      pass("dissipation form", to_string(d.sigma));
    else
      fail("dissipation form", std::string("identity ") + zero_name(d.verified) +
                                   ", density formula " + (formula ? "matches" : "differs"));
  } else {
    skip("dissipation form", "no structure");
  }

  if (sys.is_hamiltonian) {
    skip("legendre compatibility", "momentum-side entry");
  } else if (b.reg.verdict != Regularity::Regular) {
    skip("legendre compatibility", "singular Lagrangian (rank " + std::to_string(b.reg.rank) +
                                       " of " + std::to_string(b.reg.dimension) + ")");
  } else {
    try {
      HamiltonianSystem h = hamiltonian_from_lagrangian(sys.density, sys.chart, probes);
      ChartMap fl = legendre_map(sys.density, sys.chart, h.chart);
      const ZeroTest ok = form_is_zero(pull_back(h.theta, fl) - b.theta, probes);
      if (ok == ZeroTest::Zero)
        pass("legendre compatibility", "pull-back reproduces the structure form");
      else
        fail("legendre compatibility", std::string("pull-back differs (") + zero_name(ok) + ")");
    } catch (const std::exception& e) {
      fail("legendre compatibility", e.what());
    }
  }

  if (!sys.has_simulation) {
    skip("integration checks", "no simulation block");
  } else if (sys.chart.m() == 1) {
    try {
      RunOutcome out = run_ode(sys, probes, sys.sim.dt, 1);
      const double thr = std::max(1e-8, std::pow(sys.sim.dt, 3));
      const double worst = worst_residual(out.report);
      if (worst < thr)
        pass("equation residuals", "max " + fmt17(worst) + ", tolerance " + fmt17(thr));
      else
        fail("equation residuals", "max " + fmt17(worst) + " exceeds " + fmt17(thr));
      const auto act = out.report.stats.find("action identity max");
      if (act == out.report.stats.end()) {
        skip("action identity", "needs a Lagrangian entry");
      } else if (act->second < thr) {
        pass("action identity", fmt17(act->second) + ", tolerance " + fmt17(thr));
      } else {
        fail("action identity", fmt17(act->second) + " exceeds " + fmt17(thr));
      }
    } catch (const SimulationError& e) {
      fail("equation residuals", e.what());
    }
  } else if (wave_supported(sys)) {
    try {
      // measurement runs keep every step so the scan works at the step scale
      RunOutcome full = run_wave(sys, probes, sys.sim.points, sys.sim.dt, 1);
      const WaveShape w = wave_shape(sys, probes);
      const double dx = sys.sim.bc == Boundary::Periodic
                            ? sys.sim.length / sys.sim.points
                            : sys.sim.length / (sys.sim.points - 1);

      const std::string fname = sys.chart.coordinate(sys.chart.field_coord(0)).name;
      const std::string key = "field " + fname + " max_linf";
      const double r_full = full.report.stats.count(key) ? full.report.stats.at(key) : 0.0;
      const int half_points = sys.sim.bc == Boundary::Periodic ? sys.sim.points / 2
                                                               : (sys.sim.points - 1) / 2 + 1;
      if (r_full < 1e-10) {
        pass("field residual convergence", "residual at the measurement floor (" +
                                               fmt17(r_full) + ")");
      } else if (half_points < 8) {
        skip("field residual convergence", "grid too small to coarsen");
      } else {
        RunOutcome half = run_wave(sys, probes, half_points, 2 * sys.sim.dt, 1);
        const double r_half = half.report.stats.count(key) ? half.report.stats.at(key) : 0.0;
        const double order = std::log2(r_half / r_full);
        if (order >= 1.5)
          pass("field residual convergence",
               "order " + fmt17(order) + " between " + std::to_string(half_points) + " and " +
                   std::to_string(sys.sim.points) + " points");
        else
          fail("field residual convergence", "order " + fmt17(order) + " below 1.5");
      }

      const double act = full.report.stats.at("action identity max");
      const double athr = std::max(1e-8, 20 * dx * dx);
      if (act < athr)
        pass("action identity", fmt17(act) + ", tolerance " + fmt17(athr));
      else
        fail("action identity", fmt17(act) + " exceeds " + fmt17(athr));

      // damping sign decides whether energy decay is expected at all
      bool nonnegative = true;
      {
        std::map<SymbolId, double> bind = param_bindings(sys);
        for (int k = 0; k <= 64; ++k) {
          bind[w.time_symbol] = sys.sim.t_end * k / 64.0;
          if (evaluate(w.damping, bind, sys.params) < 0) nonnegative = false;
        }
      }
      if (!nonnegative) {
        skip("energy decay", "damping changes sign on the time window");
      } else {
        const std::vector<double> e = wave_energy_series(full, w.rho, w.tau);
        const double tol = 1e-12 * std::max(1.0, e.front());
        bool monotone = true;
        for (std::size_t k = 1; k < e.size(); ++k)
          if (e[k] > e[k - 1] + tol) monotone = false;
        if (monotone)
          pass("energy decay", "from " + fmt17(e.front()) + " to " + fmt17(e.back()));
        else
          fail("energy decay", "energy increased beyond rounding");
      }
    } catch (const SimulationError& e) {
      fail("field residual convergence", e.what());
    }
  } else {
    skip("integration checks", "no integrator for this system shape");
  }

  int passed = 0, failed = 0, skipped = 0;
  for (const CheckRow& r : rows) (r.status == 0 ? passed : r.status == 1 ? failed : skipped)++;

  if (opt.format == "json") {
    nlohmann::json j;
    j["name"] = sys.name;
    j["passed"] = passed;
    j["failed"] = failed;
    j["skipped"] = skipped;
    j["checks"] = nlohmann::json::array();
    for (const CheckRow& r : rows) {
      nlohmann::json c;
      c["name"] = r.name;
      c["status"] = r.status == 0 ? "pass" : r.status == 1 ? "fail" : "skip";
      if (!r.detail.empty()) c["detail"] = r.detail;
      j["checks"].push_back(c);
    }
    std::printf("%s\n", j.dump(2).c_str());
  } else {
    std::printf("verify %s\n", sys.name.c_str());
    for (const CheckRow& r : rows) {
      const char* tag = r.status == 0 ? "PASS" : r.status == 1 ? "FAIL" : "skip";
      if (r.detail.empty())
        std::printf("%s %s\n", tag, r.name.c_str());
      else
        std::printf("%s %s (%s)\n", tag, r.name.c_str(), r.detail.c_str());
    }
    std::printf("verify %s: %d passed, %d failed, %d skipped\n", sys.name.c_str(), passed, failed,
                skipped);
  }
  return failed == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"symbolic and numeric toolkit for multicontact field theories"};
  app.require_subcommand(1);

  Options opt;
  app.add_option("--format", opt.format, "output format")
      ->check(CLI::IsMember({"text", "latex", "json"}));
  app.add_option("--out", opt.out_dir, "output directory for simulation artifacts");
  app.add_option("--seed", opt.seed, "seed for the numeric zero-test probes");

  std::string path;
  auto add = [&](const char* name, const char* desc) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->fallthrough();
    sub->add_option("file", path, "system description file")->required();
    return sub;
  };
  CLI::App* c_classify = add("classify", "report the (pre)multicontact structure of a system");
  CLI::App* c_derive = add("derive", "derive the field equations of a system");
  CLI::App* c_legendre = add("legendre", "compute the Legendre map and, when regular, its inverse");
  CLI::App* c_simulate = add("simulate", "integrate the system's simulation block");
  CLI::App* c_verify = add("verify", "run the structural and numerical invariant checks");

  CLI11_PARSE(app, argc, argv);

  try {
    SystemFile sys = load_system(path);
    if (c_classify->parsed()) return cmd_classify(sys, opt);
    if (c_derive->parsed()) return cmd_derive(sys, opt);
    if (c_legendre->parsed()) return cmd_legendre(sys, opt);
    if (c_simulate->parsed()) return cmd_simulate(sys, opt);
    if (c_verify->parsed()) return cmd_verify(sys, opt);
  } catch (const SystemFileError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const SimulationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const StructureError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const EvalError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
