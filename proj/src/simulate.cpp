#include "mcontact/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

namespace mcontact {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::map<SymbolId, double> intern_bindings(const std::map<std::string, double>& values) {
  std::map<SymbolId, double> out;
  for (const auto& [name, v] : values) out[intern_symbol(name)] = v;
  return out;
}

long step_count(double t_end, double dt) {
  if (!(dt > 0)) throw SimulationError("time step must be positive");
  long steps = std::lround(t_end / dt);
  if (steps < 1) throw SimulationError("integration window shorter than one step");
  return steps;
}

// fourth-order central differences; g(offset) samples around the stencil center
template <class G>
double fd_stencil(G&& g, int order, double h) {
  if (order == 0) return g(0);
  if (order == 1) return (g(-2) - 8 * g(-1) + 8 * g(1) - g(2)) / (12 * h);
  return (-g(-2) + 16 * g(-1) - 30 * g(0) + 16 * g(1) - g(2)) / (12 * h * h);
}

}  // namespace

OdeTrajectory integrate_ode(const VectorField& field, const OdeState& initial, double t_end,
                            double dt, const ParamTable& params,
                            const std::map<std::string, double>& param_values) {
  const Chart& c = field.chart;
  if (!c || c.m() != 1) throw StructureError("time integration needs a one-dimensional base");
  if (is_zero(field.component(c.base_coord(0)) - Expr::integer(1)) != ZeroTest::Zero)
    throw StructureError("evolution field must have a unit base component");
  if (static_cast<int>(initial.values.size()) != c.dim())
    throw StructureError("initial state size does not match the chart");

  const std::vector<int> fib = c.fiber_indices();
  std::vector<Expr> rhs;
  rhs.reserve(fib.size());
  for (int idx : fib) rhs.push_back(field.component(idx));

  std::map<SymbolId, double> bind = intern_bindings(param_values);
  const SymbolId tsym = c.coord_symbol(c.base_coord(0));

  std::vector<double> y;
  y.reserve(fib.size());
  for (int idx : fib) y.push_back(initial.values[static_cast<std::size_t>(idx)]);

  const long steps = step_count(t_end, dt);
  OdeTrajectory tr;
  tr.chart = c;
  tr.dt = dt;
  tr.states.reserve(static_cast<std::size_t>(steps) + 1);

  auto push = [&](double t, const std::vector<double>& z) {
    OdeState s;
    s.t = t;
    s.values.assign(static_cast<std::size_t>(c.dim()), 0.0);
    s.values[static_cast<std::size_t>(c.base_coord(0))] = t;
    for (std::size_t i = 0; i < fib.size(); ++i)
      s.values[static_cast<std::size_t>(fib[i])] = z[i];
    tr.states.push_back(std::move(s));
  };

  auto f = [&](double t, const std::vector<double>& z) {
    bind[tsym] = t;
    for (std::size_t i = 0; i < fib.size(); ++i) bind[c.coord_symbol(fib[i])] = z[i];
    std::vector<double> d(fib.size());
    for (std::size_t i = 0; i < fib.size(); ++i) d[i] = evaluate(rhs[i], bind, params);
    return d;
  };

  const double t0 = initial.t;
  push(t0, y);
  std::vector<double> tmp(y.size());
  for (long step = 1; step <= steps; ++step) {
    const double t = t0 + static_cast<double>(step - 1) * dt;
    const std::vector<double> k1 = f(t, y);
    for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
    const std::vector<double> k2 = f(t + 0.5 * dt, tmp);
    for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
    const std::vector<double> k3 = f(t + 0.5 * dt, tmp);
    for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + dt * k3[i];
    const std::vector<double> k4 = f(t + dt, tmp);
    for (std::size_t i = 0; i < y.size(); ++i)
      y[i] += dt / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    for (double v : y)
      if (!std::isfinite(v))
        throw SimulationError("non-finite state at step " + std::to_string(step));
    push(t0 + static_cast<double>(step) * dt, y);
  }
  return tr;
}

namespace {

struct WaveArrays {
  std::vector<double> u, ut, st;
};

// du = ut; dut = (tau/rho) uxx - g ut; dst = rho ut^2/2 - tau ux^2/2 - g st
void wave_rhs(const WaveConfig& cfg, Boundary bc, double dx, double g, const WaveArrays& s,
              WaveArrays& d) {
  const std::size_t J = s.u.size();
  const double c2 = cfg.tau / cfg.rho;
  d.u.assign(J, 0.0);
  d.ut.assign(J, 0.0);
  d.st.assign(J, 0.0);
  auto density = [&](double ut, double ux, double st) {
    return 0.5 * cfg.rho * ut * ut - 0.5 * cfg.tau * ux * ux - g * st;
  };
  if (bc == Boundary::Periodic) {
    for (std::size_t j = 0; j < J; ++j) {
      const std::size_t jm = (j + J - 1) % J;
      const std::size_t jp = (j + 1) % J;
      const double uxx = (s.u[jp] - 2 * s.u[j] + s.u[jm]) / (dx * dx);
      const double ux = (s.u[jp] - s.u[jm]) / (2 * dx);
      d.u[j] = s.ut[j];
      d.ut[j] = c2 * uxx - g * s.ut[j];
      d.st[j] = density(s.ut[j], ux, s.st[j]);
    }
    return;
  }
  // Dirichlet: endpoints pinned at zero, one-sided slopes feed the density
  for (std::size_t j = 1; j + 1 < J; ++j) {
    const double uxx = (s.u[j + 1] - 2 * s.u[j] + s.u[j - 1]) / (dx * dx);
    const double ux = (s.u[j + 1] - s.u[j - 1]) / (2 * dx);
    d.u[j] = s.ut[j];
    d.ut[j] = c2 * uxx - g * s.ut[j];
    d.st[j] = density(s.ut[j], ux, s.st[j]);
  }
  const double ux0 = (-3 * s.u[0] + 4 * s.u[1] - s.u[2]) / (2 * dx);
  const double uxJ = (3 * s.u[J - 1] - 4 * s.u[J - 2] + s.u[J - 3]) / (2 * dx);
  d.st[0] = density(s.ut[0], ux0, s.st[0]);
  d.st[J - 1] = density(s.ut[J - 1], uxJ, s.st[J - 1]);
}

}  // namespace

WaveTrajectory integrate_wave(const WaveConfig& cfg, const GridState& initial, double t_end,
                              double dt, int stride) {
  const std::size_t J = initial.u.size();
  if (J < 8) throw StructureError("grid needs at least eight points");
  if (initial.ut.size() != J || initial.st.size() != J)
    throw StructureError("grid arrays must share one length");
  if (!(initial.dx > 0)) throw SimulationError("grid spacing must be positive");
  if (!(cfg.rho > 0) || !(cfg.tau > 0)) throw SimulationError("rho and tau must be positive");
  if (stride < 1) stride = 1;

  const double wave_speed = std::sqrt(cfg.tau / cfg.rho);
  const long steps = step_count(t_end, dt);
  const double cfl = wave_speed * dt / initial.dx;
  if (cfl > cfg.cfl_limit)
    throw SimulationError("CFL number " + fmt17(cfl) + " exceeds the limit " +
                          fmt17(cfg.cfl_limit));

  std::map<SymbolId, double> bind = intern_bindings(cfg.param_values);
  auto damping_at = [&](double t) {
    bind[cfg.time_symbol] = t;
    return evaluate(cfg.damping, bind, cfg.params);
  };

  WaveArrays y{initial.u, initial.ut, initial.st};
  WaveArrays k1, k2, k3, k4, tmp;
  tmp.u.resize(J);
  tmp.ut.resize(J);
  tmp.st.resize(J);

  WaveTrajectory tr;
  tr.dt = static_cast<double>(stride) * dt;
  auto push = [&](double t) {
    GridState g = initial;
    g.t = t;
    g.cfl = cfl;
    g.u = y.u;
    g.ut = y.ut;
    g.st = y.st;
    tr.states.push_back(std::move(g));
  };
  auto axpy = [&](double a, const WaveArrays& dir) {
    for (std::size_t j = 0; j < J; ++j) {
      tmp.u[j] = y.u[j] + a * dir.u[j];
      tmp.ut[j] = y.ut[j] + a * dir.ut[j];
      tmp.st[j] = y.st[j] + a * dir.st[j];
    }
  };

  const double t0 = initial.t;
  push(t0);
  for (long step = 1; step <= steps; ++step) {
    const double t = t0 + static_cast<double>(step - 1) * dt;
    wave_rhs(cfg, initial.bc, initial.dx, damping_at(t), y, k1);
    axpy(0.5 * dt, k1);
    wave_rhs(cfg, initial.bc, initial.dx, damping_at(t + 0.5 * dt), tmp, k2);
    axpy(0.5 * dt, k2);
    wave_rhs(cfg, initial.bc, initial.dx, damping_at(t + 0.5 * dt), tmp, k3);
    axpy(dt, k3);
    wave_rhs(cfg, initial.bc, initial.dx, damping_at(t + dt), tmp, k4);
    double biggest = 0;
    for (std::size_t j = 0; j < J; ++j) {
      y.u[j] += dt / 6.0 * (k1.u[j] + 2 * k2.u[j] + 2 * k3.u[j] + k4.u[j]);
      y.ut[j] += dt / 6.0 * (k1.ut[j] + 2 * k2.ut[j] + 2 * k3.ut[j] + k4.ut[j]);
      y.st[j] += dt / 6.0 * (k1.st[j] + 2 * k2.st[j] + 2 * k3.st[j] + k4.st[j]);
      biggest = std::max(biggest, std::abs(y.u[j]));
      biggest = std::max(biggest, std::abs(y.ut[j]));
    }
    if (!std::isfinite(biggest) || biggest > cfg.blowup)
      throw SimulationError("instability detected at step " + std::to_string(step));
    if (step % stride == 0 || step == steps) push(t0 + static_cast<double>(step) * dt);
  }
  return tr;
}

namespace {

// how a symbol of the equation chart gets its value along a trajectory
struct Resolver {
  enum Kind { TimeAxis, SpaceAxis, Series, AlwaysZero } kind = AlwaysZero;
  int series = -1;  // trajectory column id, meaning fixed by the caller
  int dt_order = 0;
  int dx_order = 0;
};

// Resolve the wanted fiber coordinates and jet symbols of the equation chart
// to derivatives of stored trajectory series. `lookup(name)` returns the
// column id of a stored series or -1. Velocity coordinates without a stored
// series fall back to time/space derivatives of their field; contact
// components without a stored series follow the zero gauge.
std::map<SymbolId, Resolver> build_resolvers(
    const Chart& ec, const JetContext& jets, const std::set<SymbolId>& wanted,
    const std::function<int(const std::string&)>& lookup) {
  std::map<SymbolId, Resolver> out;

  std::function<Resolver(int)> resolve_coord = [&](int idx) -> Resolver {
    const Coordinate& co = ec.coordinate(idx);
    Resolver r;
    if (co.role == Role::Base) {
      r.kind = (co.base_index == 0) ? Resolver::TimeAxis : Resolver::SpaceAxis;
      return r;
    }
    const int sid = lookup(co.name);
    if (sid >= 0) {
      r.kind = Resolver::Series;
      r.series = sid;
      return r;
    }
    if (co.role == Role::Velocity) {
      r = resolve_coord(ec.field_coord(co.field_index));
      if (r.kind != Resolver::Series)
        throw StructureError("trajectory does not record field '" +
                             ec.coordinate(ec.field_coord(co.field_index)).name + "'");
      (co.base_index == 0 ? r.dt_order : r.dx_order) += 1;
      return r;
    }
    if (co.role == Role::Contact) return r;  // zero gauge
    throw StructureError("trajectory does not record '" + co.name + "'");
  };

  for (int idx = 0; idx < ec.dim(); ++idx) {
    const SymbolId sym = ec.coord_symbol(idx);
    if (wanted.count(sym)) out.emplace(sym, resolve_coord(idx));
  }
  // first jets cover velocity-chart second jets too: the first jet of a
  // velocity coordinate is the second-jet symbol of its field
  for (int f : ec.fiber_indices())
    for (int mu = 0; mu < ec.m(); ++mu) {
      const SymbolId sym = jets.first_jet(f, mu).node().symbol;
      if (!wanted.count(sym) || out.count(sym)) continue;
      Resolver r = resolve_coord(f);
      if (r.kind == Resolver::Series) (mu == 0 ? r.dt_order : r.dx_order) += 1;
      out.emplace(sym, r);
    }
  for (int i = 0; i < ec.n_fields(); ++i)
    for (int mu = 0; mu < ec.m(); ++mu)
      for (int nu = mu; nu < ec.m(); ++nu) {
        const SymbolId sym = jets.second_jet(i, mu, nu).node().symbol;
        if (!wanted.count(sym) || out.count(sym)) continue;
        Resolver r = resolve_coord(ec.field_coord(i));
        r.dt_order = (mu == 0 ? 1 : 0) + (nu == 0 ? 1 : 0);
        r.dx_order = (mu == 0 ? 0 : 1) + (nu == 0 ? 0 : 1);
        out.emplace(sym, r);
      }
  return out;
}

void check_bindable(const std::set<SymbolId>& wanted,
                    const std::map<SymbolId, Resolver>& resolvers,
                    const std::map<SymbolId, double>& param_bind) {
  const SymbolId pi_sym = intern_symbol("pi");
  for (SymbolId s : wanted) {
    if (resolvers.count(s) || param_bind.count(s) || s == pi_sym) continue;
    throw StructureError("cannot bind symbol '" + symbol_name(s) + "' along the trajectory");
  }
}

std::set<SymbolId> wanted_symbols(const EquationSet& eqs) {
  std::set<SymbolId> wanted;
  for (const auto& eq : eqs.equations) collect_free_symbols(eq.residual, wanted);
  return wanted;
}

void finish_report(RunReport& rep, const EquationSet& eqs) {
  for (const auto& eq : eqs.equations) {
    const auto& linf = rep.series[eq.name + " linf"];
    const auto& l2 = rep.series[eq.name + " l2"];
    rep.stats[eq.name + " max_linf"] =
        linf.empty() ? 0.0 : *std::max_element(linf.begin(), linf.end());
    rep.stats[eq.name + " max_l2"] = l2.empty() ? 0.0 : *std::max_element(l2.begin(), l2.end());
  }
}

}  // namespace

RunReport residual_norms(const OdeTrajectory& tr, const EquationSet& eqs,
                         const std::map<std::string, double>& param_values,
                         const ParamTable& params) {
  const Chart& ec = eqs.chart;
  if (!ec || ec.m() != 1)
    throw StructureError("the trajectory residual scan needs equations over an m = 1 chart");
  if (!tr.chart) throw StructureError("trajectory carries no chart");
  const int K = static_cast<int>(tr.states.size());
  if (K < 5) throw StructureError("residual scan needs at least five snapshots");

  const JetContext jets(ec);
  const std::set<SymbolId> wanted = wanted_symbols(eqs);
  auto lookup = [&](const std::string& name) {
    const int idx = tr.chart.index_of(name);
    if (idx < 0 || tr.chart.coordinate(idx).role == Role::Base) return -1;
    return idx;
  };
  const auto resolvers = build_resolvers(ec, jets, wanted, lookup);
  std::map<SymbolId, double> bind = intern_bindings(param_values);
  check_bindable(wanted, resolvers, bind);

  RunReport rep;
  rep.stats["snapshots"] = K;
  rep.stats["dt"] = tr.dt;
  for (int k = 2; k + 2 < K; ++k) {
    rep.times.push_back(tr.states[static_cast<std::size_t>(k)].t);
    for (const auto& [sym, r] : resolvers) {
      double v = 0;
      if (r.kind == Resolver::TimeAxis) {
        v = tr.states[static_cast<std::size_t>(k)].t;
      } else if (r.kind == Resolver::Series) {
        v = fd_stencil(
            [&](int o) {
              return tr.states[static_cast<std::size_t>(k + o)]
                  .values[static_cast<std::size_t>(r.series)];
            },
            r.dt_order, tr.dt);
      }
      bind[sym] = v;
    }
    for (const auto& eq : eqs.equations) {
      const double val = std::abs(evaluate(eq.residual, bind, params));
      rep.series[eq.name + " linf"].push_back(val);
      rep.series[eq.name + " l2"].push_back(val);
    }
  }
  finish_report(rep, eqs);
  return rep;
}

namespace {

// trailing snapshot may sit closer than the uniform stride; drop it then
int uniform_snapshots(const WaveTrajectory& tr) {
  const int K = static_cast<int>(tr.states.size());
  if (K >= 2) {
    const double last = tr.states[static_cast<std::size_t>(K - 1)].t -
                        tr.states[static_cast<std::size_t>(K - 2)].t;
    if (std::abs(last - tr.dt) > 1e-9 * std::max(1.0, tr.dt)) return K - 1;
  }
  return K;
}

}  // namespace

RunReport residual_norms(const WaveTrajectory& tr, const EquationSet& eqs,
                         const std::map<std::string, double>& param_values,
                         const ParamTable& params) {
  const Chart& ec = eqs.chart;
  if (!ec || ec.m() != 2 || ec.n_fields() != 1)
    throw StructureError("the grid residual scan needs one field over a two-dimensional base");
  const int K = static_cast<int>(tr.states.size());
  if (K < 5) throw StructureError("residual scan needs at least five snapshots");
  const GridState& g0 = tr.states.front();
  const int J = static_cast<int>(g0.u.size());
  if (J < 8) throw StructureError("residual scan needs at least eight grid points");

  const int usable = uniform_snapshots(tr);
  if (usable < 5) throw StructureError("residual scan needs at least five uniform snapshots");

  const JetContext jets(ec);
  const std::set<SymbolId> wanted = wanted_symbols(eqs);
  const std::string field_name = ec.coordinate(ec.field_coord(0)).name;
  const int vcoord = ec.velocity_coord(0, 0);
  const std::string vel_name = vcoord >= 0 ? ec.coordinate(vcoord).name : std::string();
  const int ccoord = ec.has_contacts() ? ec.contact_coord(0) : -1;
  const std::string contact_name = ccoord >= 0 ? ec.coordinate(ccoord).name : std::string();
  auto lookup = [&](const std::string& name) {
    if (name == field_name) return 0;
    if (!vel_name.empty() && name == vel_name) return 1;
    if (!contact_name.empty() && name == contact_name) return 2;
    return -1;
  };
  const auto resolvers = build_resolvers(ec, jets, wanted, lookup);
  std::map<SymbolId, double> bind = intern_bindings(param_values);
  check_bindable(wanted, resolvers, bind);

  const bool periodic = g0.bc == Boundary::Periodic;
  auto column = [&](int sid, int k) -> const std::vector<double>& {
    const GridState& s = tr.states[static_cast<std::size_t>(k)];
    return sid == 0 ? s.u : sid == 1 ? s.ut : s.st;
  };
  auto value = [&](const Resolver& r, int k, int j) -> double {
    auto spatial = [&](int kk) {
      return fd_stencil(
          [&](int o) {
            int jj = j + o;
            if (periodic) jj = ((jj % J) + J) % J;
            return column(r.series, kk)[static_cast<std::size_t>(jj)];
          },
          r.dx_order, g0.dx);
    };
    return fd_stencil([&](int o) { return spatial(k + o); }, r.dt_order, tr.dt);
  };

  const int jlo = periodic ? 0 : 2;
  const int jhi = periodic ? J - 1 : J - 3;

  RunReport rep;
  rep.stats["snapshots"] = K;
  rep.stats["dt"] = tr.dt;
  rep.stats["dx"] = g0.dx;
  rep.stats["cfl"] = g0.cfl;
  for (int k = 2; k + 2 < usable; ++k) {
    const GridState& snap = tr.states[static_cast<std::size_t>(k)];
    rep.times.push_back(snap.t);
    std::map<std::string, double> acc;
    std::vector<double> linf(eqs.equations.size(), 0.0);
    std::vector<double> l2(eqs.equations.size(), 0.0);
    for (int j = jlo; j <= jhi; ++j) {
      for (const auto& [sym, r] : resolvers) {
        double v = 0;
        if (r.kind == Resolver::TimeAxis)
          v = snap.t;
        else if (r.kind == Resolver::SpaceAxis)
          v = snap.x0 + j * snap.dx;
        else if (r.kind == Resolver::Series)
          v = value(r, k, j);
        bind[sym] = v;
      }
      for (std::size_t e = 0; e < eqs.equations.size(); ++e) {
        const double val = evaluate(eqs.equations[e].residual, bind, params);
        linf[e] = std::max(linf[e], std::abs(val));
        l2[e] += val * val * g0.dx;
      }
    }
    for (std::size_t e = 0; e < eqs.equations.size(); ++e) {
      rep.series[eqs.equations[e].name + " linf"].push_back(linf[e]);
      rep.series[eqs.equations[e].name + " l2"].push_back(std::sqrt(l2[e]));
    }
  }
  finish_report(rep, eqs);
  return rep;
}

namespace {

EquationSet divergence_identity(const Expr& lagrangian, const Chart& lc) {
  if (!lc || !lc.has_contacts())
    throw StructureError("the action identity needs a chart with contact coordinates");
  const JetContext jets(lc);
  Expr residual = -lagrangian;
  for (int mu = 0; mu < lc.m(); ++mu)
    residual = residual + jets.first_jet(lc.contact_coord(mu), mu);
  EquationSet es;
  es.chart = lc;
  es.equations.push_back({"action identity", residual, EquationKind::Divergence});
  return es;
}

}  // namespace

double action_identity_check(const OdeTrajectory& tr, const Expr& lagrangian,
                             const Chart& lchart,
                             const std::map<std::string, double>& param_values,
                             const ParamTable& params) {
  const RunReport rep = residual_norms(tr, divergence_identity(lagrangian, lchart),
                                       param_values, params);
  return rep.stats.at("action identity max_linf");
}

// Checks the discrete identity the scheme integrates: the time derivative of
// the stored contact density against the density evaluated with the scheme's
// own second-order slope. Time differences stay fourth order.
double action_identity_check(const WaveTrajectory& tr, const Expr& lagrangian,
                             const Chart& lchart,
                             const std::map<std::string, double>& param_values,
                             const ParamTable& params) {
  if (!lchart || lchart.m() != 2 || lchart.n_fields() != 1 || !lchart.has_contacts() ||
      !lchart.has_velocities())
    throw StructureError(
        "the grid action identity needs one velocity-chart field over a two-dimensional base");
  const int K = static_cast<int>(tr.states.size());
  if (K < 5) throw StructureError("the action identity needs at least five snapshots");
  const int usable = uniform_snapshots(tr);
  if (usable < 5) throw StructureError("the action identity needs at least five uniform snapshots");
  const GridState& g0 = tr.states.front();
  const int J = static_cast<int>(g0.u.size());
  if (J < 8) throw StructureError("the action identity needs at least eight grid points");

  std::map<SymbolId, double> bind = intern_bindings(param_values);
  const SymbolId tsym = lchart.coord_symbol(lchart.base_coord(0));
  const SymbolId xsym = lchart.coord_symbol(lchart.base_coord(1));
  const SymbolId usym = lchart.coord_symbol(lchart.field_coord(0));
  const SymbolId utsym = lchart.coord_symbol(lchart.velocity_coord(0, 0));
  const SymbolId uxsym = lchart.coord_symbol(lchart.velocity_coord(0, 1));
  const SymbolId stsym = lchart.coord_symbol(lchart.contact_coord(0));
  const SymbolId sxsym = lchart.coord_symbol(lchart.contact_coord(1));
  bind[sxsym] = 0.0;  // zero gauge

  const bool periodic = g0.bc == Boundary::Periodic;
  const int jlo = periodic ? 0 : 2;
  const int jhi = periodic ? J - 1 : J - 3;
  double worst = 0;
  for (int k = 2; k + 2 < usable; ++k) {
    const GridState& snap = tr.states[static_cast<std::size_t>(k)];
    bind[tsym] = snap.t;
    for (int j = jlo; j <= jhi; ++j) {
      const double dsdt = fd_stencil(
          [&](int o) {
            return tr.states[static_cast<std::size_t>(k + o)].st[static_cast<std::size_t>(j)];
          },
          1, tr.dt);
      int jp = j + 1, jm = j - 1;
      if (periodic) {
        jp %= J;
        jm = (jm + J) % J;
      }
      bind[xsym] = snap.x0 + j * snap.dx;
      bind[usym] = snap.u[static_cast<std::size_t>(j)];
      bind[utsym] = snap.ut[static_cast<std::size_t>(j)];
      bind[uxsym] = (snap.u[static_cast<std::size_t>(jp)] - snap.u[static_cast<std::size_t>(jm)]) /
                    (2 * snap.dx);
      bind[stsym] = snap.st[static_cast<std::size_t>(j)];
      worst = std::max(worst, std::abs(dsdt - evaluate(lagrangian, bind, params)));
    }
  }
  return worst;
}

double herglotz_variation_check(const OdeTrajectory& tr, const Expr& lagrangian,
                                const Chart& lchart, const Expr& bump,
                                const std::map<std::string, double>& param_values,
                                const ParamTable& params, double epsilon) {
  if (!lchart || lchart.m() != 1 || lchart.n_fields() != 1 || !lchart.has_contacts())
    throw StructureError("the first-variation check needs one field over a one-dimensional base");
  if (!(epsilon > 0)) throw SimulationError("epsilon must be positive");
  const int K = static_cast<int>(tr.states.size());
  if (K < 5) throw StructureError("the first-variation check needs at least five snapshots");

  const SymbolId tsym = lchart.coord_symbol(lchart.base_coord(0));
  const SymbolId qsym = lchart.coord_symbol(lchart.field_coord(0));
  const int vcoord = lchart.velocity_coord(0, 0);
  if (vcoord < 0) throw StructureError("the first-variation check needs a velocity coordinate");
  const SymbolId vsym = lchart.coord_symbol(vcoord);
  const SymbolId ssym = lchart.coord_symbol(lchart.contact_coord(0));

  std::map<SymbolId, double> param_bind = intern_bindings(param_values);
  const SymbolId pi_sym = intern_symbol("pi");
  for (SymbolId s : free_symbols(bump))
    if (s != tsym && !param_bind.count(s) && s != pi_sym)
      throw StructureError("perturbation may only involve the time coordinate and parameters");

  const int qidx = tr.chart.index_of(symbol_name(qsym));
  const int sidx = tr.chart.index_of(symbol_name(ssym));
  if (qidx < 0 || sidx < 0)
    throw StructureError("trajectory does not record the field and contact coordinates");

  std::vector<double> qs(static_cast<std::size_t>(K)), ss(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    qs[static_cast<std::size_t>(k)] =
        tr.states[static_cast<std::size_t>(k)].values[static_cast<std::size_t>(qidx)];
    ss[static_cast<std::size_t>(k)] =
        tr.states[static_cast<std::size_t>(k)].values[static_cast<std::size_t>(sidx)];
  }
  const double h = tr.dt;

  // node slopes: fourth order inside, second order at the edges
  std::vector<double> slope(static_cast<std::size_t>(K));
  auto q = [&](int k) { return qs[static_cast<std::size_t>(k)]; };
  slope[0] = (-3 * q(0) + 4 * q(1) - q(2)) / (2 * h);
  slope[1] = (q(2) - q(0)) / (2 * h);
  for (int k = 2; k + 2 < K; ++k)
    slope[static_cast<std::size_t>(k)] =
        (q(k - 2) - 8 * q(k - 1) + 8 * q(k + 1) - q(k + 2)) / (12 * h);
  slope[static_cast<std::size_t>(K - 2)] = (q(K - 1) - q(K - 3)) / (2 * h);
  slope[static_cast<std::size_t>(K - 1)] = (3 * q(K - 1) - 4 * q(K - 2) + q(K - 3)) / (2 * h);

  const Expr dbump = differentiate(bump, tsym);
  std::map<SymbolId, double> bump_bind = param_bind;
  auto eta = [&](double t) {
    bump_bind[tsym] = t;
    return evaluate(bump, bump_bind, params);
  };
  auto eta_dot = [&](double t) {
    bump_bind[tsym] = t;
    return evaluate(dbump, bump_bind, params);
  };

  std::map<SymbolId, double> bind = param_bind;
  auto density = [&](double t, double qv, double vv, double sv) {
    bind[tsym] = t;
    bind[qsym] = qv;
    bind[vsym] = vv;
    bind[ssym] = sv;
    return evaluate(lagrangian, bind, params);
  };

  auto action = [&](double eps) {
    double s = ss[0];
    for (int k = 0; k + 1 < K; ++k) {
      const double t = tr.states[static_cast<std::size_t>(k)].t;
      const double tm = t + 0.5 * h;
      const double t1 = t + h;
      const double q0 = q(k), q1v = q(k + 1);
      const double m0 = slope[static_cast<std::size_t>(k)];
      const double m1 = slope[static_cast<std::size_t>(k + 1)];
      // cubic Hermite values at the midpoint
      const double qm = 0.5 * (q0 + q1v) + h * (m0 - m1) / 8;
      const double vm = 1.5 * (q1v - q0) / h - 0.25 * (m0 + m1);
      const double k1 = density(t, q0 + eps * eta(t), m0 + eps * eta_dot(t), s);
      const double k2 = density(tm, qm + eps * eta(tm), vm + eps * eta_dot(tm), s + 0.5 * h * k1);
      const double k3 = density(tm, qm + eps * eta(tm), vm + eps * eta_dot(tm), s + 0.5 * h * k2);
      const double k4 = density(t1, q1v + eps * eta(t1), m1 + eps * eta_dot(t1), s + h * k3);
      s += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return s;
  };

  return std::abs(action(epsilon) - action(-epsilon)) / (2 * epsilon);
}

std::vector<double> wave_energy_series(const WaveTrajectory& tr, double rho, double tau) {
  std::vector<double> out;
  out.reserve(tr.states.size());
  for (const GridState& g : tr.states) {
    const std::size_t J = g.u.size();
    double e = 0;
    for (std::size_t j = 0; j < J; ++j) {
      double ux;
      if (g.bc == Boundary::Periodic) {
        ux = (g.u[(j + 1) % J] - g.u[(j + J - 1) % J]) / (2 * g.dx);
      } else if (j == 0) {
        ux = (-3 * g.u[0] + 4 * g.u[1] - g.u[2]) / (2 * g.dx);
      } else if (j + 1 == J) {
        ux = (3 * g.u[J - 1] - 4 * g.u[J - 2] + g.u[J - 3]) / (2 * g.dx);
      } else {
        ux = (g.u[j + 1] - g.u[j - 1]) / (2 * g.dx);
      }
      e += (0.5 * rho * g.ut[j] * g.ut[j] + 0.5 * tau * ux * ux) * g.dx;
    }
    out.push_back(e);
  }
  return out;
}

double mode_amplitude(const GridState& g, int mode) {
  if (g.bc != Boundary::Periodic)
    throw StructureError("mode projection needs a periodic grid");
  const std::size_t J = g.u.size();
  const double length = g.dx * static_cast<double>(J);
  double acc = 0;
  for (std::size_t j = 0; j < J; ++j)
    acc += g.u[j] * std::sin(2 * M_PI * mode * (static_cast<double>(j) * g.dx) / length);
  return 2 * acc / static_cast<double>(J);
}

double trapezoid(const std::vector<double>& y, double dt) {
  if (y.size() < 2) return 0;
  double acc = 0;
  for (std::size_t i = 0; i + 1 < y.size(); ++i) acc += 0.5 * (y[i] + y[i + 1]);
  return acc * dt;
}

namespace {

std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

void append_array(std::string& out, const std::vector<double>& v) {
  out.push_back('[');
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out.push_back(',');
    out += fmt17(v[i]);
  }
  out.push_back(']');
}

}  // namespace

std::string RunReport::json() const {
  std::string out = "{\"series\":{";
  bool first = true;
  for (const auto& [name, v] : series) {
    if (!first) out.push_back(',');
    first = false;
    out += "\"" + json_escape(name) + "\":";
    append_array(out, v);
  }
  out += "},\"stats\":{";
  first = true;
  for (const auto& [name, v] : stats) {
    if (!first) out.push_back(',');
    first = false;
    out += "\"" + json_escape(name) + "\":" + fmt17(v);
  }
  out += "},\"times\":";
  append_array(out, times);
  out.push_back('}');
  return out;
}

std::string to_csv(const OdeTrajectory& tr) {
  std::string out = "t";
  const std::vector<int> fib = tr.chart.fiber_indices();
  for (int idx : fib) out += "," + tr.chart.coordinate(idx).name;
  out.push_back('\n');
  for (const OdeState& s : tr.states) {
    out += fmt17(s.t);
    for (int idx : fib) out += "," + fmt17(s.values[static_cast<std::size_t>(idx)]);
    out.push_back('\n');
  }
  return out;
}

std::string to_csv(const WaveTrajectory& tr) {
  std::string out = "t,x,u,u_t,s_t\n";
  for (const GridState& g : tr.states)
    for (std::size_t j = 0; j < g.u.size(); ++j) {
      out += fmt17(g.t);
      out += "," + fmt17(g.x0 + static_cast<double>(j) * g.dx);
      out += "," + fmt17(g.u[j]);
      out += "," + fmt17(g.ut[j]);
      out += "," + fmt17(g.st[j]);
      out.push_back('\n');
    }
  return out;
}

}  // namespace mcontact
