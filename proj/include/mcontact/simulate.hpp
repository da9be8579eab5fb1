#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcontact/equations.hpp"
#include "mcontact/form.hpp"

namespace mcontact {

struct SimulationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OdeState {
  double t = 0;
  std::vector<double> values;  // one slot per chart coordinate; the base slot mirrors t
};

struct OdeTrajectory {
  Chart chart;
  double dt = 0;
  std::vector<OdeState> states;
};

// classical fixed-step RK4 along a transversal evolution field (unit base
// component); scalar parameters bind by name, opaque functions through params
OdeTrajectory integrate_ode(const VectorField& field, const OdeState& initial, double t_end,
                            double dt, const ParamTable& params = {},
                            const std::map<std::string, double>& param_values = {});

enum class Boundary { Periodic, Dirichlet0 };

struct GridState {
  double t = 0;
  double x0 = 0;
  double dx = 0;
  double cfl = 0;  // recorded by the integrator
  Boundary bc = Boundary::Periodic;
  std::vector<double> u;   // displacement
  std::vector<double> ut;  // velocity
  std::vector<double> st;  // time component of the contact density; the space
                           // component stays identically zero by gauge choice
};

struct WaveConfig {
  double rho = 1;
  double tau = 1;
  Expr damping;            // expression in the time symbol; default zero
  SymbolId time_symbol = 0;
  ParamTable params;
  std::map<std::string, double> param_values;
  double cfl_limit = 0.9;
  double blowup = 1e6;
};

struct WaveTrajectory {
  double dt = 0;  // snapshot spacing (stride * step)
  std::vector<GridState> states;
};

// method of lines for the damped wave equation: second-order central
// differences in space, RK4 in time, the contact density advanced pointwise
// by the Lagrangian. Refuses to start above the CFL limit; aborts on blowup.
// Snapshots are kept every `stride` steps plus the final state.
WaveTrajectory integrate_wave(const WaveConfig& cfg, const GridState& initial, double t_end,
                              double dt, int stride = 1);

struct RunReport {
  std::map<std::string, double> stats;
  std::vector<double> times;
  std::map<std::string, std::vector<double>> series;
  std::string json() const;  // sorted keys, floats at 17 significant digits
};

// Equation residuals evaluated along the trajectory with fourth-order central
// differences supplying the jet values. Per snapshot each equation gets an
// L-infinity and an L2 entry; stats hold the maxima over the scan window.
RunReport residual_norms(const OdeTrajectory& tr, const EquationSet& eqs,
                         const std::map<std::string, double>& param_values = {},
                         const ParamTable& params = {});
RunReport residual_norms(const WaveTrajectory& tr, const EquationSet& eqs,
                         const std::map<std::string, double>& param_values = {},
                         const ParamTable& params = {});

// max abs of (discrete contact divergence - L) over the scan window
double action_identity_check(const OdeTrajectory& tr, const Expr& lagrangian,
                             const Chart& lchart,
                             const std::map<std::string, double>& param_values = {},
                             const ParamTable& params = {});
double action_identity_check(const WaveTrajectory& tr, const Expr& lagrangian,
                             const Chart& lchart,
                             const std::map<std::string, double>& param_values = {},
                             const ParamTable& params = {});

// Central-difference derivative of the constrained action s(T) under a
// compactly supported perturbation of the field: the contact equation is
// re-integrated along the perturbed curve with cubic Hermite interpolation.
// Vanishes at solutions, stays O(1) away from them.
double herglotz_variation_check(const OdeTrajectory& tr, const Expr& lagrangian,
                                const Chart& lchart, const Expr& bump,
                                const std::map<std::string, double>& param_values = {},
                                const ParamTable& params = {}, double epsilon = 1e-5);

// sum of (rho ut^2 + tau ux^2)/2 dx with central differences for ux
std::vector<double> wave_energy_series(const WaveTrajectory& tr, double rho, double tau);

// discrete projection of u onto sin(2 pi k (x - x0) / length), periodic grids
double mode_amplitude(const GridState& g, int mode);

double trapezoid(const std::vector<double>& y, double dt);

std::string to_csv(const OdeTrajectory& tr);
std::string to_csv(const WaveTrajectory& tr);

}  // namespace mcontact
