#pragma once

#include <map>
#include <string>
#include <vector>

#include "mcontact/equations.hpp"
#include "mcontact/lagrangian.hpp"
#include "mcontact/section.hpp"

namespace mcontact {

// momentum-side data on a chart with momentum and contact coordinates
struct HamiltonianSystem {
  Chart chart;
  Expr density;  // the Hamiltonian function H
  Form theta;    // ds^mu ^ d^{m-1}x_mu - p_i^mu dy^i ^ d^{m-1}x_mu + H d^m x
  Form sigma;    // (dH/ds^mu) dx^mu
};

Form build_theta_H(const Expr& H, const Chart& chart);
HamiltonianSystem make_hamiltonian_system(const Expr& H, const Chart& chart);

// momentum chart sharing the base, field, contact and parameter data of a
// velocity chart; momenta get the default naming scheme
Chart momentum_chart(const Chart& velocity_chart);

// fiber derivative: p_i^mu maps to dL/dy^i_mu, every other coordinate to the
// same-named source coordinate
ChartMap legendre_map(const Expr& L, const Chart& source, const Chart& target);
ChartMap legendre_map(const Expr& L, const Chart& source);

struct NewtonFailure : EvalError {
  std::vector<double> last_iterate;
  double residual;
  NewtonFailure(const std::string& msg, std::vector<double> last, double res)
      : EvalError(msg), last_iterate(std::move(last)), residual(res) {}
};

// Inverse of the fiber derivative. Lagrangians quadratic in the velocities
// invert in closed form; anything else gets a Newton handle solving
// dL/dv = p pointwise.
struct LegendreInverse {
  bool closed_form = false;
  ChartMap inverse;  // momentum chart -> velocity chart, valid when closed_form

  Chart source;  // velocity chart
  Chart target;  // momentum chart
  Expr density;
  std::vector<Expr> momentum_rows;  // dL/dv, field-major (i*m + mu)
  ExprMatrix hessian;
  double tolerance = 1e-12;
  int max_iterations = 50;

  // Newton solve for the velocity values at a momentum-chart point; the point
  // must bind the momenta plus every non-velocity coordinate the Lagrangian
  // uses. Starts from zero unless an initial iterate is given.
  std::vector<double> velocities(const std::map<SymbolId, double>& point,
                                 const ParamTable& params = {},
                                 std::vector<double> initial = {}) const;
  // sum p v - L through the numeric inverse
  double hamiltonian_value(const std::map<SymbolId, double>& point,
                           const ParamTable& params = {}) const;
};

LegendreInverse invert_legendre(const Expr& L, const Chart& source, const Chart& target,
                                const ProbeOptions& opts = {});
LegendreInverse invert_legendre(const Expr& L, const Chart& source,
                                const ProbeOptions& opts = {});

// H = sum p v - L through the closed-form inverse; checks that the pull-back
// of the momentum-side structure form matches the velocity-side form
HamiltonianSystem hamiltonian_from_lagrangian(const Expr& L, const Chart& source,
                                              const Chart& target,
                                              const ProbeOptions& opts = {});
HamiltonianSystem hamiltonian_from_lagrangian(const Expr& L, const Chart& source,
                                              const ProbeOptions& opts = {});

// first-order section equations: field gradients, momentum divergences with
// the contact friction term, and the contact divergence
EquationSet hdw_equations(const Expr& H, const Chart& chart);

// momentum-chart residual rewritten over the velocity chart's jets: target
// coordinates map through fl, jet symbols through its total-derivative lift
Expr pull_back_jet_residual(const Expr& residual, const ChartMap& fl,
                            const JetContext& source_jets,
                            const JetContext& target_jets);

// m=1 evolution field d/dt + H_p d/dq - (H_q + p H_s) d/dp + (p H_p - H) d/ds,
// checked against the frame-equation solve before returning
VectorField cocontact_vector_field(const Expr& H, const Chart& chart,
                                   const ProbeOptions& opts = {});
// the same field recovered from i(X)Theta = 0 and i(X)dbar(Theta) = 0 alone
VectorField cocontact_vector_field_solved(const Expr& H, const Chart& chart,
                                          const ProbeOptions& opts = {});

}  // namespace mcontact
