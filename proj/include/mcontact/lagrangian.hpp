#pragma once

#include <string>
#include <vector>

#include "mcontact/equations.hpp"
#include "mcontact/form.hpp"
#include "mcontact/linalg.hpp"
#include "mcontact/structure.hpp"

namespace mcontact {

enum class Regularity { Regular, Singular, Unknown };

std::string to_string(Regularity r);

struct RegularityReport {
  Regularity verdict = Regularity::Unknown;
  int rank = 0;
  int dimension = 0;  // n_fields * m
  bool certain = true;
};

// field-theory Lagrangian data on a chart with velocity and contact coordinates
struct LagrangianSystem {
  Chart chart;
  Expr density;        // the Lagrangian function L
  Expr energy;         // sum dL/dv * v - L over velocity coordinates v
  Form theta;
  Form sigma;          // -(dL/ds^mu) dx^mu
  ExprMatrix hessian;  // second velocity partials, rows and cols indexed (field, base)
  RegularityReport regularity;
};

Expr lagrangian_energy(const Expr& L, const Chart& chart);
Form build_theta_L(const Expr& L, const Chart& chart);
ExprMatrix velocity_hessian(const Expr& L, const Chart& chart);
RegularityReport regularity(const Expr& L, const Chart& chart, const ProbeOptions& opts = {});

LagrangianSystem make_lagrangian_system(const Expr& L, const Chart& chart,
                                        const ProbeOptions& opts = {});

// closed-form Reeb frame of a regular system: d/ds^mu plus velocity components
// solving hessian * c = -d2L/(ds^mu dv); limited to hessians of size <= 8
std::vector<VectorField> lagrangian_reeb(const LagrangianSystem& sys,
                                         const ProbeOptions& opts = {});

// per-field second-order equations plus the contact divergence equation,
// written as residuals over jet symbols minted by JetContext
EquationSet herglotz_el_equations(const Expr& L, const Chart& chart);

struct FrameCoefficient {
  std::string name;  // minted unknown, e.g. xa_u_t_x or xs_t_x
  Expr value;        // general solution; may contain free parameter symbols
};

struct SopdeSolution {
  bool solved = false;  // false: singular system, residual equations returned as-is
  std::vector<FrameCoefficient> field;         // components along d/dy^i, forced to y^i_mu
  std::vector<FrameCoefficient> acceleration;  // components along d/dy^i_nu
  std::vector<FrameCoefficient> contact;       // components along d/ds^nu
  std::vector<FreeParameter> free_parameters;
  EquationSet equations;  // component residuals of the defining contractions
  std::string notice;
};

SopdeSolution sopde_coefficients(const LagrangianSystem& sys, const ProbeOptions& opts = {});

}  // namespace mcontact
