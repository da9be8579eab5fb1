#pragma once

#include <string>
#include <vector>

#include "mcontact/form.hpp"
#include "mcontact/linalg.hpp"
#include "mcontact/section.hpp"

namespace mcontact {

struct Distribution {
  Chart chart;
  std::vector<VectorField> basis;
  int rank() const { return static_cast<int>(basis.size()); }
};

// span of the fiber coordinate fields; kernel of the base volume pairing
Distribution vertical_distribution(const Chart& c);

struct DistributionResult {
  Distribution dist;
  bool certain = true;  // false when a rank decision used an unproven zero test
};

// vertical fields v with i(v) dTheta free of fiber differentials
DistributionResult reeb_distribution(const Form& theta, const ProbeOptions& opts = {});

// vertical fields killed by Theta and dTheta
DistributionResult characteristic_distribution(const Form& theta,
                                               const ProbeOptions& opts = {});

enum class StructureKind { Multicontact, Premulticontact, NotMulticontact, Indeterminate };

const char* to_string(StructureKind k);

struct Classification {
  StructureKind kind = StructureKind::Indeterminate;
  int vertical_rank = 0;        // fiber dimension
  int reeb_rank = 0;            // m + degeneracy when structured
  int characteristic_rank = 0;  // degeneracy k; 0 means multicontact
  std::vector<VectorField> reeb;  // canonical duals of the base volume slices
  Distribution characteristic;
  std::string reason;  // set for NotMulticontact / Indeterminate
  bool certain = true;
};

// Decides whether theta equips the chart's bundle with a (pre)multicontact
// structure. The constructive Reeb solve runs first: without vertical fields
// pairing to the sliced volume there is nothing to rank.
Classification classify(const Form& theta, const ProbeOptions& opts = {});

struct DissipationResult {
  Form sigma;        // dissipation 1-form in base differentials
  ZeroTest verified; // sigma ^ i(v)Theta = i(v)dTheta over the Reeb distribution
};
DissipationResult dissipation_form(const Form& theta, const Classification& cl,
                                   const ProbeOptions& opts = {});

// false when some term of theta carries more than one fiber differential
bool is_variational(const Form& theta);

// Field equation residuals for the holonomic frame X = X_0 ^ ... ^ X_{m-1}
// written with jet symbols. Solutions are the sections whose jets kill both
// the pairing and the one form.
struct MvfResiduals {
  Expr pairing;         // i(X) Theta
  Form one_form;        // i(X) dbar Theta
  Expr transversality;  // i(X) omega - 1, identically zero for frames
};
MvfResiduals mvf_residuals(const Form& theta, const Form& sigma, const JetContext& jets);

// Section formulation, two equivalent routes per test direction Y:
//   restricted:  psi^*( i(Y) dbar Theta )            (an m-form, one scalar)
//   paired:      (i(tangent frame) dbar Theta)(Y)    evaluated on the section
// The two differ by the fixed factor (-1)^m.
struct SectionRoutes {
  std::vector<Expr> restricted;
  std::vector<Expr> paired;
  ZeroTest agreement;  // restricted - (-1)^m paired, all directions
};
SectionRoutes section_routes(const Form& theta, const Form& sigma, const Section& psi,
                             const std::vector<VectorField>& tests,
                             const ProbeOptions& opts = {});

// Connection formulation: i(nabla)Omega := sum_mu dx^mu ^ i(X_mu)Omega over the
// lifted frame. Solutions make both residual forms vanish.
struct ConnectionResiduals {
  Form theta_residual;  // i(nabla)Theta - (m-1) Theta
  Form dbar_residual;   // i(nabla)dbar Theta - (m-1) dbar Theta
};
ConnectionResiduals connection_residuals(const Form& theta, const Form& sigma,
                                         const JetContext& jets);

// i(x) dbar xi: vanishes when xi is a conserved current of the frame x
Expr current_residual(const Form& xi, const Form& sigma, const MultiVector& x);

}  // namespace mcontact
