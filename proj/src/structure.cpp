#include "mcontact/structure.hpp"

#include <functional>
#include <set>
#include <utility>

namespace mcontact {

namespace {

bool pure_base(const Chart& c, const std::vector<int>& idx) {
  for (int i : idx)
    if (c.coordinate(i).role != Role::Base) return false;
  return true;
}

std::vector<int> base_tuple(const Chart& c) {
  std::vector<int> t;
  for (int mu = 0; mu < c.m(); ++mu) t.push_back(c.base_coord(mu));
  return t;
}

// rows: coefficients of the selected index tuples across a family of forms;
// columns follow the family order
ExprMatrix condition_matrix(const std::vector<Form>& family,
                            const std::function<bool(const std::vector<int>&)>& keep) {
  std::set<std::vector<int>> tuples;
  for (const Form& f : family)
    for (const auto& [idx, coeff] : f.terms())
      if (keep(idx)) tuples.insert(idx);
  ExprMatrix m(0, static_cast<int>(family.size()));
  for (const auto& t : tuples) {
    std::vector<Expr> row;
    row.reserve(family.size());
    for (const Form& f : family) row.push_back(f.coefficient(t));
    m.append_row(std::move(row));
  }
  return m;
}

VectorField combine(const Chart& c, const std::vector<int>& fiber,
                    const std::vector<Expr>& weights) {
  VectorField v = VectorField::zero(c);
  for (std::size_t j = 0; j < fiber.size(); ++j) v.components[fiber[j]] = weights[j];
  return v;
}

VectorField combine_fields(const std::vector<VectorField>& basis,
                           const std::vector<Expr>& weights) {
  VectorField v = VectorField::zero(basis.front().chart);
  for (std::size_t j = 0; j < basis.size(); ++j)
    for (std::size_t i = 0; i < v.components.size(); ++i)
      v.components[i] = simplify(v.components[i] + weights[j] * basis[j].components[i]);
  return v;
}

void require_structure_degree(const Form& theta) {
  if (theta.degree() != theta.chart().m())
    throw StructureError("structure form must have the base degree");
}

}  // namespace

Distribution vertical_distribution(const Chart& c) {
  Distribution d{c, {}};
  for (int i : c.fiber_indices()) d.basis.push_back(VectorField::coordinate(c, i));
  return d;
}

DistributionResult reeb_distribution(const Form& theta, const ProbeOptions& opts) {
  require_structure_degree(theta);
  const Chart& c = theta.chart();
  Form dtheta = exterior_derivative(theta);
  std::vector<int> fiber = c.fiber_indices();
  std::vector<Form> contractions;
  contractions.reserve(fiber.size());
  for (int a : fiber) contractions.push_back(contract(dtheta, VectorField::coordinate(c, a)));
  ExprMatrix m = condition_matrix(
      contractions, [&](const std::vector<int>& idx) { return !pure_base(c, idx); });
  bool certain = true;
  auto weights = null_space(m, opts, &certain);
  DistributionResult out{{c, {}}, certain};
  for (const auto& w : weights) out.dist.basis.push_back(combine(c, fiber, w));
  return out;
}

DistributionResult characteristic_distribution(const Form& theta,
                                               const ProbeOptions& opts) {
  require_structure_degree(theta);
  const Chart& c = theta.chart();
  Form dtheta = exterior_derivative(theta);
  std::vector<int> fiber = c.fiber_indices();
  std::vector<Form> killers;  // i(v)Theta stacked over i(v)dTheta
  killers.reserve(fiber.size());
  for (int a : fiber) killers.push_back(contract(theta, VectorField::coordinate(c, a)));
  ExprMatrix m =
      condition_matrix(killers, [](const std::vector<int>&) { return true; });
  std::vector<Form> dkillers;
  for (int a : fiber) dkillers.push_back(contract(dtheta, VectorField::coordinate(c, a)));
  ExprMatrix md =
      condition_matrix(dkillers, [](const std::vector<int>&) { return true; });
  for (int r = 0; r < md.rows(); ++r) {
    std::vector<Expr> row;
    for (int j = 0; j < md.cols(); ++j) row.push_back(md.at(r, j));
    m.append_row(std::move(row));
  }
  bool certain = true;
  auto weights = null_space(m, opts, &certain);
  DistributionResult out{{c, {}}, certain};
  for (const auto& w : weights) out.dist.basis.push_back(combine(c, fiber, w));
  return out;
}

const char* to_string(StructureKind k) {
  switch (k) {
    case StructureKind::Multicontact: return "multicontact";
    case StructureKind::Premulticontact: return "premulticontact";
    case StructureKind::NotMulticontact: return "not multicontact";
    case StructureKind::Indeterminate: return "indeterminate";
  }
  return "?";
}

Classification classify(const Form& theta, const ProbeOptions& opts) {
  require_structure_degree(theta);
  const Chart& c = theta.chart();
  const int m = c.m();

  Classification cl;
  cl.vertical_rank = static_cast<int>(c.fiber_indices().size());
  DistributionResult dr = reeb_distribution(theta, opts);
  DistributionResult ch = characteristic_distribution(theta, opts);
  cl.reeb_rank = dr.dist.rank();
  cl.characteristic = ch.dist;
  cl.characteristic_rank = ch.dist.rank();
  cl.certain = dr.certain && ch.certain;

  // constructive step first: vertical fields dual to the sliced base volume
  if (dr.dist.rank() == 0) {
    cl.kind = StructureKind::NotMulticontact;
    cl.reason = "no Reeb distribution";
    return cl;
  }
  std::vector<Form> th;
  th.reserve(dr.dist.basis.size());
  for (const auto& v : dr.dist.basis) th.push_back(contract(theta, v));
  std::vector<Form> volumes;
  for (int mu = 0; mu < m; ++mu) volumes.push_back(contracted_volume(c, mu));

  std::set<std::vector<int>> tuples;
  for (const Form& f : th)
    for (const auto& [idx, coeff] : f.terms()) tuples.insert(idx);
  for (const Form& f : volumes)
    for (const auto& [idx, coeff] : f.terms()) tuples.insert(idx);

  ExprMatrix sys(0, static_cast<int>(th.size()));
  std::vector<std::vector<Expr>> rhs(m);
  for (const auto& t : tuples) {
    std::vector<Expr> row;
    for (const Form& f : th) row.push_back(f.coefficient(t));
    sys.append_row(std::move(row));
    for (int mu = 0; mu < m; ++mu) rhs[mu].push_back(volumes[mu].coefficient(t));
  }
  for (int mu = 0; mu < m; ++mu) {
    LinearSolution sol = solve_linear(sys, rhs[mu], opts);
    if (!sol.certain) cl.certain = false;
    if (!sol.solvable) {
      cl.kind = StructureKind::NotMulticontact;
      cl.reason = "no Reeb distribution";
      cl.reeb.clear();
      return cl;
    }
    cl.reeb.push_back(combine_fields(dr.dist.basis, sol.particular));
  }

  if (cl.reeb_rank != m + cl.characteristic_rank) {
    if (!cl.certain) {
      cl.kind = StructureKind::Indeterminate;
      cl.reason = "rank indeterminate";
      return cl;
    }
    cl.kind = StructureKind::NotMulticontact;
    cl.reason = "rank mismatch";
    return cl;
  }
  if (!cl.certain) {
    cl.kind = StructureKind::Indeterminate;
    cl.reason = "rank indeterminate";
    return cl;
  }
  cl.kind = cl.characteristic_rank == 0 ? StructureKind::Multicontact
                                        : StructureKind::Premulticontact;
  return cl;
}

DissipationResult dissipation_form(const Form& theta, const Classification& cl,
                                   const ProbeOptions& opts) {
  const Chart& c = theta.chart();
  if (static_cast<int>(cl.reeb.size()) != c.m())
    throw StructureError("dissipation form needs a structured classification");
  Form dtheta = exterior_derivative(theta);
  std::vector<int> vol = base_tuple(c);
  Form sigma(c, 1);
  for (int mu = 0; mu < c.m(); ++mu) {
    Expr gamma = contract(dtheta, cl.reeb[mu]).coefficient(vol);
    if (!gamma.is_zero_literal()) sigma.add_term({c.base_coord(mu)}, gamma);
  }
  // defining property over the whole Reeb distribution: Reeb duals plus the
  // characteristic directions
  ZeroTest verified = ZeroTest::Zero;
  auto check = [&](const VectorField& v) {
    Form residual = wedge(sigma, contract(theta, v)) - contract(dtheta, v);
    switch (form_is_zero(residual, opts)) {
      case ZeroTest::NonZero: verified = ZeroTest::NonZero; break;
      case ZeroTest::Unknown:
        if (verified == ZeroTest::Zero) verified = ZeroTest::Unknown;
        break;
      case ZeroTest::Zero: break;
    }
  };
  for (const auto& v : cl.reeb) check(v);
  for (const auto& v : cl.characteristic.basis) check(v);
  return {std::move(sigma), verified};
}

bool is_variational(const Form& theta) {
  const Chart& c = theta.chart();
  for (const auto& [idx, coeff] : theta.terms()) {
    int fiber = 0;
    for (int i : idx)
      if (c.coordinate(i).role != Role::Base) ++fiber;
    if (fiber > 1) return false;
  }
  return true;
}

MvfResiduals mvf_residuals(const Form& theta, const Form& sigma, const JetContext& jets) {
  require_structure_degree(theta);
  MultiVector frame = prolongation_frame(jets);
  MvfResiduals out;
  out.pairing = simplify(contract(theta, frame).scalar_value());
  out.one_form = contract(dbar(theta, sigma), frame);
  out.transversality =
      simplify(contract(volume_form(theta.chart()), frame).scalar_value() -
               Expr::integer(1));
  return out;
}

SectionRoutes section_routes(const Form& theta, const Form& sigma, const Section& psi,
                             const std::vector<VectorField>& tests,
                             const ProbeOptions& opts) {
  require_structure_degree(theta);
  const Chart& c = theta.chart();
  Form db = dbar(theta, sigma);
  Form alpha = contract(db, section_tangent_frame(psi));  // 1-form
  std::map<SymbolId, Expr> on_section;
  for (int i : c.fiber_indices()) on_section[c.coord_symbol(i)] = psi.value(i);
  std::vector<int> vol = base_tuple(c);
  int sign = c.m() % 2 == 0 ? 1 : -1;

  SectionRoutes out;
  out.agreement = ZeroTest::Zero;
  for (const VectorField& y : tests) {
    Expr restricted = simplify(pull_back(contract(db, y), psi).coefficient(vol));
    Expr paired = Expr::integer(0);
    for (int i = 0; i < c.dim(); ++i)
      paired = paired + alpha.coefficient({i}) * y.components[i];
    paired = simplify(substitute(paired, on_section));
    out.restricted.push_back(restricted);
    out.paired.push_back(paired);
    switch (is_zero(restricted - Expr::integer(sign) * paired, opts)) {
      case ZeroTest::NonZero: out.agreement = ZeroTest::NonZero; break;
      case ZeroTest::Unknown:
        if (out.agreement == ZeroTest::Zero) out.agreement = ZeroTest::Unknown;
        break;
      case ZeroTest::Zero: break;
    }
  }
  return out;
}

ConnectionResiduals connection_residuals(const Form& theta, const Form& sigma,
                                         const JetContext& jets) {
  require_structure_degree(theta);
  const Chart& c = theta.chart();
  const int m = c.m();
  auto lifted_sum = [&](const Form& omega) {
    Form acc(c, omega.degree());
    for (int mu = 0; mu < m; ++mu) {
      Form dxmu(c, 1);
      dxmu.add_term({c.base_coord(mu)}, Expr::integer(1));
      acc = acc + wedge(dxmu, contract(omega, prolongation_field(jets, mu)));
    }
    return acc;
  };
  Form db = dbar(theta, sigma);
  Expr weight = Expr::integer(m - 1);
  return {lifted_sum(theta) - weight * theta, lifted_sum(db) - weight * db};
}

Expr current_residual(const Form& xi, const Form& sigma, const MultiVector& x) {
  Form paired = contract(dbar(xi, sigma), x);
  if (paired.degree() != 0)
    throw StructureError("current must have degree one below the base");
  return simplify(paired.scalar_value());
}

}  // namespace mcontact
