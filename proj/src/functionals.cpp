#include "thinlayer/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "thinlayer/errors.hpp"

namespace thinlayer {

namespace {

double quad(const SparseMatrix& A, const Field& v) { return v.dot(A * v); }

// Exact int_{x_i}^{x_{i+1}} f^2 g dx for linear f and g (2-point Gauss is exact for cubics).
double weighted_square(const std::vector<double>& x, const std::vector<double>& f,
                       const std::vector<double>& g) {
  static const double q = 0.5 / std::sqrt(3.0);
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double len = x[i + 1] - x[i];
    for (double t : {0.5 - q, 0.5 + q}) {
      const double fv = (1.0 - t) * f[i] + t * f[i + 1];
      const double gv = (1.0 - t) * g[i] + t * g[i + 1];
      sum += 0.5 * len * fv * fv * gv;
    }
  }
  return sum;
}

}  // namespace

void require_admissible(const Mesh& mesh, const Field& theta) {
  if (theta.size() != mesh.num_nodes()) throw NotAdmissible("field length does not match the mesh");
  for (Index n = 0; n < mesh.num_nodes(); ++n) {
    if (mesh.is_dirichlet(n) && theta[n] != 0.0) {
      throw NotAdmissible(fmt::format("field is {:.3g} on Dirichlet node {} ({})", theta[n], n,
                                      tag_name(mesh.node_tag[n])));
    }
  }
}

EnergyBreakdown energy_G_delta(const SparseMatrix& stiffness, const Field& lift, const Mesh& mesh,
                               const Field& theta) {
  require_admissible(mesh, theta);
  EnergyBreakdown e;
  e.lift = LiftKind::Layered;
  e.bulk = 0.5 * quad(stiffness, theta + lift);
  e.total = e.bulk;
  return e;
}

EnergyBreakdown energy_G_delta(const TransmissionSolution& sol, const Field& theta) {
  return energy_G_delta(sol.stiffness, sol.lift, sol.mesh, theta);
}

EnergyBreakdown energy_G_delta(const Mesh& mesh, const Device& dev, const Field& theta) {
  return energy_G_delta(transmission_stiffness(mesh, dev), transmission_lift(mesh, dev), mesh, theta);
}

namespace {

EnergyBreakdown limit_energy(const Mesh& mesh, const SparseMatrix& K, const SparseMatrix& M,
                             const SparseMatrix& M_coincidence, const Field& lift, const Field& offset,
                             const Field& theta) {
  require_admissible(mesh, theta);
  EnergyBreakdown e;
  e.lift = LiftKind::Limit;
  e.bulk = 0.5 * quad(K, theta + lift);
  e.interface = 0.5 * quad(M, theta + offset);
  e.coincidence = 0.5 * quad(M_coincidence, offset);
  e.total = e.bulk + e.interface;
  return e;
}

}  // namespace

EnergyBreakdown energy_G(const LimitSolution& sol, const Field& theta) {
  return limit_energy(sol.mesh, sol.stiffness, sol.robin, sol.robin_coincidence, sol.lift, sol.offset,
                      theta);
}

EnergyBreakdown energy_G(const Mesh& mesh, const Device& dev, const Field& theta) {
  const SparseMatrix K = assemble_stiffness(mesh, [](double, double) { return 1.0; });
  const double H = dev.domain.H;
  const Field offset = limit_offset(mesh, dev);
  const LineFunction sigma_interface = [&](double x) { return dev.sigma(x, -H); };
  const SparseMatrix M = assemble_robin(mesh, sigma_interface, offset).matrix;
  const SparseMatrix Mc = assemble_edge_mass(mesh, BoundaryTag::Robin, sigma_interface, EdgeSelection::Coincidence);
  return limit_energy(mesh, K, M, Mc, limit_lift(mesh, dev), offset, theta);
}

double electrostatic_energy(const TransmissionSolution& sol) { return -0.5 * quad(sol.stiffness, sol.psi); }

double electrostatic_energy(const LimitSolution& sol) { return -energy_G(sol, sol.chi).total; }

namespace {

TraceVector trace_row(const Mesh& mesh, const Field& theta, bool top) {
  TraceVector tv;
  const std::size_t n = mesh.x.size();
  tv.values.resize(n);
  tv.weight.resize(n);
  tv.masked.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int col = static_cast<int>(i);
    tv.masked[i] = mesh.collapsed[i];
    tv.weight[i] = mesh.collapsed[i] ? 0.0 : mesh.gap[i];
    tv.values[i] = mesh.collapsed[i] ? 0.0 : theta[top ? mesh.top_node(col) : mesh.interface_node(col)];
  }
  return tv;
}

}  // namespace

TraceVector trace_top(const Mesh& mesh, const Field& theta) { return trace_row(mesh, theta, true); }
TraceVector trace_bottom(const Mesh& mesh, const Field& theta) { return trace_row(mesh, theta, false); }

FieldNorms field_norms(const Mesh& mesh, const Field& theta) {
  FieldNorms nrm;
  const SparseMatrix M = assemble_mass(mesh, RegionFilter::Free);
  const SparseMatrix Kz = assemble_stiffness(mesh, [](double, double) { return 1.0; }, GradientPart::ZOnly);
  nrm.l2 = std::sqrt(std::max(0.0, quad(M, theta)));
  nrm.dz_l2 = std::sqrt(std::max(0.0, quad(Kz, theta)));
  const TraceVector top = trace_top(mesh, theta);
  const TraceVector bottom = trace_bottom(mesh, theta);
  nrm.top_weighted = weighted_square(mesh.x, top.values, top.weight);
  nrm.bottom_weighted = weighted_square(mesh.x, bottom.values, bottom.weight);
  const std::vector<double> ones(mesh.x.size(), 1.0);
  nrm.bottom_sq = weighted_square(mesh.x, bottom.values, ones);
  for (std::size_t i = 0; i < mesh.x.size(); ++i) {
    if (!mesh.collapsed[i]) nrm.max_gap = std::max(nrm.max_gap, mesh.gap[i]);
  }
  return nrm;
}

bool TraceInequalityReport::passed() const { return worst_margin() >= -tol; }

double TraceInequalityReport::worst_margin() const {
  double w = std::numeric_limits<double>::infinity();
  for (const auto& c : checks) w = std::min(w, c.margin());
  return w;
}

TraceInequalityReport verify_trace_inequalities(const Mesh& mesh, const Field& theta) {
  if (mesh.kind != MeshKind::FreeOnly) throw std::invalid_argument("trace checks run on free-space meshes");
  const FieldNorms n = field_norms(mesh, theta);
  TraceInequalityReport rep;
  const double cross = 2.0 * n.max_gap * n.l2 * n.dz_l2;
  rep.checks.push_back({"top_trace", n.top_weighted, n.l2 * n.l2 + cross});
  rep.checks.push_back({"bottom_trace", n.bottom_weighted, n.l2 * n.l2 + cross});
  bool admissible = true;
  for (Index k = 0; k < mesh.num_nodes(); ++k) {
    const BoundaryTag t = mesh.node_tag[k];
    if ((t == BoundaryTag::TopDirichlet || t == BoundaryTag::SideDirichlet) && theta[k] != 0.0) {
      admissible = false;
      break;
    }
  }
  if (admissible) {
    rep.checks.push_back({"poincare", n.l2, 2.0 * n.max_gap * n.dz_l2});
    rep.checks.push_back({"interface_trace", n.bottom_sq, 2.0 * n.l2 * n.dz_l2});
  }
  return rep;
}

InequalityCheck transmission_estimate(const TransmissionSolution& sol) {
  return {"transmission_energy_bound", quad(sol.stiffness, sol.chi), 4.0 * quad(sol.stiffness, sol.lift)};
}

InequalityCheck limit_estimate(const LimitSolution& sol) {
  return {"limit_energy_bound", quad(sol.stiffness, sol.chi) + quad(sol.robin, sol.chi),
          4.0 * quad(sol.stiffness, sol.lift) + 4.0 * quad(sol.robin, sol.offset)};
}

}  // namespace thinlayer
