#pragma once

#include <optional>
#include <vector>

#include "thinlayer/device.hpp"
#include "thinlayer/fem.hpp"

namespace thinlayer {

enum class LiftKind { Layered, Limit };

struct EnergyBreakdown {
  double bulk = 0.0;         // 1/2 int coeff |grad(theta + lift)|^2
  double interface = 0.0;    // 1/2 int_D sigma |theta + h_u - frak_h_u|^2 (x, -H), limit only
  double coincidence = 0.0;  // part of `interface` over C(u), where theta is 0 by convention
  double total = 0.0;
  LiftKind lift = LiftKind::Layered;
};

/// Throws NotAdmissible unless theta vanishes on every Dirichlet-tagged node.
void require_admissible(const Mesh& mesh, const Field& theta);

/// G_delta[theta] from the assembled sigma_delta stiffness and the nodal lift.
EnergyBreakdown energy_G_delta(const SparseMatrix& stiffness, const Field& lift, const Mesh& mesh,
                               const Field& theta);
EnergyBreakdown energy_G_delta(const TransmissionSolution& sol, const Field& theta);
EnergyBreakdown energy_G_delta(const Mesh& mesh, const Device& dev, const Field& theta);

/// G[theta] on the free-space mesh.
EnergyBreakdown energy_G(const LimitSolution& sol, const Field& theta);
EnergyBreakdown energy_G(const Mesh& mesh, const Device& dev, const Field& theta);

/// E_{e,delta}(u) = -1/2 int sigma_delta |grad psi|^2.
double electrostatic_energy(const TransmissionSolution& sol);
/// E_e(u) = -G[psi_u - h_u].
double electrostatic_energy(const LimitSolution& sol);

struct TraceVector {
  std::vector<double> values;  // per column x_i
  std::vector<double> weight;  // (H + u)(x_i)
  std::vector<bool> masked;    // x_i in C(u); values are exactly 0 there
};

TraceVector trace_top(const Mesh& mesh, const Field& theta);
TraceVector trace_bottom(const Mesh& mesh, const Field& theta);

/// Discrete norms of a P1 field on a free-space mesh, all exact for piecewise linears.
struct FieldNorms {
  double l2 = 0.0;            // ||theta||_{L2(Omega(u))}
  double dz_l2 = 0.0;         // ||d_z theta||
  double top_weighted = 0.0;  // int |gamma_u theta|^2 (H+u) dx
  double bottom_weighted = 0.0;
  double bottom_sq = 0.0;     // ||theta(., -H)||^2_{L2(D)}
  double max_gap = 0.0;       // M_u over the mesh columns
};

FieldNorms field_norms(const Mesh& mesh, const Field& theta);

struct InequalityCheck {
  const char* name;
  double lhs;
  double rhs;
  [[nodiscard]] double margin() const { return rhs - lhs; }
};

struct TraceInequalityReport {
  std::vector<InequalityCheck> checks;  // t1 and t2 always, t3 and t4 for admissible fields
  double tol = 1e-10;
  [[nodiscard]] bool passed() const;
  [[nodiscard]] double worst_margin() const;
};

/// Trace bounds for gamma_u and gamma_b; the Poincare and bottom-trace bounds are
/// added when theta vanishes on the top and lateral boundary.
TraceInequalityReport verify_trace_inequalities(const Mesh& mesh, const Field& theta);

/// Energy bound  int sigma_delta |grad chi|^2 <= 4 int sigma_delta |grad h_{u,delta}|^2.
InequalityCheck transmission_estimate(const TransmissionSolution& sol);
/// |grad chi|^2 + |sqrt(sigma) chi(-H)|^2 <= 4 |grad h_u|^2 + 4 |sqrt(sigma)(h_u - frak_h_u)(-H)|^2.
InequalityCheck limit_estimate(const LimitSolution& sol);

}  // namespace thinlayer
