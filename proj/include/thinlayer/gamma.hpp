#pragma once

#include <optional>
#include <vector>

#include "thinlayer/device.hpp"
#include "thinlayer/fem.hpp"
#include "thinlayer/functionals.hpp"

namespace thinlayer {

/// Boundary cut-off min(1, d(x, {a,b}) / sqrt(delta)).
double tau_delta(double x, double delta, const Domain1D& dom);

struct RecoveryField {
  Mesh mesh;  // transmission mesh
  Field values;
  std::vector<double> tau;  // per column
};

/// Extend an admissible theta on the free-space mesh into the layer of `trans`.
/// Free-space nodes are copied; layer nodes get
///   s [theta_bar + (h_{u,delta}(-H) - frak_h_u) tau] - (h_{u,delta} - frak_h_u) tau,
/// s = (z+H+delta)/delta, with theta_bar the column reflection about z = -H.
RecoveryField build_recovery(const Mesh& free_mesh, const Field& theta, const Mesh& trans,
                             const Device& dev);

/// ||chi||_{L2} over the layer triangles of a transmission mesh.
double strip_norm(const Mesh& trans, const Field& chi);

/// L2(Omega(u)) norm of the difference between the free part of a transmission field
/// and a field on the matching free-space mesh.
double free_l2_difference(const Mesh& trans, const Field& trans_field, const Mesh& free_mesh,
                          const Field& free_field);

/// Restriction of a transmission-mesh field to the matching free-space mesh.
Field restrict_to_free(const Mesh& trans, const Field& field);

/// Layer count of a sweep step: max(1, round(base * delta_0 / delta)).
int sweep_layers(int base, double delta0, double delta);

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  int points = 0;
};

/// Least squares of log(value) against log(delta). Drops the first (largest delta)
/// point when at least 4 are given; no fit for a single point or a non-positive value.
std::optional<LogLogFit> fit_loglog_slope(const std::vector<double>& delta,
                                          const std::vector<double>& value);

struct SweepRow {
  double delta = 0.0;
  int nl = 0;
  double energy_delta = 0.0;  // G_delta[chi_{u,delta}]
  double energy_limit = 0.0;  // G[chi_u]
  double gap = 0.0;
  double l2_error = 0.0;
  double strip = 0.0;
  double liminf_gap = 0.0;    // G[restricted chi_{u,delta}] - G[chi_u]
  double estimate_margin = 0.0;
  SolveStats stats;
};

struct SweepOptions {
  bool serial = false;
  bool strict_compat = false;
  int layer_base = 1;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  SolveStats limit_stats;
  CompatibilityReport compat;
  std::optional<LogLogFit> gap_rate;
  std::optional<LogLogFit> l2_rate;
  std::optional<LogLogFit> strip_rate;
};

/// Transmission solves over a strictly decreasing delta list, all on the same free-space
/// mesh, compared against the limit solve. Per-delta work runs concurrently unless serial.
SweepReport run_sweep(const Device& dev, const std::vector<double>& deltas, const SweepOptions& opts = {});

struct RecoveryRow {
  double delta = 0.0;
  int nl = 0;
  double energy_recovery = 0.0;  // G_delta[theta_delta]
  double energy_theta = 0.0;     // G[theta]
  double gap = 0.0;              // G_delta[theta_delta] - G[theta]
  double boundary_max = 0.0;     // max |theta_delta| over Dirichlet nodes
  double energy_minimizer = 0.0; // G_delta[chi_{u,delta}]
};

struct RecoveryReport {
  std::vector<RecoveryRow> rows;
};

/// Recovery-sequence energy table for an admissible theta on the free-space mesh of `dev`.
RecoveryReport run_recovery(const Device& dev, const Field& theta, const std::vector<double>& deltas,
                            const SweepOptions& opts = {});

void validate_delta_list(const std::vector<double>& deltas);

}  // namespace thinlayer
