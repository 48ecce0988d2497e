#include "thinlayer/gamma.hpp"

#include <algorithm>
#include <cmath>
#include <future>

#include <fmt/format.h>

#include "thinlayer/errors.hpp"

namespace thinlayer {

double tau_delta(double x, double delta, const Domain1D& dom) {
  const double d = std::min(x - dom.a, dom.b - x);
  return std::min(1.0, std::max(0.0, d) / std::sqrt(delta));
}

namespace {

// theta on column i of the free mesh, linear in z between the column nodes; 0 above the plate.
double column_value(const Mesh& free_mesh, const Field& theta, int i, double z) {
  if (free_mesh.collapsed[i]) return 0.0;
  const double H = free_mesh.domain.H;
  const double gap = free_mesh.gap[i];
  const double t = (z + H) / gap * free_mesh.nz;
  if (t > free_mesh.nz) return 0.0;
  if (t <= 0.0) return theta[free_mesh.free_node(i, 0)];
  const int j = std::min(static_cast<int>(t), free_mesh.nz - 1);
  const double f = t - j;
  return (1.0 - f) * theta[free_mesh.free_node(i, j)] + f * theta[free_mesh.free_node(i, j + 1)];
}

}  // namespace

RecoveryField build_recovery(const Mesh& free_mesh, const Field& theta, const Mesh& trans,
                             const Device& dev) {
  if (free_mesh.kind != MeshKind::FreeOnly || trans.kind != MeshKind::Transmission) {
    throw std::invalid_argument("build_recovery takes a free-space field and a transmission mesh");
  }
  if (free_mesh.nx != trans.nx || free_mesh.nz != trans.nz) {
    throw std::invalid_argument("free-space and transmission meshes do not share the free grid");
  }
  require_admissible(free_mesh, theta);

  const double H = dev.domain.H;
  const double delta = trans.delta;
  RecoveryField rec;
  rec.mesh = trans;
  rec.values = Field::Zero(trans.num_nodes());
  rec.tau.resize(trans.x.size());

  const std::vector<Index> free_ids = trans.free_subset();
  for (std::size_t k = 0; k < free_ids.size(); ++k) rec.values[free_ids[k]] = theta[static_cast<Index>(k)];

  for (int i = 0; i <= trans.nx; ++i) {
    const double x = trans.x[i];
    const double w = dev.u(x);
    const double tau = tau_delta(x, delta, dev.domain);
    rec.tau[i] = tau;
    // h_{u,delta} in the layer at fraction s; s = 0 and s = 1 reuse the same expression
    // so the bottom row cancels exactly.
    auto hb = [&](double s) { return dev.data.h_b()(x, -H - 1.0 + s, w); };
    const double bottom = hb(0.0);
    const double top = hb(1.0);
    for (int l = 0; l < trans.nl; ++l) {
      const Index n = trans.layer_node(i, l);
      const double s = static_cast<double>(l) / trans.nl;
      const double z = trans.nodes(1, n);
      const double bar = column_value(free_mesh, theta, i, -2.0 * H - z);
      rec.values[n] = s * (bar + (top - bottom) * tau) - (hb(s) - bottom) * tau;
    }
  }
  return rec;
}

double strip_norm(const Mesh& trans, const Field& chi) {
  const SparseMatrix M = assemble_mass(trans, RegionFilter::Layer);
  return std::sqrt(std::max(0.0, chi.dot(M * chi)));
}

Field restrict_to_free(const Mesh& trans, const Field& field) {
  const std::vector<Index> ids = trans.free_subset();
  Field out(static_cast<Index>(ids.size()));
  for (std::size_t k = 0; k < ids.size(); ++k) out[static_cast<Index>(k)] = field[ids[k]];
  return out;
}

double free_l2_difference(const Mesh& trans, const Field& trans_field, const Mesh& free_mesh,
                          const Field& free_field) {
  const Field d = restrict_to_free(trans, trans_field) - free_field;
  if (d.size() != free_mesh.num_nodes()) throw std::invalid_argument("meshes do not share the free grid");
  const SparseMatrix M = assemble_mass(free_mesh);
  return std::sqrt(std::max(0.0, d.dot(M * d)));
}

int sweep_layers(int base, double delta0, double delta) {
  return std::max(1, static_cast<int>(std::lround(base * delta0 / delta)));
}

std::optional<LogLogFit> fit_loglog_slope(const std::vector<double>& delta,
                                          const std::vector<double>& value) {
  if (delta.size() != value.size()) throw std::invalid_argument("fit needs matching columns");
  const std::size_t first = delta.size() >= 4 ? 1 : 0;
  const std::size_t n = delta.size() - first;
  if (n < 2) return std::nullopt;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t k = first; k < delta.size(); ++k) {
    if (!(value[k] > 0.0) || !(delta[k] > 0.0)) return std::nullopt;
    const double lx = std::log(delta[k]);
    const double ly = std::log(value[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double nn = static_cast<double>(n);
  const double den = nn * sxx - sx * sx;
  if (den == 0.0) return std::nullopt;
  LogLogFit fit;
  fit.slope = (nn * sxy - sx * sy) / den;
  fit.intercept = (sy - fit.slope * sx) / nn;
  fit.points = static_cast<int>(n);
  return fit;
}

void validate_delta_list(const std::vector<double>& deltas) {
  if (deltas.empty()) throw ValidationError("delta list is empty");
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    if (!(deltas[k] > 0.0 && deltas[k] < 1.0)) {
      throw ValidationError(fmt::format("delta list must lie in (0,1); entry {} is {}", k, deltas[k]));
    }
    if (k > 0 && !(deltas[k] < deltas[k - 1])) {
      throw ValidationError(fmt::format("delta list must be strictly decreasing at entry {}", k));
    }
  }
}

namespace {

template <typename Fn>
auto run_ordered(const std::vector<double>& deltas, bool serial, Fn fn) {
  using Row = decltype(fn(0.0));
  std::vector<Row> rows;
  rows.reserve(deltas.size());
  auto guarded = [&fn](double d) {
    try {
      return fn(d);
    } catch (const SolverDiverged& e) {
      throw SolverDiverged(fmt::format("delta = {}: {}", d, e.what()));
    }
  };
  if (serial) {
    for (double d : deltas) rows.push_back(guarded(d));
    return rows;
  }
  std::vector<std::future<Row>> tasks;
  tasks.reserve(deltas.size());
  for (double d : deltas) tasks.push_back(std::async(std::launch::async, guarded, d));
  for (auto& t : tasks) rows.push_back(t.get());
  return rows;
}

CompatibilityReport compat_for(const Device& dev) {
  const std::vector<double> us = dev.u.sample(uniform_grid(dev.domain, 256));
  const auto [lo, hi] = std::minmax_element(us.begin(), us.end());
  return check_compatibility(dev.data, dev.sigma, *lo, *hi, 1e-10);
}

}  // namespace

SweepReport run_sweep(const Device& dev, const std::vector<double>& deltas, const SweepOptions& opts) {
  validate_delta_list(deltas);
  SweepReport rep;
  rep.compat = compat_for(dev);
  if (!rep.compat.passed() && opts.strict_compat) {
    throw ValidationError(fmt::format("boundary data fail the compatibility check (continuity {:.3g}, flux {:.3g})",
                                      rep.compat.continuity_residual, rep.compat.flux_residual));
  }
  const LimitSolution lim = solve_limit(dev);
  rep.limit_stats = lim.stats;
  const double g_limit = energy_G(lim, lim.chi).total;

  rep.rows = run_ordered(deltas, opts.serial, [&](double delta) {
    const int nl = sweep_layers(opts.layer_base, deltas.front(), delta);
    const TransmissionSolution sol = solve_transmission(dev, delta, nl);
    SweepRow row;
    row.delta = delta;
    row.nl = nl;
    row.energy_delta = energy_G_delta(sol, sol.chi).total;
    row.energy_limit = g_limit;
    row.gap = std::abs(row.energy_delta - g_limit);
    row.l2_error = free_l2_difference(sol.mesh, sol.chi, lim.mesh, lim.chi);
    row.strip = strip_norm(sol.mesh, sol.chi);
    row.liminf_gap = energy_G(lim, restrict_to_free(sol.mesh, sol.chi)).total - g_limit;
    row.estimate_margin = transmission_estimate(sol).margin();
    row.stats = sol.stats;
    return row;
  });

  std::vector<double> d, gap, l2, strip;
  for (const SweepRow& r : rep.rows) {
    d.push_back(r.delta);
    gap.push_back(r.gap);
    l2.push_back(r.l2_error);
    strip.push_back(r.strip);
  }
  rep.gap_rate = fit_loglog_slope(d, gap);
  rep.l2_rate = fit_loglog_slope(d, l2);
  rep.strip_rate = fit_loglog_slope(d, strip);
  return rep;
}

RecoveryReport run_recovery(const Device& dev, const Field& theta, const std::vector<double>& deltas,
                            const SweepOptions& opts) {
  validate_delta_list(deltas);
  const Mesh free_mesh = build_free_mesh(dev.domain, dev.u, dev.mesh.nx, dev.mesh.nz, dev.mesh.eps_c);
  const double g_theta = energy_G(free_mesh, dev, theta).total;

  RecoveryReport rep;
  rep.rows = run_ordered(deltas, opts.serial, [&](double delta) {
    const int nl = sweep_layers(opts.layer_base, deltas.front(), delta);
    const TransmissionSolution sol = solve_transmission(dev, delta, nl);
    const RecoveryField rec = build_recovery(free_mesh, theta, sol.mesh, dev);
    RecoveryRow row;
    row.delta = delta;
    row.nl = nl;
    for (Index n = 0; n < sol.mesh.num_nodes(); ++n) {
      if (sol.mesh.is_dirichlet(n)) row.boundary_max = std::max(row.boundary_max, std::abs(rec.values[n]));
    }
    row.energy_recovery = energy_G_delta(sol, rec.values).total;
    row.energy_theta = g_theta;
    row.gap = row.energy_recovery - g_theta;
    row.energy_minimizer = energy_G_delta(sol, sol.chi).total;
    return row;
  });
  return rep;
}

}  // namespace thinlayer
