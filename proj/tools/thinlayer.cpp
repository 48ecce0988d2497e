// Command-line driver: solve, limit, sweep, verify, recovery.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "thinlayer/config.hpp"
#include "thinlayer/errors.hpp"
#include "thinlayer/fem.hpp"
#include "thinlayer/functionals.hpp"
#include "thinlayer/gamma.hpp"
#include "thinlayer/io.hpp"

namespace fs = std::filesystem;
using namespace thinlayer;

namespace {

constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kFailedCheck = 2;

struct Common {
  std::string config;
  std::string out;
  bool serial = false;
  bool strict_compat = false;
};

struct Context {
  DeviceConfig cfg;
  fs::path out;
  SweepOptions sweep;

  [[nodiscard]] std::string path(const std::string& name) const { return (out / name).string(); }
};

Context load(const Common& c) {
  DeviceConfig cfg = parse_config(c.config);
  for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << '\n';
  fs::path out = c.out.empty() ? fs::path(cfg.output.dir) : fs::path(c.out);
  fs::create_directories(out);
  SweepOptions so;
  so.serial = c.serial;
  so.strict_compat = c.strict_compat || cfg.strict_compat;
  so.layer_base = cfg.device.mesh.layer_base;
  return {std::move(cfg), std::move(out), so};
}

void write_csv(const Context& ctx, const std::string& name, const CsvTable& t) {
  write_text_file(ctx.path(name), t.str());
}

void write_svg_field(const Context& ctx, const std::string& name, const Mesh& mesh, const Field& v) {
  if (!ctx.cfg.output.svg) return;
  std::ostringstream ss;
  write_field_svg(ss, mesh, v);
  write_text_file(ctx.path(name), ss.str());
}

const char* solver_name(SolverKind k) { return k == SolverKind::Dense ? "dense" : "cg"; }

int cmd_solve(const Context& ctx, double delta, int layers) {
  const Device& dev = ctx.cfg.device;
  if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("--delta must lie in (0, 1)");
  const TransmissionSolution sol = solve_transmission(dev, delta, layers > 0 ? layers : dev.mesh.nl);
  const EnergyBreakdown g = energy_G_delta(sol, sol.chi);
  const InequalityCheck est = transmission_estimate(sol);
  const double flux = flux_jump_residual(sol.mesh, sol.psi, dev.sigma);
  CsvTable t({"delta", "layers", "G_delta", "electrostatic_energy", "flux_jump_residual", "estimate_lhs",
              "estimate_rhs", "solver", "iterations", "residual", "unknowns"},
             ctx.cfg.hash);
  t.add_row({delta, static_cast<long long>(sol.mesh.nl), g.total, electrostatic_energy(sol), flux, est.lhs, est.rhs,
             std::string(solver_name(sol.stats.kind)), static_cast<long long>(sol.stats.iterations),
             sol.stats.residual, static_cast<long long>(sol.stats.unknowns)});
  write_csv(ctx, "solve.csv", t);
  write_field_file(ctx.path("solve_field.txt"), sol.mesh, sol.psi);
  write_svg_field(ctx, "solve_field.svg", sol.mesh, sol.psi);
  fmt::print("G_delta = {:.17g}  E = {:.17g}  ({} unknowns, {} iterations)\n", g.total, electrostatic_energy(sol),
             sol.stats.unknowns, sol.stats.iterations);
  return kOk;
}

int cmd_limit(const Context& ctx) {
  const Device& dev = ctx.cfg.device;
  const LimitSolution sol = solve_limit(dev);
  const EnergyBreakdown g = energy_G(sol, sol.chi);
  const double robin = robin_residual(sol.mesh, sol.psi, dev);
  const double harmonic = harmonic_residual(sol.mesh, sol.psi);
  long long collapsed = 0;
  for (bool c : sol.mesh.collapsed) collapsed += c ? 1 : 0;
  CsvTable t({"G", "bulk", "interface", "coincidence", "electrostatic_energy", "robin_residual",
              "harmonic_residual", "components", "coincidence_columns", "solver", "iterations", "residual",
              "unknowns"},
             ctx.cfg.hash);
  t.add_row({g.total, g.bulk, g.interface, g.coincidence, electrostatic_energy(sol), robin, harmonic,
             static_cast<long long>(sol.mesh.num_components), collapsed, std::string(solver_name(sol.stats.kind)),
             static_cast<long long>(sol.stats.iterations), sol.stats.residual,
             static_cast<long long>(sol.stats.unknowns)});
  write_csv(ctx, "limit.csv", t);
  write_field_file(ctx.path("limit_field.txt"), sol.mesh, sol.psi);
  write_svg_field(ctx, "limit_field.svg", sol.mesh, sol.psi);
  fmt::print("G = {:.17g}  E = {:.17g}  robin residual = {:.3e}  components = {}\n", g.total,
             electrostatic_energy(sol), robin, sol.mesh.num_components);
  return kOk;
}

void report_compat(const CompatibilityReport& c) {
  if (!c.passed()) {
    std::cerr << fmt::format("warning: boundary data fail the compatibility check (continuity {:.3g}, flux {:.3g})\n",
                             c.continuity_residual, c.flux_residual);
  }
}

int cmd_sweep(const Context& ctx) {
  const SweepReport rep = run_sweep(ctx.cfg.device, ctx.cfg.deltas, ctx.sweep);
  report_compat(rep.compat);
  write_csv(ctx, "sweep.csv", sweep_table(rep, ctx.cfg.hash));
  write_csv(ctx, "sweep_rates.csv", sweep_rates_table(rep, ctx.cfg.hash));
  if (ctx.cfg.output.svg) {
    std::ostringstream ss;
    write_sweep_svg(ss, rep);
    write_text_file(ctx.path("sweep.svg"), ss.str());
  }
  for (const SweepRow& r : rep.rows) {
    fmt::print("delta = {:<8g} gap = {:.3e}  l2 = {:.3e}  strip = {:.3e}\n", r.delta, r.gap, r.l2_error, r.strip);
  }
  if (rep.strip_rate) fmt::print("strip slope = {:.4f}\n", rep.strip_rate->slope);
  return kOk;
}

int cmd_verify(const Context& ctx) {
  const Device& dev = ctx.cfg.device;
  CsvTable t({"check", "field", "lhs", "rhs", "margin", "passed"}, ctx.cfg.hash);
  bool ok = true;
  const double tol = 1e-10;
  auto add = [&](const std::string& name, const std::string& field, double lhs, double rhs) {
    const bool pass = rhs - lhs >= -tol;
    ok = ok && pass;
    t.add_row({name, field, lhs, rhs, rhs - lhs, std::string(pass ? "yes" : "no")});
  };
  auto add_traces = [&](const Mesh& mesh, const Field& theta, const std::string& field) {
    for (const InequalityCheck& c : verify_trace_inequalities(mesh, theta).checks) add(c.name, field, c.lhs, c.rhs);
  };

  const LimitSolution lim = solve_limit(dev);
  add_traces(lim.mesh, lim.chi, "chi_u");
  add_traces(lim.mesh, lim.psi, "psi_u");
  const InequalityCheck le = limit_estimate(lim);
  add(le.name, "chi_u", le.lhs, le.rhs);
  const double g_limit = energy_G(lim, lim.chi).total;

  for (double delta : ctx.cfg.deltas) {
    const int nl = sweep_layers(ctx.sweep.layer_base, ctx.cfg.deltas.front(), delta);
    const TransmissionSolution sol = solve_transmission(dev, delta, nl);
    const std::string field = fmt::format("chi_delta({})", delta);
    const InequalityCheck te = transmission_estimate(sol);
    add(te.name, field, te.lhs, te.rhs);
    const Field restricted = restrict_to_free(sol.mesh, sol.chi);
    add_traces(lim.mesh, restricted, field);
    add("liminf_sample", field, g_limit, energy_G(lim, restricted).total);
    const RecoveryField rec = build_recovery(lim.mesh, lim.chi, sol.mesh, dev);
    add("recovery_minimality", field, energy_G_delta(sol, sol.chi).total, energy_G_delta(sol, rec.values).total);
  }

  const std::vector<double> us = dev.u.sample(uniform_grid(dev.domain, 256));
  const auto [lo, hi] = std::minmax_element(us.begin(), us.end());
  const CompatibilityReport compat = check_compatibility(dev.data, dev.sigma, *lo, *hi, 1e-10);
  const bool compat_ok = compat.passed();
  t.add_row({std::string("compatibility"), std::string("boundary_data"),
             std::max(compat.continuity_residual, compat.flux_residual), compat.tol,
             compat.tol - std::max(compat.continuity_residual, compat.flux_residual),
             std::string(compat_ok ? "yes" : (ctx.sweep.strict_compat ? "no" : "warn"))});
  if (!compat_ok) {
    report_compat(compat);
    if (ctx.sweep.strict_compat) ok = false;
  }

  write_csv(ctx, "verify.csv", t);
  fmt::print("{} checks, {}\n", t.rows(), ok ? "all passed" : "FAILED");
  return ok ? kOk : kFailedCheck;
}

Field descriptor_field(const Mesh& mesh, const Device& dev, const FunctionDescriptor& f) {
  Field v(mesh.num_nodes());
  for (Index n = 0; n < mesh.num_nodes(); ++n) {
    const double x = mesh.nodes(0, n);
    v[n] = f(x, mesh.nodes(1, n), dev.u(x));
  }
  const double scale = std::max(1.0, v.cwiseAbs().maxCoeff());
  for (Index n = 0; n < mesh.num_nodes(); ++n) {
    if (!mesh.is_dirichlet(n)) continue;
    if (std::abs(v[n]) > 1e-12 * scale) {
      throw NotAdmissible(fmt::format("recovery.field is {:.3g} on the {} boundary at x = {}", v[n],
                                      tag_name(mesh.node_tag[n]), mesh.nodes(0, n)));
    }
    v[n] = 0.0;
  }
  return v;
}

int cmd_recovery(const Context& ctx, const std::string& source) {
  const Device& dev = ctx.cfg.device;
  Field theta;
  if (source == "zero") {
    const Mesh m = build_free_mesh(dev.domain, dev.u, dev.mesh.nx, dev.mesh.nz, dev.mesh.eps_c);
    theta = Field::Zero(m.num_nodes());
  } else if (source == "limit") {
    theta = solve_limit(dev).chi;
  } else {
    if (!ctx.cfg.recovery_field) throw ValidationError("--source descriptor needs recovery.field in the config");
    const Mesh m = build_free_mesh(dev.domain, dev.u, dev.mesh.nx, dev.mesh.nz, dev.mesh.eps_c);
    theta = descriptor_field(m, dev, *ctx.cfg.recovery_field);
  }
  const RecoveryReport rep = run_recovery(dev, theta, ctx.cfg.deltas, ctx.sweep);
  write_csv(ctx, "recovery.csv", recovery_table(rep, ctx.cfg.hash));
  bool ok = true;
  for (const RecoveryRow& r : rep.rows) {
    const bool minimal = r.energy_minimizer <= r.energy_recovery + 1e-10 * std::max(1.0, std::abs(r.energy_recovery));
    ok = ok && minimal && r.boundary_max == 0.0;
    fmt::print("delta = {:<8g} G_delta[theta_delta] - G[theta] = {:.3e}\n", r.delta, r.gap);
  }
  return ok ? kOk : kFailedCheck;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thin dielectric layer electrostatics: transmission problem and its Robin limit"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--config", common.config, "device configuration (YAML)")->required()->check(CLI::ExistingFile);
  app.add_option("--out", common.out, "output directory (default: output.dir of the config)");
  app.add_flag("--serial", common.serial, "run per-delta work sequentially");
  app.add_flag("--strict-compat", common.strict_compat, "treat failed compatibility of the boundary data as an error");
  app.fallthrough();

  double delta = 0.0;
  int layers = 0;
  auto* solve = app.add_subcommand("solve", "transmission solve at one layer thickness");
  solve->add_option("--delta", delta, "layer thickness in (0,1)")->required();
  solve->add_option("--layers", layers, "layer sublayers (default: mesh.layers)");
  auto* limit = app.add_subcommand("limit", "limit (Robin) solve");
  auto* sweep = app.add_subcommand("sweep", "delta sweep against the limit solve");
  auto* verify = app.add_subcommand("verify", "trace inequalities and energy estimates");
  std::string source = "limit";
  auto* recovery = app.add_subcommand("recovery", "recovery-sequence energy table");
  recovery->add_option("--source", source, "theta source")->check(CLI::IsMember({"zero", "limit", "descriptor"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kError;
  }

  try {
    const Context ctx = load(common);
    if (solve->parsed()) return cmd_solve(ctx, delta, layers);
    if (limit->parsed()) return cmd_limit(ctx);
    if (sweep->parsed()) return cmd_sweep(ctx);
    if (verify->parsed()) return cmd_verify(ctx);
    if (recovery->parsed()) return cmd_recovery(ctx, source);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  }
  return kError;
}
