// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "support.hpp"
#include "thinlayer/functionals.hpp"
#include "thinlayer/gamma.hpp"

using namespace thinlayer;
using testing::load_config;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;
};

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (!(v[k] < v[k - 1])) return false;
  }
  return true;
}

Outcome flat_plate_exactness() {
  const auto t0 = Clock::now();
  const DeviceConfig cfg = load_config("flat_plate.yaml");
  Device dev = testing::device_with_mesh(cfg.device, 64, 16);
  const double exact = 1.0 / 3.0;
  double worst = 0.0;
  const LimitSolution lim = solve_limit(dev);
  worst = std::max(worst, std::abs(energy_G(lim, lim.chi).total - exact) / exact);
  for (double delta : {0.2, 0.1, 0.05, 0.025}) {
    const TransmissionSolution sol = solve_transmission(dev, delta);
    worst = std::max(worst, std::abs(energy_G_delta(sol, sol.chi).total - exact) / exact);
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-8 && t < 5.0, fmt::format("max relative error {:.2e} (tol 1e-8), {:.2f} s (limit 5 s)", worst, t)};
}

Outcome energy_bound_corpus() {
  double worst = std::numeric_limits<double>::infinity();
  int configs = 0, checks = 0;
  bool touchdown = false;
  for (const std::string& name : testing::corpus_names()) {
    const DeviceConfig cfg = load_config(name);
    touchdown = touchdown || name == "touchdown.yaml";
    SweepOptions opts;
    opts.layer_base = cfg.device.mesh.layer_base;
    const SweepReport rep = run_sweep(cfg.device, cfg.deltas, opts);
    for (const SweepRow& r : rep.rows) {
      worst = std::min(worst, r.estimate_margin);
      ++checks;
    }
    ++configs;
  }
  return {configs >= 10 && touchdown && worst >= -1e-10,
          fmt::format("{} configs (touchdown included: {}), {} (config, delta) pairs, worst margin {:.3e}", configs,
                      touchdown ? "yes" : "no", checks, worst)};
}

struct CosineRun {
  SweepReport report;
  double seconds = 0.0;
};

const CosineRun& cosine_sweep() {
  static const CosineRun run = [] {
    const auto t0 = Clock::now();
    const DeviceConfig cfg = load_config("cosine.yaml");
    const Device dev = testing::device_with_mesh(cfg.device, 128, 32);
    SweepOptions opts;
    opts.layer_base = dev.mesh.layer_base;
    CosineRun r;
    r.report = run_sweep(dev, {0.2, 0.1, 0.05, 0.025, 0.0125}, opts);
    r.seconds = seconds_since(t0);
    return r;
  }();
  return run;
}

Outcome gamma_convergence() {
  const CosineRun& run = cosine_sweep();
  std::vector<double> gap, l2;
  for (const SweepRow& r : run.report.rows) {
    gap.push_back(r.gap);
    l2.push_back(r.l2_error);
  }
  const double rel = gap.back() / std::abs(run.report.rows.back().energy_limit);
  const bool ok = strictly_decreasing(gap) && strictly_decreasing(l2) && rel < 0.02 && run.seconds < 60.0;
  return {ok, fmt::format("gap {:.3e} -> {:.3e}, L2 {:.3e} -> {:.3e}, monotone: {}/{}, final relative gap {:.3e} "
                          "(limit 2e-2), {:.2f} s",
                          gap.front(), gap.back(), l2.front(), l2.back(), strictly_decreasing(gap) ? "yes" : "no",
                          strictly_decreasing(l2) ? "yes" : "no", rel, run.seconds)};
}

Outcome strip_decay() {
  const CosineRun& run = cosine_sweep();
  if (!run.report.strip_rate) return {false, "no rate fit"};
  const double s = run.report.strip_rate->slope;
  return {s >= 0.45, fmt::format("fitted slope {:.4f} over {} points (threshold 0.45)", s, run.report.strip_rate->points)};
}

Outcome trace_suite() {
  double worst = std::numeric_limits<double>::infinity();
  int fields = 0;
  std::mt19937_64 rng(20240607);
  for (const char* name : {"flat_plate.yaml", "cosine.yaml", "touchdown.yaml"}) {
    const Device dev = testing::device_with_mesh(load_config(name).device, 32, 8);
    const Mesh mesh = build_free_mesh(dev.domain, dev.u, dev.mesh.nx, dev.mesh.nz);
    const Frame frame = dev.domain.frame();
    for (int k = 0; k < 200; ++k) {
      const Field raw = testing::nodal(mesh, dev.u, testing::random_descriptor(frame, rng));
      Field adm = testing::nodal(mesh, dev.u, testing::random_admissible(frame, rng));
      testing::snap_dirichlet(mesh, adm);
      const TraceInequalityReport a = verify_trace_inequalities(mesh, raw);
      const TraceInequalityReport b = verify_trace_inequalities(mesh, adm);
      if (b.checks.size() != 4) return {false, fmt::format("admissible field {} on {} lost its t3/t4 checks", k, name)};
      worst = std::min({worst, a.worst_margin(), b.worst_margin()});
      fields += 2;
    }
  }

  // closed-form anchors on the unit square
  const Device flat = testing::device_with_mesh(load_config("flat_plate.yaml").device, 128, 32);
  const Mesh sq = build_free_mesh(flat.domain, flat.u, 128, 32);
  const Frame f = flat.domain.frame();
  Term zh;  // z + H
  zh.coeff = 1.0;
  zh.pzs = 1;
  Term mz = testing::mono(-1.0, 0, 1);  // -z sin(pi x)
  mz.trig = Trig::Sin;
  mz.mode = 1;
  const FunctionDescriptor lin(f, {zh});
  const FunctionDescriptor zsin(f, {mz});
  const TraceInequalityReport r1 = verify_trace_inequalities(sq, testing::nodal(sq, flat.u, lin));
  Field v2 = testing::nodal(sq, flat.u, zsin);
  testing::snap_dirichlet(sq, v2);
  const TraceInequalityReport r2 = verify_trace_inequalities(sq, v2);
  const double e1 = std::max(std::abs(r1.checks[0].lhs - 1.0), std::abs(r1.checks[0].rhs - (1.0 / 3.0 + 2.0 / std::sqrt(3.0))));
  double e2 = 1.0, e3 = 1.0;
  if (r2.checks.size() == 4) {
    e2 = std::max(std::abs(r2.checks[2].lhs - 1.0 / std::sqrt(6.0)), std::abs(r2.checks[2].rhs - std::sqrt(2.0)));
    e3 = std::max(std::abs(r2.checks[3].lhs - 0.5), std::abs(r2.checks[3].rhs - 2.0 / std::sqrt(12.0)));
  }
  const double anchor = std::max({e1, e2, e3});
  return {worst >= -1e-10 && anchor <= 1e-3,
          fmt::format("{} random fields on 3 geometries, worst margin {:.3e}; anchor deviation {:.2e} (tol 1e-3)", fields,
                      worst, anchor)};
}

Outcome residual_rates() {
  const DeviceConfig cfg = load_config("cosine.yaml");
  std::vector<double> robin, harmonic;
  for (int nx = 32; nx <= 256; nx *= 2) {
    const Device dev = testing::device_with_mesh(cfg.device, nx, nx / 4);
    const LimitSolution sol = solve_limit(dev);
    robin.push_back(robin_residual(sol.mesh, sol.psi, dev));
    harmonic.push_back(harmonic_residual(sol.mesh, sol.psi));
  }
  double worst = std::numeric_limits<double>::infinity();
  std::string ratios;
  for (std::size_t k = 1; k < robin.size(); ++k) {
    const double rr = robin[k - 1] / robin[k];
    const double rh = harmonic[k - 1] / harmonic[k];
    worst = std::min({worst, rr, rh});
    ratios += fmt::format(" {:.2f}/{:.2f}", rr, rh);
  }
  return {worst >= 1.8, fmt::format("Nx 32 -> 256, robin/harmonic ratios per doubling:{} (threshold 1.8)", ratios)};
}

Outcome recovery_sequence() {
  const DeviceConfig cfg = load_config("cosine.yaml");
  const Device dev = testing::device_with_mesh(cfg.device, 128, 32);
  const LimitSolution lim = solve_limit(dev);
  SweepOptions opts;
  opts.layer_base = dev.mesh.layer_base;
  const RecoveryReport rep = run_recovery(dev, lim.chi, {0.2, 0.1, 0.05, 0.025, 0.0125}, opts);
  std::vector<double> gap;
  double boundary = 0.0;
  for (const RecoveryRow& r : rep.rows) {
    gap.push_back(r.gap);
    boundary = std::max(boundary, r.boundary_max);
  }
  const double rel = gap.back() / std::abs(rep.rows.back().energy_theta);
  return {strictly_decreasing(gap) && rel < 0.05 && boundary == 0.0,
          fmt::format("gap {:.3e} -> {:.3e}, monotone: {}, final relative gap {:.3e} (limit 5e-2), max |boundary| {}",
                      gap.front(), gap.back(), strictly_decreasing(gap) ? "yes" : "no", rel, boundary)};
}

Outcome oracle_equivalence() {
  double worst = 0.0;
  int systems = 0;
  for (const std::string& name : testing::corpus_names()) {
    const DeviceConfig cfg = load_config(name);
    for (auto [nx, nz] : {std::pair{4, 2}, std::pair{6, 3}, std::pair{8, 4}, std::pair{10, 4}, std::pair{12, 6},
                          std::pair{16, 8}}) {
      Device dev = testing::device_with_mesh(cfg.device, nx, nz);
      dev.solver.choice = SolverChoice::ConjugateGradient;
      const LimitSolution lim = solve_limit(dev);
      if (lim.stats.unknowns <= 200) {
        const SparseMatrix A = lim.stiffness + lim.robin;
        const Field rhs = -(lim.stiffness * lim.lift) - lim.robin * lim.offset;
        worst = std::max(worst, (lim.chi - testing::oracle_solve(A, rhs, lim.mesh)).cwiseAbs().maxCoeff());
        ++systems;
      }
      for (double delta : cfg.deltas) {
        for (int nl : {1, 2}) {
          const TransmissionSolution sol = solve_transmission(dev, delta, nl);
          if (sol.stats.unknowns > 200) continue;
          const Field rhs = -(sol.stiffness * sol.lift);
          worst = std::max(worst, (sol.chi - testing::oracle_solve(sol.stiffness, rhs, sol.mesh)).cwiseAbs().maxCoeff());
          ++systems;
        }
      }
    }
  }
  return {systems > 0 && worst <= 1e-10,
          fmt::format("{} systems with <= 200 unknowns, max |CG - elimination| = {:.3e} (tol 1e-10)", systems, worst)};
}

}  // namespace

int main() {
  struct Item {
    int id;
    const char* name;
    Outcome (*run)();
  };
  const Item items[] = {
      {1, "flat-plate exactness", flat_plate_exactness},
      {2, "energy bound on the corpus", energy_bound_corpus},
      {3, "energy and minimizer convergence", gamma_convergence},
      {4, "strip decay rate", strip_decay},
      {5, "trace and Poincare inequalities", trace_suite},
      {6, "Robin and harmonic residual rates", residual_rates},
      {7, "recovery sequence", recovery_sequence},
      {8, "CG against dense elimination", oracle_equivalence},
  };
  int failed = 0;
  for (const Item& it : items) {
    Outcome o;
    try {
      o = it.run();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    failed += o.pass ? 0 : 1;
    fmt::print("[{}] {}: {}: {}\n", o.pass ? "PASS" : "FAIL", it.id, it.name, o.detail);
    std::fflush(stdout);
  }
  fmt::print("{} of 8 criteria passed\n", 8 - failed);
  return failed == 0 ? 0 : 1;
}
