#include <doctest.h>

#include <random>

#include "support.hpp"
#include "thinlayer/errors.hpp"
#include "thinlayer/gamma.hpp"

using namespace thinlayer;
using testing::device_from_yaml;
using testing::flat_yaml;

TEST_CASE("boundary cut-off") {
  const Domain1D d(0.0, 1.0, 1.0);
  CHECK(tau_delta(0.0, 0.04, d) == 0.0);
  CHECK(tau_delta(1.0, 0.04, d) == 0.0);
  CHECK(tau_delta(0.1, 0.04, d) == doctest::Approx(0.5));
  CHECK(tau_delta(0.5, 0.04, d) == 1.0);
  CHECK(tau_delta(0.9, 0.04, d) == doctest::Approx(0.5));
}

TEST_CASE("layer counts and log-log fits") {
  CHECK(sweep_layers(1, 0.2, 0.2) == 1);
  CHECK(sweep_layers(1, 0.2, 0.025) == 8);
  CHECK(sweep_layers(4, 0.2, 0.1) == 8);
  CHECK(sweep_layers(1, 0.2, 0.3) == 1);

  const std::vector<double> d{0.2, 0.1, 0.05, 0.025};
  std::vector<double> v;
  for (double x : d) v.push_back(3.0 * x * x);
  const auto fit = fit_loglog_slope(d, v);
  REQUIRE(fit);
  CHECK(fit->slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::exp(fit->intercept) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(fit->points == 3);
  // the dropped first point does not matter
  v[0] = 100.0;
  CHECK(fit_loglog_slope(d, v)->slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit_loglog_slope({0.2, 0.1}, {0.4, 0.2})->points == 2);
  CHECK_FALSE(fit_loglog_slope({0.2}, {1.0}));
  CHECK_FALSE(fit_loglog_slope({0.2, 0.1}, {1.0, 0.0}));
}

TEST_CASE("delta lists are validated") {
  CHECK_THROWS_AS(validate_delta_list({}), ValidationError);
  CHECK_THROWS_AS(validate_delta_list({0.1, 0.2}), ValidationError);
  CHECK_THROWS_AS(validate_delta_list({0.1, 0.1}), ValidationError);
  CHECK_THROWS_AS(validate_delta_list({1.0, 0.5}), ValidationError);
  CHECK_THROWS_AS(validate_delta_list({0.5, 0.0}), ValidationError);
  CHECK_NOTHROW(validate_delta_list({0.5, 0.25}));
}

TEST_CASE("recovery of zero is zero when the interface data match the plate datum") {
  // h = (z+H)/(w+H) vanishes at z = -H, so h(-H) = frak_h = 0
  const Device dev = device_from_yaml(
      "domain: {a: 0, b: 1, H: 1}\ndeflection: {terms: [{sin: 1, c: -0.5}]}\n"
      "permittivity: {terms: [[0,0,0,1]]}\nboundary: {form: affine, h: [{q: 1, p: -1, c: 1}], frak_h: []}\n"
      "mesh: {nx: 16, nz: 4}\n");
  const Mesh free = build_free_mesh(dev.domain, dev.u, 16, 4);
  const Mesh trans = build_transmission_mesh(dev.domain, dev.u, 0.1, 16, 4, 3);
  const RecoveryField r = build_recovery(free, Field::Zero(free.num_nodes()), trans, dev);
  CHECK(r.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("recovery copies free-space values and vanishes on the Dirichlet boundary") {
  std::mt19937_64 rng(3);
  for (const std::string& name : testing::corpus_names()) {
    CAPTURE(name);
    const Device dev = testing::device_with_mesh(testing::load_config(name).device, 16, 4);
    const Mesh free = build_free_mesh(dev.domain, dev.u, 16, 4, dev.mesh.eps_c);
    Field theta = testing::nodal(free, dev.u, testing::random_admissible(dev.u.descriptor().frame(), rng));
    testing::snap_dirichlet(free, theta);
    for (double delta : {0.2, 0.05}) {
      const Mesh trans = build_transmission_mesh(dev.domain, dev.u, delta, 16, 4, 2, dev.mesh.eps_c);
      const RecoveryField r = build_recovery(free, theta, trans, dev);
      double boundary = 0.0;
      for (Index n = 0; n < trans.num_nodes(); ++n) {
        if (trans.is_dirichlet(n)) boundary = std::max(boundary, std::abs(r.values[n]));
      }
      CHECK(boundary == 0.0);
      CHECK((restrict_to_free(trans, r.values) - theta).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("recovery rejects non-admissible fields") {
  const Device dev = testing::load_config("cosine.yaml").device;
  const Mesh free = build_free_mesh(dev.domain, dev.u, 16, 4);
  const Mesh trans = build_transmission_mesh(dev.domain, dev.u, 0.1, 16, 4, 2);
  CHECK_THROWS_AS(build_recovery(free, Field::Ones(free.num_nodes()), trans, dev), NotAdmissible);
  CHECK_THROWS_AS(build_recovery(trans, Field::Zero(trans.num_nodes()), trans, dev), std::invalid_argument);
}

TEST_CASE("strip norm and free-space differences") {
  const Device dev = device_from_yaml(flat_yaml("[]", 8, 4));
  const Mesh trans = build_transmission_mesh(dev.domain, dev.u, 0.1, 8, 4, 2);
  const Mesh free = build_free_mesh(dev.domain, dev.u, 8, 4);
  CHECK(strip_norm(trans, Field::Zero(trans.num_nodes())) == 0.0);
  Field free_only = Field::Zero(trans.num_nodes());
  for (Index n = 0; n < trans.num_nodes(); ++n) {
    if (!trans.is_layer_node(n) && trans.node_row[n] > 0) free_only[n] = 1.0;
  }
  CHECK(strip_norm(trans, free_only) == 0.0);
  CHECK(strip_norm(trans, Field::Ones(trans.num_nodes())) == doctest::Approx(std::sqrt(0.1)).epsilon(1e-13));
  CHECK(free_l2_difference(trans, Field::Ones(trans.num_nodes()), free, Field::Zero(free.num_nodes())) ==
        doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("flat plate sweep is exact") {
  const Device dev = device_from_yaml(flat_yaml("[]", 16, 4));
  const SweepReport rep = run_sweep(dev, {0.2, 0.1, 0.05});
  REQUIRE(rep.rows.size() == 3);
  for (const SweepRow& r : rep.rows) {
    CHECK(r.gap <= 1e-10);
    CHECK(r.l2_error <= 1e-10);
    CHECK(r.estimate_margin >= 0.0);
  }
  CHECK(rep.compat.passed());
}

TEST_CASE("single-delta sweep has no fit") {
  const Device dev = testing::device_with_mesh(testing::load_config("cosine.yaml").device, 16, 4);
  const SweepReport rep = run_sweep(dev, {0.1});
  CHECK(rep.rows.size() == 1);
  CHECK_FALSE(rep.gap_rate);
  CHECK_FALSE(rep.l2_rate);
}

TEST_CASE("serial and concurrent sweeps agree bitwise") {
  const Device dev = testing::device_with_mesh(testing::load_config("cosine.yaml").device, 16, 4);
  const std::vector<double> d{0.2, 0.1, 0.05};
  SweepOptions serial;
  serial.serial = true;
  const SweepReport a = run_sweep(dev, d, serial);
  const SweepReport b = run_sweep(dev, d);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t k = 0; k < a.rows.size(); ++k) {
    CHECK(a.rows[k].energy_delta == b.rows[k].energy_delta);
    CHECK(a.rows[k].l2_error == b.rows[k].l2_error);
    CHECK(a.rows[k].strip == b.rows[k].strip);
  }
}

TEST_CASE("liminf and recovery inequalities on a small mesh") {
  const Device dev = testing::device_with_mesh(testing::load_config("cosine.yaml").device, 16, 4);
  const SweepReport rep = run_sweep(dev, {0.2, 0.1});
  for (const SweepRow& r : rep.rows) CHECK(r.liminf_gap >= -1e-12);
  const LimitSolution l = solve_limit(dev);
  const RecoveryReport rec = run_recovery(dev, l.chi, {0.2, 0.1});
  for (const RecoveryRow& r : rec.rows) {
    CHECK(r.energy_recovery >= r.energy_minimizer - 1e-12);
    CHECK(r.boundary_max == 0.0);
  }
}

TEST_CASE("strict compatibility turns warnings into errors") {
  const Device dev = testing::device_with_mesh(testing::load_config("corpus/bump_up.yaml").device, 16, 4);
  SweepOptions strict;
  strict.strict_compat = true;
  CHECK_THROWS_AS(run_sweep(dev, {0.1}, strict), ValidationError);
  CHECK_FALSE(run_sweep(dev, {0.1}).compat.passed());
}

TEST_CASE("divergence reports the offending delta") {
  // 248 unknowns for the limit and the single-layer step stay dense; two layers push the
  // second step onto a capped CG with no fallback
  Device dev = testing::device_with_mesh(testing::load_config("cosine.yaml").device, 32, 8);
  dev.solver.dense_threshold = 250;
  dev.solver.dense_fallback_max = 0;
  dev.solver.max_iter = 1;
  SweepOptions opts;
  opts.serial = true;
  try {
    run_sweep(dev, {0.2, 0.1}, opts);
    FAIL("expected divergence");
  } catch (const SolverDiverged& e) {
    CHECK(std::string(e.what()).find("delta = 0.1:") == 0);
  }
}
