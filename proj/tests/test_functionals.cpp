#include <doctest.h>

#include <random>

#include "support.hpp"
#include "thinlayer/errors.hpp"
#include "thinlayer/functionals.hpp"

using namespace thinlayer;
using testing::device_from_yaml;
using testing::flat_yaml;

TEST_CASE("energies of the flat plate") {
  const Device dev = device_from_yaml(flat_yaml("[]", 8, 4));
  const LimitSolution l = solve_limit(dev);
  const EnergyBreakdown e = energy_G(l, l.chi);
  // psi = h: |grad h|^2 = 4/9 on the unit square, (psi - frak_h)(-H) = 1/3 with sigma = 2
  CHECK(e.bulk == doctest::Approx(2.0 / 9.0).epsilon(1e-13));
  CHECK(e.interface == doctest::Approx(1.0 / 9.0).epsilon(1e-13));
  CHECK(e.total == e.bulk + e.interface);
  CHECK(e.coincidence == 0.0);
  CHECK(e.lift == LiftKind::Limit);
  CHECK(electrostatic_energy(l) == doctest::Approx(-1.0 / 3.0).epsilon(1e-13));

  const TransmissionSolution t = solve_transmission(dev, 0.1, 2);
  const EnergyBreakdown et = energy_G_delta(t, t.chi);
  // free part 2/9, layer 1/2 * 0.2 * (1/3 / 0.1)^2 * 0.1 = 1/9
  CHECK(et.total == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(et.interface == 0.0);
  CHECK(electrostatic_energy(t) == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
  CHECK(energy_G_delta(t.mesh, dev, t.chi).total == doctest::Approx(et.total).epsilon(1e-14));
}

TEST_CASE("energies reject fields that violate the boundary conditions") {
  const Device dev = device_from_yaml(flat_yaml("[]", 8, 4));
  const LimitSolution l = solve_limit(dev);
  Field bad = l.chi;
  bad[l.mesh.top_node(3)] = 1e-3;
  CHECK_THROWS_AS(energy_G(l, bad), NotAdmissible);
  CHECK_THROWS_AS(energy_G(l, Field::Zero(3)), NotAdmissible);
}

TEST_CASE("coincidence part of the interface energy") {
  // |x - 1/2| <= 0.0707 collapses columns 28..36 of 64, total width 1/8; offset 1/3, sigma 2
  std::string yaml = flat_yaml("[[2,0,0,4.0],[1,0,0,-4.0]]", 64, 8);
  yaml.replace(yaml.find("layers: 2"), 9, "layers: 2, coincidence_eps: 0.02");
  const Device dev = device_from_yaml(yaml);
  const LimitSolution l = solve_limit(dev);
  const EnergyBreakdown e = energy_G(l, l.chi);
  CHECK(e.coincidence == doctest::Approx(1.0 / 72.0).epsilon(1e-12));
  CHECK(e.coincidence < e.interface);
}

TEST_CASE("traces") {
  const Device dev = device_from_yaml(flat_yaml("[[2,0,0,4.0],[1,0,0,-4.0]]", 8, 4));
  const Mesh m = build_free_mesh(dev.domain, dev.u, 8, 4);
  Field v(m.num_nodes());
  for (Index n = 0; n < m.num_nodes(); ++n) v[n] = 1.0 + m.nodes(0, n) + m.nodes(1, n);
  const TraceVector top = trace_top(m, v);
  const TraceVector bottom = trace_bottom(m, v);
  CHECK(top.values[2] == doctest::Approx(1.25 + m.gap[2] - 1.0));
  CHECK(bottom.values[2] == doctest::Approx(0.25));
  CHECK(top.masked[4]);
  CHECK(bottom.masked[4]);
  CHECK(top.values[4] == 0.0);
  CHECK(bottom.values[4] == 0.0);
  CHECK(top.weight[2] == doctest::Approx(m.gap[2]));
}

TEST_CASE("field norms on exact linear fields") {
  const Device dev = device_from_yaml(flat_yaml("[]", 8, 4));
  const Mesh m = build_free_mesh(dev.domain, dev.u, 8, 4);
  Field v(m.num_nodes());
  for (Index n = 0; n < m.num_nodes(); ++n) v[n] = -m.nodes(1, n);  // 1 on the layer, 0 on the plate
  const FieldNorms n = field_norms(m, v);
  CHECK(n.l2 * n.l2 == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
  CHECK(n.dz_l2 == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(n.bottom_sq == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(n.top_weighted == doctest::Approx(0.0).epsilon(1e-13));
  CHECK(n.max_gap == 1.0);
}

TEST_CASE("trace inequalities") {
  const Device dev = testing::load_config("cosine.yaml").device;
  const Mesh m = build_free_mesh(dev.domain, dev.u, 32, 8);
  SUBCASE("zero field: all four checks hold with zero margin") {
    const TraceInequalityReport r = verify_trace_inequalities(m, Field::Zero(m.num_nodes()));
    REQUIRE(r.checks.size() == 4);
    CHECK(r.worst_margin() == 0.0);
    CHECK(r.passed());
  }
  SUBCASE("non-admissible fields get the two trace checks only") {
    const TraceInequalityReport r = verify_trace_inequalities(m, Field::Ones(m.num_nodes()));
    CHECK(r.checks.size() == 2);
    CHECK(r.passed());
  }
  SUBCASE("random admissible fields") {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 20; ++k) {
      Field v = testing::nodal(m, dev.u, testing::random_admissible(dev.u.descriptor().frame(), rng));
      testing::snap_dirichlet(m, v);
      const TraceInequalityReport r = verify_trace_inequalities(m, v);
      CHECK(r.checks.size() == 4);
      CHECK(r.passed());
    }
  }
  CHECK_THROWS_AS(verify_trace_inequalities(build_transmission_mesh(dev.domain, dev.u, 0.1, 8, 4, 1),
                                            Field::Zero(1)),
                  std::invalid_argument);
}
