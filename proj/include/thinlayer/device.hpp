#pragma once

#include "thinlayer/coefficients.hpp"
#include "thinlayer/geometry.hpp"

namespace thinlayer {

struct MeshControls {
  int nx = 64;
  int nz = 16;
  int nl = 1;          // layer sublayers for single solves
  int layer_base = 1;  // sweeps use max(1, round(layer_base * delta_0 / delta))
  double eps_c = -1.0; // negative: 1e-12 * H
};

enum class SolverChoice { Auto, ConjugateGradient, Dense };

struct SolverOptions {
  double tol = 1e-12;              // relative residual
  int max_iter = 0;                // 0: 20 sqrt(n) + 1000
  int dense_threshold = 200;       // Auto picks dense elimination below this many unknowns
  int dense_fallback_max = 4000;   // largest system the stagnation fallback may densify
  SolverChoice choice = SolverChoice::Auto;
};

/// Everything that defines one electrostatic problem: geometry, permittivity, data, discretization.
struct Device {
  Domain1D domain;
  DeflectionProfile u;
  Permittivity sigma;
  BoundaryData data;
  MeshControls mesh;
  SolverOptions solver;
};

}  // namespace thinlayer
