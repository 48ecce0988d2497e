#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "thinlayer/config.hpp"
#include "thinlayer/fem.hpp"

namespace testing {

using namespace thinlayer;

inline std::string config_path(const std::string& name) { return std::string(THINLAYER_CONFIG_DIR) + "/" + name; }

inline DeviceConfig load_config(const std::string& name) { return parse_config(config_path(name)); }

inline Device device_from_yaml(const std::string& text) { return parse_config_text(text, "test").device; }

/// Unit domain, sigma = 2, h = 1/3 + 2/3 (z+H), frak_h = 0; u and the mesh are variable.
inline std::string flat_yaml(const std::string& deflection = "[]", int nx = 8, int nz = 4) {
  return "domain: {a: 0, b: 1, H: 1}\n"
         "deflection: {terms: " + deflection + "}\n"
         "permittivity: {terms: [[0, 0, 0, 2.0]]}\n"
         "boundary: {form: affine, h: [[0, 0, 0, 0.33333333333333333], {q: 1, c: 0.66666666666666667}], frak_h: []}\n"
         "mesh: {nx: " + std::to_string(nx) + ", nz: " + std::to_string(nz) + ", layers: 2}\n";
}

inline Device device_with_mesh(Device dev, int nx, int nz) {
  dev.mesh.nx = nx;
  dev.mesh.nz = nz;
  return dev;
}

inline std::vector<std::string> corpus_names() {
  return {"flat_plate.yaml",          "cosine.yaml",           "touchdown.yaml",
          "corpus/bump_up.yaml",      "corpus/two_mode.yaml",  "corpus/graded_layer.yaml",
          "corpus/explicit_layer.yaml", "corpus/shifted_domain.yaml", "corpus/double_touchdown.yaml",
          "corpus/cosine_data.yaml",  "corpus/parabola_touchdown.yaml"};
}

inline Frame unit_frame() { return {0.0, 1.0, 1.0}; }

inline Term mono(double c, int i, int j = 0, int k = 0) {
  Term t;
  t.coeff = c;
  t.px = i;
  t.pz = j;
  t.pw = k;
  return t;
}

inline Term sine(double c, int mode) {
  Term t;
  t.coeff = c;
  t.trig = Trig::Sin;
  t.mode = mode;
  return t;
}

/// Gaussian elimination with partial pivoting on a dense copy; no library solver involved.
inline Eigen::VectorXd gauss_solve(Eigen::MatrixXd A, Eigen::VectorXd b) {
  const Index n = A.rows();
  for (Index k = 0; k < n; ++k) {
    Index p = k;
    for (Index r = k + 1; r < n; ++r) {
      if (std::abs(A(r, k)) > std::abs(A(p, k))) p = r;
    }
    if (p != k) {
      A.row(k).swap(A.row(p));
      std::swap(b[k], b[p]);
    }
    for (Index r = k + 1; r < n; ++r) {
      const double f = A(r, k) / A(k, k);
      if (f == 0.0) continue;
      for (Index c = k; c < n; ++c) A(r, c) -= f * A(k, c);
      b[r] -= f * b[k];
    }
  }
  Eigen::VectorXd x(n);
  for (Index k = n - 1; k >= 0; --k) {
    double s = b[k];
    for (Index c = k + 1; c < n; ++c) s -= A(k, c) * x[c];
    x[k] = s / A(k, k);
  }
  return x;
}

/// Solve A chi = rhs with chi = 0 on Dirichlet nodes by replacing those rows with identity rows.
inline Eigen::VectorXd oracle_solve(const SparseMatrix& A, const Eigen::VectorXd& rhs, const Mesh& mesh) {
  Eigen::MatrixXd D(A);
  Eigen::VectorXd b = rhs;
  for (Index k = 0; k < mesh.num_nodes(); ++k) {
    if (!mesh.is_dirichlet(k)) continue;
    D.row(k).setZero();
    D(k, k) = 1.0;
    b[k] = 0.0;
  }
  return gauss_solve(D, b);
}

inline Index count_unknowns(const Mesh& mesh) {
  Index n = 0;
  for (Index k = 0; k < mesh.num_nodes(); ++k) n += mesh.is_dirichlet(k) ? 0 : 1;
  return n;
}

/// Nodal values of f(x, z, u(x)).
inline Eigen::VectorXd nodal(const Mesh& mesh, const DeflectionProfile& u, const FunctionDescriptor& f) {
  Eigen::VectorXd v(mesh.num_nodes());
  for (Index n = 0; n < mesh.num_nodes(); ++n) {
    const double x = mesh.nodes(0, n);
    v[n] = f(x, mesh.nodes(1, n), u(x));
  }
  return v;
}

/// Zero the Dirichlet nodes that only carry rounding noise.
inline void snap_dirichlet(const Mesh& mesh, Eigen::VectorXd& v, double tol = 1e-12) {
  for (Index n = 0; n < mesh.num_nodes(); ++n) {
    if (mesh.is_dirichlet(n) && std::abs(v[n]) <= tol) v[n] = 0.0;
  }
}

/// Random smooth descriptor in (x, z, w): a few monomials of total degree <= 3 and sine modes.
inline FunctionDescriptor random_descriptor(const Frame& frame, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  std::uniform_int_distribution<int> deg(0, 3);
  std::uniform_int_distribution<int> mode(1, 4);
  std::uniform_int_distribution<int> count(1, 4);
  std::vector<Term> terms;
  const int n = count(rng);
  for (int k = 0; k < n; ++k) {
    Term t = mono(coef(rng), deg(rng), deg(rng) % 3, deg(rng) % 2);
    if (t.px + t.pz + t.pw > 4) t.px = 0;
    if (k % 2 == 1) {
      t.trig = (k % 4 == 1) ? Trig::Sin : Trig::Cos;
      t.mode = mode(rng);
    }
    terms.push_back(t);
  }
  return {frame, std::move(terms)};
}

/// (w - z) (x - a)(b - x) p(x, z) for a random polynomial p: vanishes on the plate, the
/// sides and, through w = z = -H, on the coincidence set.
inline FunctionDescriptor random_admissible(const Frame& frame, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  std::uniform_int_distribution<int> deg(0, 2);
  std::vector<Term> terms;
  const int n = 1 + deg(rng);
  const double ab = frame.a * frame.b;
  const double apb = frame.a + frame.b;
  for (int k = 0; k < n; ++k) {
    const double c = coef(rng);
    const int i = deg(rng);
    const int j = deg(rng) % 2;
    // (x - a)(b - x) = -x^2 + (a+b) x - ab
    for (auto [cx, px] : {std::pair{-1.0, 2}, std::pair{apb, 1}, std::pair{-ab, 0}}) {
      terms.push_back(mono(c * cx, i + px, j, 1));
      terms.push_back(mono(-c * cx, i + px, j + 1, 0));
    }
  }
  return {frame, std::move(terms)};
}

}  // namespace testing
