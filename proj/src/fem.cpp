#include "thinlayer/fem.hpp"

#include <chrono>
#include <cmath>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "thinlayer/errors.hpp"

namespace thinlayer {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

Eigen::Matrix<double, 2, 3> vertices_of(const Mesh& mesh, Index t) {
  Eigen::Matrix<double, 2, 3> v;
  for (int k = 0; k < 3; ++k) v.col(k) = mesh.nodes.col(mesh.triangles[t][k]);
  return v;
}

bool keep(const Mesh& mesh, Index t, RegionFilter filter) {
  switch (filter) {
    case RegionFilter::All: return true;
    case RegionFilter::Free: return mesh.tri_region[t] == Region::Free;
    case RegionFilter::Layer: return mesh.tri_region[t] == Region::Layer;
  }
  return true;
}

SparseMatrix from_triplets(Index n, const Triplets& trip) {
  SparseMatrix m(n, n);
  m.setFromTriplets(trip.begin(), trip.end());
  m.makeCompressed();
  return m;
}

// Weights for sum_i w_i f(x_i)^2 over the interface columns: trapezoid in x.
std::vector<double> trapezoid_weights(const Mesh& mesh) {
  std::vector<double> w(mesh.x.size(), 0.0);
  for (int i = 0; i < mesh.nx; ++i) {
    const double h = mesh.x[i + 1] - mesh.x[i];
    w[i] += 0.5 * h;
    w[i + 1] += 0.5 * h;
  }
  return w;
}

// One-sided vertical difference quotient of psi just above z = -H in column i.
double dz_above(const Mesh& mesh, const Field& psi, int i) {
  const Index n0 = mesh.free_node(i, 0);
  const Index n1 = mesh.free_node(i, 1);
  return (psi[n1] - psi[n0]) / (mesh.nodes(1, n1) - mesh.nodes(1, n0));
}

double dz_below(const Mesh& mesh, const Field& psi, int i) {
  const Index n0 = mesh.layer_node(i, mesh.nl - 1);
  const Index n1 = mesh.layer_node(i, mesh.nl);
  return (psi[n1] - psi[n0]) / (mesh.nodes(1, n1) - mesh.nodes(1, n0));
}

}  // namespace

Eigen::Matrix3d element_stiffness(const Eigen::Matrix<double, 2, 3>& v, double c, GradientPart part) {
  const double area2 = (v(0, 1) - v(0, 0)) * (v(1, 2) - v(1, 0)) -
                       (v(1, 1) - v(1, 0)) * (v(0, 2) - v(0, 0));
  if (!(area2 > 0.0)) throw DegenerateMesh("element with non-positive area");
  Eigen::Matrix<double, 3, 2> grad;
  for (int k = 0; k < 3; ++k) {
    const int p = (k + 1) % 3;
    const int q = (k + 2) % 3;
    grad(k, 0) = (v(1, p) - v(1, q)) / area2;
    grad(k, 1) = (v(0, q) - v(0, p)) / area2;
  }
  if (part == GradientPart::ZOnly) grad.col(0).setZero();
  return c * 0.5 * area2 * grad * grad.transpose();
}

SparseMatrix assemble_stiffness(const Mesh& mesh, const PointFunction& coeff, GradientPart part) {
  Triplets trip;
  trip.reserve(static_cast<std::size_t>(mesh.num_triangles()) * 9);
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const Eigen::Vector2d c = mesh.centroid(t);
    const Eigen::Matrix3d ke = element_stiffness(vertices_of(mesh, t), coeff(c.x(), c.y()), part);
    const auto& tri = mesh.triangles[t];
    for (int r = 0; r < 3; ++r) {
      for (int s = 0; s < 3; ++s) trip.emplace_back(tri[r], tri[s], ke(r, s));
    }
  }
  return from_triplets(mesh.num_nodes(), trip);
}

SparseMatrix assemble_mass(const Mesh& mesh, RegionFilter filter) {
  Triplets trip;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    if (!keep(mesh, t, filter)) continue;
    const double a = mesh.triangle_area(t);
    const auto& tri = mesh.triangles[t];
    for (int r = 0; r < 3; ++r) {
      for (int s = 0; s < 3; ++s) trip.emplace_back(tri[r], tri[s], a * (r == s ? 2.0 : 1.0) / 12.0);
    }
  }
  return from_triplets(mesh.num_nodes(), trip);
}

SparseMatrix assemble_edge_mass(const Mesh& mesh, BoundaryTag tag, const LineFunction& weight,
                                EdgeSelection select) {
  static const double g = 0.5 / std::sqrt(3.0);
  Triplets trip;
  for (const Edge& e : mesh.edges) {
    if (e.tag != tag) continue;
    if (select == EdgeSelection::Coincidence &&
        !(e.column >= 0 && mesh.collapsed[e.column] && mesh.collapsed[e.column + 1])) {
      continue;
    }
    const double x0 = mesh.nodes(0, e.nodes[0]);
    const double x1 = mesh.nodes(0, e.nodes[1]);
    const double len = std::abs(x1 - x0);
    Eigen::Matrix2d me = Eigen::Matrix2d::Zero();
    for (double t : {0.5 - g, 0.5 + g}) {
      const double w = weight(x0 + t * (x1 - x0));
      const Eigen::Vector2d phi(1.0 - t, t);
      me += 0.5 * len * w * phi * phi.transpose();
    }
    for (int r = 0; r < 2; ++r) {
      for (int s = 0; s < 2; ++s) trip.emplace_back(e.nodes[r], e.nodes[s], me(r, s));
    }
  }
  return from_triplets(mesh.num_nodes(), trip);
}

RobinBlock assemble_robin(const Mesh& mesh, const LineFunction& sigma_interface,
                          const Eigen::VectorXd& offset) {
  RobinBlock block;
  block.matrix = assemble_edge_mass(mesh, BoundaryTag::Robin, sigma_interface);
  block.rhs = -(block.matrix * offset);
  return block;
}

std::vector<bool> dirichlet_mask(const Mesh& mesh) {
  std::vector<bool> mask(static_cast<std::size_t>(mesh.num_nodes()));
  for (Index n = 0; n < mesh.num_nodes(); ++n) mask[n] = mesh.is_dirichlet(n);
  return mask;
}

bool conjugate_gradient(const SparseMatrix& A, const Eigen::VectorXd& b, Eigen::VectorXd& x,
                        double tol, int max_iter, int& iterations, double& residual) {
  iterations = 0;
  const double bnorm = b.norm();
  if (x.size() != b.size()) x = Eigen::VectorXd::Zero(b.size());
  if (bnorm == 0.0) {
    x.setZero();
    residual = 0.0;
    return true;
  }
  const Eigen::VectorXd inv_diag = A.diagonal().cwiseInverse();
  Eigen::VectorXd r = b - A * x;
  residual = r.norm() / bnorm;
  while (iterations < max_iter) {
    if (residual <= tol) return true;
    // (re)start from the true residual
    Eigen::VectorXd zv = inv_diag.cwiseProduct(r);
    Eigen::VectorXd p = zv;
    double rz = r.dot(zv);
    while (iterations < max_iter) {
      const Eigen::VectorXd Ap = A * p;
      const double alpha = rz / p.dot(Ap);
      x += alpha * p;
      r -= alpha * Ap;
      ++iterations;
      if (r.norm() / bnorm <= tol) break;
      zv = inv_diag.cwiseProduct(r);
      const double rz_next = r.dot(zv);
      p = zv + (rz_next / rz) * p;
      rz = rz_next;
    }
    r = b - A * x;
    residual = r.norm() / bnorm;
  }
  return residual <= tol;
}

Eigen::VectorXd solve_system(const SparseSystem& sys, const SolverOptions& opts, SolveStats& stats) {
  const auto start = std::chrono::steady_clock::now();
  const Index n = sys.size();
  std::vector<Index> reduced(static_cast<std::size_t>(n), -1);
  Index nfree = 0;
  for (Index k = 0; k < n; ++k) {
    if (!sys.dirichlet[k]) reduced[k] = nfree++;
  }

  Eigen::VectorXd b(nfree);
  Triplets trip;
  for (Index row = 0; row < n; ++row) {
    if (reduced[row] < 0) continue;
    double rhs = sys.rhs[row];
    for (SparseMatrix::InnerIterator it(sys.matrix, row); it; ++it) {
      if (reduced[it.col()] >= 0) {
        trip.emplace_back(reduced[row], reduced[it.col()], it.value());
      } else {
        rhs -= it.value() * sys.prescribed[it.col()];
      }
    }
    b[reduced[row]] = rhs;
  }
  SparseMatrix A = from_triplets(nfree, trip);

  Eigen::VectorXd xf = Eigen::VectorXd::Zero(nfree);
  stats = SolveStats{};
  stats.unknowns = nfree;

  auto dense_solve = [&]() {
    const Eigen::MatrixXd Ad(A);
    xf = Ad.partialPivLu().solve(b);
    stats.kind = SolverKind::Dense;
    const double bn = b.norm();
    stats.residual = bn > 0.0 ? (b - A * xf).norm() / bn : 0.0;
  };

  bool use_dense = opts.choice == SolverChoice::Dense ||
                   (opts.choice == SolverChoice::Auto && nfree < opts.dense_threshold);
  if (nfree == 0) {
    stats.kind = SolverKind::Dense;
  } else if (use_dense) {
    dense_solve();
  } else {
    const int cap = opts.max_iter > 0
                        ? opts.max_iter
                        : static_cast<int>(20.0 * std::sqrt(static_cast<double>(nfree))) + 1000;
    stats.kind = SolverKind::ConjugateGradient;
    const bool ok = conjugate_gradient(A, b, xf, opts.tol, cap, stats.iterations, stats.residual);
    if (!ok) {
      if (opts.choice == SolverChoice::Auto && nfree <= opts.dense_fallback_max) {
        dense_solve();
      } else {
        throw SolverDiverged(fmt::format("CG stalled at relative residual {:.3g} after {} iterations ({} unknowns)",
                                         stats.residual, stats.iterations, nfree));
      }
    }
  }
  if (!std::isfinite(stats.residual)) throw SolverDiverged("non-finite residual");

  Eigen::VectorXd x = sys.prescribed;
  for (Index k = 0; k < n; ++k) {
    if (reduced[k] >= 0) x[k] = xf[reduced[k]];
  }
  stats.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return x;
}

Field transmission_lift(const Mesh& mesh, const Device& dev) {
  const double H = dev.domain.H;
  Field lift(mesh.num_nodes());
  for (Index n = 0; n < mesh.num_nodes(); ++n) {
    const double x = mesh.nodes(0, n);
    const double w = dev.u(x);
    if (mesh.node_row[n] < 0) {
      const double s = static_cast<double>(mesh.node_row[n] + mesh.nl) / mesh.nl;
      lift[n] = dev.data.h_b()(x, -H - 1.0 + s, w);
    } else {
      lift[n] = dev.data.h()(x, mesh.nodes(1, n), w);
    }
  }
  return lift;
}

Field limit_lift(const Mesh& mesh, const Device& dev) {
  Field lift(mesh.num_nodes());
  for (Index n = 0; n < mesh.num_nodes(); ++n) {
    lift[n] = h_u(dev.data, dev.u, mesh.nodes(0, n), mesh.nodes(1, n));
  }
  return lift;
}

Field limit_offset(const Mesh& mesh, const Device& dev) {
  Field g = Field::Zero(mesh.num_nodes());
  for (int i = 0; i <= mesh.nx; ++i) {
    const double x = mesh.x[i];
    g[mesh.interface_node(i)] = h_u(dev.data, dev.u, x, -dev.domain.H) - frak_h_u(dev.data, dev.u, x);
  }
  return g;
}

SparseMatrix transmission_stiffness(const Mesh& mesh, const Device& dev) {
  return assemble_stiffness(mesh, [&](double x, double z) {
    return sigma_delta(dev.sigma, dev.domain, mesh.delta, x, z);
  });
}

TransmissionSolution solve_transmission(const Device& dev, double delta, int nl) {
  TransmissionSolution sol;
  sol.delta = delta;
  sol.mesh = build_transmission_mesh(dev.domain, dev.u, delta, dev.mesh.nx, dev.mesh.nz, nl,
                                     dev.mesh.eps_c);
  sol.stiffness = transmission_stiffness(sol.mesh, dev);
  sol.lift = transmission_lift(sol.mesh, dev);

  SparseSystem sys;
  sys.matrix = sol.stiffness;
  sys.rhs = -(sol.stiffness * sol.lift);
  sys.dirichlet = dirichlet_mask(sol.mesh);
  sys.prescribed = Field::Zero(sol.mesh.num_nodes());
  sol.chi = solve_system(sys, dev.solver, sol.stats);
  sol.psi = sol.chi + sol.lift;
  return sol;
}

LimitSolution solve_limit(const Device& dev) {
  LimitSolution sol;
  sol.mesh = build_free_mesh(dev.domain, dev.u, dev.mesh.nx, dev.mesh.nz, dev.mesh.eps_c);
  sol.stiffness = assemble_stiffness(sol.mesh, [](double, double) { return 1.0; });
  sol.lift = limit_lift(sol.mesh, dev);
  sol.offset = limit_offset(sol.mesh, dev);
  const double H = dev.domain.H;
  const LineFunction sigma_interface = [&](double x) { return dev.sigma(x, -H); };
  RobinBlock robin = assemble_robin(sol.mesh, sigma_interface, sol.offset);
  sol.robin = robin.matrix;
  sol.robin_coincidence =
      assemble_edge_mass(sol.mesh, BoundaryTag::Robin, sigma_interface, EdgeSelection::Coincidence);

  SparseSystem sys;
  sys.matrix = sol.stiffness + sol.robin;
  sys.rhs = -(sol.stiffness * sol.lift) + robin.rhs;
  sys.dirichlet = dirichlet_mask(sol.mesh);
  sys.prescribed = Field::Zero(sol.mesh.num_nodes());
  sol.chi = solve_system(sys, dev.solver, sol.stats);
  sol.psi = sol.chi + sol.lift;
  return sol;
}

double flux_jump_residual(const Mesh& mesh, const Field& psi, const Permittivity& sigma) {
  if (mesh.kind != MeshKind::Transmission) throw std::invalid_argument("flux jump needs a transmission mesh");
  const std::vector<double> w = trapezoid_weights(mesh);
  double sum = 0.0;
  for (int i = 0; i <= mesh.nx; ++i) {
    if (mesh.collapsed[i]) continue;
    const double jump = mesh.delta * sigma(mesh.x[i], -mesh.domain.H) * dz_below(mesh, psi, i) -
                        dz_above(mesh, psi, i);
    sum += w[i] * jump * jump;
  }
  return std::sqrt(sum);
}

double robin_residual(const Mesh& mesh, const Field& psi, const Device& dev) {
  const std::vector<double> w = trapezoid_weights(mesh);
  const double H = dev.domain.H;
  double sum = 0.0;
  for (int i = 0; i <= mesh.nx; ++i) {
    if (mesh.collapsed[i]) continue;
    const double x = mesh.x[i];
    const double r = -dz_above(mesh, psi, i) +
                     dev.sigma(x, -H) * (psi[mesh.interface_node(i)] - frak_h_u(dev.data, dev.u, x));
    sum += w[i] * r * r;
  }
  return std::sqrt(sum);
}

double harmonic_residual(const Mesh& mesh, const Field& psi) {
  Eigen::VectorXd lumped = Eigen::VectorXd::Zero(mesh.num_nodes());
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const double a = mesh.triangle_area(t) / 3.0;
    for (Index n : mesh.triangles[t]) lumped[n] += a;
  }
  double sum = 0.0;
  Eigen::Matrix<double, 9, 6> V;
  Eigen::Matrix<double, 9, 1> f;
  for (int i = 1; i < mesh.nx; ++i) {
    if (mesh.collapsed[i - 1] || mesh.collapsed[i] || mesh.collapsed[i + 1]) continue;
    const double hx = mesh.x[i + 1] - mesh.x[i - 1];
    for (int j = 1; j < mesh.nz; ++j) {
      const Index c = mesh.free_node(i, j);
      const double hz = mesh.nodes(1, mesh.free_node(i, j + 1)) - mesh.nodes(1, mesh.free_node(i, j - 1));
      int r = 0;
      for (int di = -1; di <= 1; ++di) {
        for (int dj = -1; dj <= 1; ++dj, ++r) {
          const Index n = mesh.free_node(i + di, j + dj);
          const double dx = (mesh.nodes(0, n) - mesh.nodes(0, c)) / hx;
          const double dz = (mesh.nodes(1, n) - mesh.nodes(1, c)) / hz;
          V.row(r) << 1.0, dx, dz, dx * dx, dx * dz, dz * dz;
          f[r] = psi[n];
        }
      }
      const Eigen::Matrix<double, 6, 1> coef = V.colPivHouseholderQr().solve(f);
      const double lap = 2.0 * coef[3] / (hx * hx) + 2.0 * coef[5] / (hz * hz);
      sum += lumped[c] * lap * lap;
    }
  }
  return std::sqrt(sum);
}

}  // namespace thinlayer
