#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "thinlayer/device.hpp"
#include "thinlayer/geometry.hpp"

namespace thinlayer {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Field = Eigen::VectorXd;

/// Coefficient sampled at element centroids.
using PointFunction = std::function<double(double x, double z)>;
using LineFunction = std::function<double(double x)>;

enum class GradientPart { Full, ZOnly };

/// P1 element stiffness c * area * grad(lambda) grad(lambda)^T for a counter-clockwise triangle.
Eigen::Matrix3d element_stiffness(const Eigen::Matrix<double, 2, 3>& vertices, double c,
                                  GradientPart part = GradientPart::Full);

SparseMatrix assemble_stiffness(const Mesh& mesh, const PointFunction& coeff,
                                GradientPart part = GradientPart::Full);

enum class RegionFilter { All, Free, Layer };

/// Consistent P1 mass matrix over the selected triangles.
SparseMatrix assemble_mass(const Mesh& mesh, RegionFilter filter = RegionFilter::All);

enum class EdgeSelection { All, Coincidence };

/// Weighted 1-D P1 mass over horizontal edges of the given tag, 2-point Gauss in x.
/// Coincidence keeps only edges whose both columns lie in C(u).
SparseMatrix assemble_edge_mass(const Mesh& mesh, BoundaryTag tag, const LineFunction& weight,
                                EdgeSelection select = EdgeSelection::All);

struct RobinBlock {
  SparseMatrix matrix;   // int sigma(x,-H) phi_i phi_j over the Robin edges
  Eigen::VectorXd rhs;   // -matrix * offset, offset = nodal (h_u - frak_h_u)(., -H)
};

/// Robin contribution of the limit functional. The offset is a nodal vector carrying
/// (h_u - frak_h_u)(x_i, -H) on the interface nodes.
RobinBlock assemble_robin(const Mesh& mesh, const LineFunction& sigma_interface,
                          const Eigen::VectorXd& offset);

struct SparseSystem {
  SparseMatrix matrix;
  Eigen::VectorXd rhs;
  std::vector<bool> dirichlet;
  Eigen::VectorXd prescribed;

  [[nodiscard]] Index size() const { return rhs.size(); }
};

enum class SolverKind { ConjugateGradient, Dense };

struct SolveStats {
  int iterations = 0;
  double residual = 0.0;
  double wall_seconds = 0.0;
  SolverKind kind = SolverKind::ConjugateGradient;
  Index unknowns = 0;
};

/// Jacobi-preconditioned conjugate gradients on an SPD matrix; returns false on reaching the cap.
bool conjugate_gradient(const SparseMatrix& A, const Eigen::VectorXd& b, Eigen::VectorXd& x,
                        double tol, int max_iter, int& iterations, double& residual);

/// Eliminate Dirichlet rows and columns, solve the reduced SPD system.
Eigen::VectorXd solve_system(const SparseSystem& sys, const SolverOptions& opts, SolveStats& stats);

std::vector<bool> dirichlet_mask(const Mesh& mesh);

struct TransmissionSolution {
  Mesh mesh;
  double delta = 0.0;
  SparseMatrix stiffness;  // weighted by sigma_delta
  Field lift;              // nodal interpolant of h_{u,delta}
  Field psi;
  Field chi;
  SolveStats stats;
};

struct LimitSolution {
  Mesh mesh;
  SparseMatrix stiffness;
  SparseMatrix robin;
  SparseMatrix robin_coincidence;  // Robin mass restricted to edges inside C(u)
  Field lift;    // nodal h_u
  Field offset;  // (h_u - frak_h_u)(x_i, -H) on interface nodes, 0 elsewhere
  Field psi;
  Field chi;
  SolveStats stats;
};

/// Nodal interpolant of h_{u,delta} on a transmission mesh; layer nodes use the exact
/// layer fraction so that the bottom row equals frak_h_u bit for bit.
Field transmission_lift(const Mesh& mesh, const Device& dev);
Field limit_lift(const Mesh& mesh, const Device& dev);
Field limit_offset(const Mesh& mesh, const Device& dev);

SparseMatrix transmission_stiffness(const Mesh& mesh, const Device& dev);

TransmissionSolution solve_transmission(const Device& dev, double delta, int nl);
inline TransmissionSolution solve_transmission(const Device& dev, double delta) {
  return solve_transmission(dev, delta, dev.mesh.nl);
}
LimitSolution solve_limit(const Device& dev);

/// L2(D) norm of delta sigma d_z psi (below) - d_z psi (above) at the interface.
double flux_jump_residual(const Mesh& mesh, const Field& psi, const Permittivity& sigma);

/// L2(D \ C(u)) norm of -d_z psi + sigma (psi - frak_h_u) at z = -H.
double robin_residual(const Mesh& mesh, const Field& psi, const Device& dev);

/// Discrete Laplacian of the nodal field from local quadratic least-squares fits on
/// 3 x 3 grid blocks, L2 over interior free-space nodes with lumped weights.
double harmonic_residual(const Mesh& mesh, const Field& psi);

}  // namespace thinlayer
