#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "thinlayer/descriptor.hpp"

namespace thinlayer {

using Index = Eigen::Index;

struct Domain1D {
  double a = 0.0;
  double b = 1.0;
  double H = 1.0;

  Domain1D() = default;
  Domain1D(double a_, double b_, double H_);

  [[nodiscard]] double length() const { return b - a; }
  [[nodiscard]] Frame frame() const { return {a, b, H}; }
};

/// Uniform grid x_i = a + i (b-a)/n, i = 0..n, with x_n pinned to b.
std::vector<double> uniform_grid(const Domain1D& dom, int n);

/// Deflection u of the elastic plate; u(a) = u(b) = 0 and u >= -H are enforced on construction.
class DeflectionProfile {
 public:
  DeflectionProfile(const Domain1D& dom, FunctionDescriptor u, double tol = 1e-12,
                    int check_samples = 1024);

  [[nodiscard]] double operator()(double x) const { return u_(x); }
  [[nodiscard]] double derivative(double x) const { return du_(x); }
  [[nodiscard]] const FunctionDescriptor& descriptor() const { return u_; }
  [[nodiscard]] const Domain1D& domain() const { return dom_; }
  [[nodiscard]] std::vector<double> sample(const std::vector<double>& grid) const;

 private:
  Domain1D dom_;
  FunctionDescriptor u_;
  FunctionDescriptor du_;
};

/// Maximum of H + u over the grid (M_u in the trace bounds).
double max_gap(const DeflectionProfile& u, const std::vector<double>& grid);

struct CoincidenceSet {
  std::vector<int> indices;
  /// Maximal runs of consecutive grid indices, as closed [first, last] pairs.
  std::vector<std::pair<int, int>> intervals;

  [[nodiscard]] bool empty() const { return indices.empty(); }
  [[nodiscard]] bool contains(int i) const;
};

CoincidenceSet detect_coincidence(const DeflectionProfile& u, const std::vector<double>& grid,
                                  double eps_c);

enum class MeshKind : std::uint8_t { FreeOnly, Transmission };

enum class BoundaryTag : std::uint8_t {
  None,
  TopDirichlet,
  SideDirichlet,
  BottomDirichlet,
  Interface,  // matched free/layer line of a transmission mesh
  Robin,      // single-sided interface line of a free-space mesh
};

std::string_view tag_name(BoundaryTag t);

enum class Region : std::uint8_t { Free, Layer };

struct Edge {
  std::array<Index, 2> nodes;
  BoundaryTag tag;
  int column;  // left column index of the edge for horizontal edges, -1 otherwise
};

/// Mapped tensor triangulation of Omega(u) or Omega_delta(u).
///
/// Node order is column-major, bottom-up: per column the layer nodes (transmission
/// meshes only), then the interface node, then the free-space nodes up to the plate.
/// Coincidence columns keep only their interface node on the free side.
struct Mesh {
  MeshKind kind = MeshKind::FreeOnly;
  Domain1D domain;
  double delta = 0.0;
  int nx = 0;
  int nz = 0;
  int nl = 0;

  std::vector<double> x;       // column abscissae, nx + 1
  std::vector<double> gap;     // H + u(x_i)
  std::vector<bool> collapsed; // column belongs to the coincidence set

  Eigen::Matrix2Xd nodes;      // (x, z) per node
  std::vector<int> node_col;
  std::vector<int> node_row;   // free rows 0..nz, layer rows -nl..-1
  std::vector<BoundaryTag> node_tag;
  std::vector<int> node_component;  // -1 for nodes outside every triangle

  std::vector<std::array<Index, 3>> triangles;
  std::vector<Region> tri_region;
  std::vector<int> tri_component;
  int num_components = 0;

  std::vector<Edge> edges;

  [[nodiscard]] Index num_nodes() const { return nodes.cols(); }
  [[nodiscard]] Index num_triangles() const { return static_cast<Index>(triangles.size()); }

  /// Node at free row j of column i (j = 0 is the interface); collapsed columns return
  /// their single interface node for every j.
  [[nodiscard]] Index free_node(int i, int j) const;
  /// Node at layer row l of column i, l = 0 bottom .. nl interface.
  [[nodiscard]] Index layer_node(int i, int l) const;
  [[nodiscard]] Index interface_node(int i) const { return free_node(i, 0); }
  [[nodiscard]] Index top_node(int i) const;

  [[nodiscard]] bool is_dirichlet(Index n) const;
  [[nodiscard]] bool is_layer_node(Index n) const { return node_row[n] < 0; }

  /// Node ids of the free-space sub-mesh, in the order of the matching free mesh.
  [[nodiscard]] std::vector<Index> free_subset() const;

  [[nodiscard]] double triangle_area(Index t) const;
  [[nodiscard]] Eigen::Vector2d centroid(Index t) const;

  // (col, row + nl) -> node id, -1 if absent
  std::vector<Index> grid_index;
};

/// eps_c < 0 selects the default collapse threshold 1e-12 * H.
Mesh build_free_mesh(const Domain1D& dom, const DeflectionProfile& u, int nx, int nz,
                     double eps_c = -1.0);

Mesh build_transmission_mesh(const Domain1D& dom, const DeflectionProfile& u, double delta,
                             int nx, int nz, int nl, double eps_c = -1.0);

struct MeshCheck {
  double min_area = 0.0;
  double total_area = 0.0;
  double expected_area = 0.0;  // trapezoid rule of H+u (+ delta (b-a))
  [[nodiscard]] bool ok(double rel_tol = 1e-12) const;
};

MeshCheck validate_mesh(const Mesh& mesh);

/// Plain-text dump: "node x z tag component [value]" and "tri i j k" lines.
void write_mesh(std::ostream& os, const Mesh& mesh, const Eigen::VectorXd* values = nullptr);

}  // namespace thinlayer
