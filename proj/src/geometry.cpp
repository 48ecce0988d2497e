#include "thinlayer/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "thinlayer/errors.hpp"

namespace thinlayer {

Domain1D::Domain1D(double a_, double b_, double H_) : a(a_), b(b_), H(H_) {
  if (!(a < b)) throw ValidationError("domain: a < b violated");
  if (!(H > 0.0)) throw ValidationError("domain: H > 0 violated");
}

std::vector<double> uniform_grid(const Domain1D& dom, int n) {
  if (n < 1) throw std::invalid_argument("uniform_grid needs n >= 1");
  std::vector<double> x(static_cast<std::size_t>(n) + 1);
  const double h = dom.length() / n;
  for (int i = 0; i < n; ++i) x[i] = dom.a + i * h;
  x[n] = dom.b;
  return x;
}

DeflectionProfile::DeflectionProfile(const Domain1D& dom, FunctionDescriptor u, double tol,
                                     int check_samples)
    : dom_(dom), u_(std::move(u)), du_(u_.dx()) {
  if (!u_.independent_of_z() || !u_.independent_of_w()) {
    throw ValidationError("deflection must depend on x only");
  }
  if (std::abs(u_(dom.a)) > tol || std::abs(u_(dom.b)) > tol) {
    throw ValidationError(fmt::format("deflection: u(a) = u(b) = 0 violated (u(a) = {:.3g}, u(b) = {:.3g})",
                                      u_(dom.a), u_(dom.b)));
  }
  for (double x : uniform_grid(dom, check_samples)) {
    if (u_(x) < -dom.H - tol * dom.H) {
      throw ValidationError(fmt::format("deflection: u >= -H violated at x = {:.6g} (u = {:.6g})", x, u_(x)));
    }
  }
}

std::vector<double> DeflectionProfile::sample(const std::vector<double>& grid) const {
  std::vector<double> out(grid.size());
  std::transform(grid.begin(), grid.end(), out.begin(), [this](double x) { return u_(x); });
  return out;
}

double max_gap(const DeflectionProfile& u, const std::vector<double>& grid) {
  double m = 0.0;
  for (double x : grid) m = std::max(m, u.domain().H + u(x));
  return m;
}

bool CoincidenceSet::contains(int i) const {
  return std::binary_search(indices.begin(), indices.end(), i);
}

CoincidenceSet detect_coincidence(const DeflectionProfile& u, const std::vector<double>& grid,
                                  double eps_c) {
  CoincidenceSet c;
  const double H = u.domain().H;
  for (int i = 0; i < static_cast<int>(grid.size()); ++i) {
    if (H + u(grid[i]) <= eps_c) {
      if (!c.intervals.empty() && c.intervals.back().second == i - 1) {
        c.intervals.back().second = i;
      } else {
        c.intervals.emplace_back(i, i);
      }
      c.indices.push_back(i);
    }
  }
  return c;
}

std::string_view tag_name(BoundaryTag t) {
  switch (t) {
    case BoundaryTag::None: return "interior";
    case BoundaryTag::TopDirichlet: return "top";
    case BoundaryTag::SideDirichlet: return "side";
    case BoundaryTag::BottomDirichlet: return "bottom";
    case BoundaryTag::Interface: return "interface";
    case BoundaryTag::Robin: return "robin";
  }
  return "?";
}

Index Mesh::free_node(int i, int j) const {
  const int rows = nz + nl + 1;
  return grid_index[static_cast<std::size_t>(i) * rows + (j + nl)];
}

Index Mesh::layer_node(int i, int l) const {
  if (kind != MeshKind::Transmission) return -1;
  const int rows = nz + nl + 1;
  return grid_index[static_cast<std::size_t>(i) * rows + l];
}

Index Mesh::top_node(int i) const { return free_node(i, nz); }

bool Mesh::is_dirichlet(Index n) const {
  const BoundaryTag t = node_tag[n];
  return t == BoundaryTag::TopDirichlet || t == BoundaryTag::SideDirichlet ||
         t == BoundaryTag::BottomDirichlet;
}

std::vector<Index> Mesh::free_subset() const {
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(nodes.cols()));
  for (Index n = 0; n < num_nodes(); ++n) {
    if (node_row[n] >= 0) out.push_back(n);
  }
  return out;
}

double Mesh::triangle_area(Index t) const {
  const auto& tri = triangles[t];
  const Eigen::Vector2d e1 = nodes.col(tri[1]) - nodes.col(tri[0]);
  const Eigen::Vector2d e2 = nodes.col(tri[2]) - nodes.col(tri[0]);
  return 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
}

Eigen::Vector2d Mesh::centroid(Index t) const {
  const auto& tri = triangles[t];
  return (nodes.col(tri[0]) + nodes.col(tri[1]) + nodes.col(tri[2])) / 3.0;
}

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  }
  void unite(int p, int q) {
    p = find(p);
    q = find(q);
    if (p != q) parent[std::max(p, q)] = std::min(p, q);
  }
};

void label_components(Mesh& m) {
  const int nt = static_cast<int>(m.triangles.size());
  UnionFind uf(nt);
  std::map<std::pair<Index, Index>, int> first_owner;
  for (int t = 0; t < nt; ++t) {
    const auto& tri = m.triangles[t];
    for (int k = 0; k < 3; ++k) {
      Index p = tri[k];
      Index q = tri[(k + 1) % 3];
      if (p > q) std::swap(p, q);
      auto [it, inserted] = first_owner.try_emplace({p, q}, t);
      if (!inserted) uf.unite(it->second, t);
    }
  }
  std::map<int, int> relabel;
  m.tri_component.assign(nt, -1);
  for (int t = 0; t < nt; ++t) {
    const int root = uf.find(t);
    auto [it, inserted] = relabel.try_emplace(root, static_cast<int>(relabel.size()));
    m.tri_component[t] = it->second;
  }
  m.num_components = static_cast<int>(relabel.size());
  m.node_component.assign(static_cast<std::size_t>(m.num_nodes()), -1);
  for (int t = 0; t < nt; ++t) {
    for (Index n : m.triangles[t]) {
      int& c = m.node_component[n];
      c = (c < 0) ? m.tri_component[t] : std::min(c, m.tri_component[t]);
    }
  }
}

Mesh build_mesh(MeshKind kind, const Domain1D& dom, const DeflectionProfile& u, double delta,
                int nx, int nz, int nl, double eps_c) {
  if (nx < 2 || nz < 2) throw std::invalid_argument("mesh needs Nx, Nz >= 2");
  if (kind == MeshKind::Transmission) {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("layer thickness must lie in (0, 1)");
    if (nl < 1) throw std::invalid_argument("mesh needs Nl >= 1");
  } else {
    delta = 0.0;
    nl = 0;
  }
  if (eps_c < 0.0) eps_c = 1e-12 * dom.H;

  Mesh m;
  m.kind = kind;
  m.domain = dom;
  m.delta = delta;
  m.nx = nx;
  m.nz = nz;
  m.nl = nl;
  m.x = uniform_grid(dom, nx);
  m.gap.resize(m.x.size());
  m.collapsed.assign(m.x.size(), false);
  const CoincidenceSet coincidence = detect_coincidence(u, m.x, eps_c);
  for (int i = 0; i <= nx; ++i) {
    m.gap[i] = dom.H + u(m.x[i]);
    m.collapsed[i] = coincidence.contains(i);
  }

  const int rows = nz + nl + 1;
  m.grid_index.assign(static_cast<std::size_t>(nx + 1) * rows, -1);
  std::vector<Eigen::Vector2d> pts;
  for (int i = 0; i <= nx; ++i) {
    auto add = [&](int row, double z, BoundaryTag tag) {
      const Index id = static_cast<Index>(pts.size());
      pts.emplace_back(m.x[i], z);
      m.node_col.push_back(i);
      m.node_row.push_back(row);
      m.node_tag.push_back(tag);
      m.grid_index[static_cast<std::size_t>(i) * rows + (row + nl)] = id;
      return id;
    };
    const bool side = (i == 0 || i == nx);
    for (int l = 0; l < nl; ++l) {
      const double z = -dom.H - delta + (static_cast<double>(l) / nl) * delta;
      add(l - nl, z, side ? BoundaryTag::SideDirichlet
                          : (l == 0 ? BoundaryTag::BottomDirichlet : BoundaryTag::None));
    }
    if (m.collapsed[i]) {
      const Index id = add(0, -dom.H, side ? BoundaryTag::SideDirichlet : BoundaryTag::TopDirichlet);
      for (int j = 1; j <= nz; ++j) m.grid_index[static_cast<std::size_t>(i) * rows + (j + nl)] = id;
      continue;
    }
    const BoundaryTag iface = (kind == MeshKind::Transmission) ? BoundaryTag::Interface : BoundaryTag::Robin;
    for (int j = 0; j <= nz; ++j) {
      const double z = -dom.H + (static_cast<double>(j) / nz) * m.gap[i];
      BoundaryTag tag = BoundaryTag::None;
      if (side) {
        tag = BoundaryTag::SideDirichlet;
      } else if (j == nz) {
        tag = BoundaryTag::TopDirichlet;
      } else if (j == 0) {
        tag = iface;
      }
      add(j, z, tag);
    }
  }
  m.nodes.resize(2, static_cast<Index>(pts.size()));
  for (std::size_t k = 0; k < pts.size(); ++k) m.nodes.col(static_cast<Index>(k)) = pts[k];

  auto node_at = [&](int i, int row) { return m.grid_index[static_cast<std::size_t>(i) * rows + (row + nl)]; };
  for (int i = 0; i < nx; ++i) {
    for (int row = -nl; row < nz; ++row) {
      const Index p00 = node_at(i, row);
      const Index p10 = node_at(i + 1, row);
      const Index p11 = node_at(i + 1, row + 1);
      const Index p01 = node_at(i, row + 1);
      const Region region = row < 0 ? Region::Layer : Region::Free;
      for (const std::array<Index, 3> tri : {std::array<Index, 3>{p00, p10, p11},
                                             std::array<Index, 3>{p00, p11, p01}}) {
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) continue;
        m.triangles.push_back(tri);
        m.tri_region.push_back(region);
      }
    }
  }
  for (Index t = 0; t < m.num_triangles(); ++t) {
    const double area = m.triangle_area(t);
    if (!(area > 0.0)) {
      throw DegenerateMesh(fmt::format("triangle {} has non-positive area {:.3g}", t, area));
    }
  }

  for (int i = 0; i < nx; ++i) {
    const bool both_collapsed = m.collapsed[i] && m.collapsed[i + 1];
    if (kind == MeshKind::Transmission) {
      m.edges.push_back({{node_at(i, -nl), node_at(i + 1, -nl)}, BoundaryTag::BottomDirichlet, i});
      m.edges.push_back({{node_at(i, 0), node_at(i + 1, 0)},
                         both_collapsed ? BoundaryTag::TopDirichlet : BoundaryTag::Interface, i});
    } else {
      m.edges.push_back({{node_at(i, 0), node_at(i + 1, 0)}, BoundaryTag::Robin, i});
    }
    if (!both_collapsed) {
      m.edges.push_back({{node_at(i, nz), node_at(i + 1, nz)}, BoundaryTag::TopDirichlet, i});
    }
  }
  for (int i : {0, nx}) {
    for (int row = -nl; row < nz; ++row) {
      m.edges.push_back({{node_at(i, row), node_at(i, row + 1)}, BoundaryTag::SideDirichlet, -1});
    }
  }

  label_components(m);
  return m;
}

}  // namespace

Mesh build_free_mesh(const Domain1D& dom, const DeflectionProfile& u, int nx, int nz, double eps_c) {
  return build_mesh(MeshKind::FreeOnly, dom, u, 0.0, nx, nz, 0, eps_c);
}

Mesh build_transmission_mesh(const Domain1D& dom, const DeflectionProfile& u, double delta,
                             int nx, int nz, int nl, double eps_c) {
  return build_mesh(MeshKind::Transmission, dom, u, delta, nx, nz, nl, eps_c);
}

bool MeshCheck::ok(double rel_tol) const {
  return min_area > 0.0 &&
         std::abs(total_area - expected_area) <= rel_tol * std::max(1.0, std::abs(expected_area));
}

MeshCheck validate_mesh(const Mesh& mesh) {
  MeshCheck c;
  c.min_area = mesh.num_triangles() > 0 ? mesh.triangle_area(0) : 0.0;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const double a = mesh.triangle_area(t);
    c.min_area = std::min(c.min_area, a);
    c.total_area += a;
  }
  for (int i = 0; i < mesh.nx; ++i) {
    const double g0 = mesh.collapsed[i] ? 0.0 : mesh.gap[i];
    const double g1 = mesh.collapsed[i + 1] ? 0.0 : mesh.gap[i + 1];
    c.expected_area += 0.5 * (g0 + g1) * (mesh.x[i + 1] - mesh.x[i]);
  }
  c.expected_area += mesh.delta * mesh.domain.length();
  return c;
}

void write_mesh(std::ostream& os, const Mesh& mesh, const Eigen::VectorXd* values) {
  for (Index n = 0; n < mesh.num_nodes(); ++n) {
    os << fmt::format("node {:.17g} {:.17g} {} {}", mesh.nodes(0, n), mesh.nodes(1, n),
                      tag_name(mesh.node_tag[n]), mesh.node_component[n]);
    if (values != nullptr) os << fmt::format(" {:.17g}", (*values)[n]);
    os << '\n';
  }
  for (const auto& tri : mesh.triangles) {
    os << fmt::format("tri {} {} {}\n", tri[0], tri[1], tri[2]);
  }
}

}  // namespace thinlayer
