#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace homog2d {

using Vec2 = Eigen::Vector2d;

struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class FacetTag { Dirichlet, Robin };

/// Polygonal domain description. Vertices are listed counter-clockwise;
/// edge k runs from vertex k to vertex (k+1) mod size. robin_edges selects
/// the edges that make up the natural-boundary part.
struct DomainSpec {
  std::vector<Vec2> vertices;
  std::vector<int> robin_edges;

  static DomainSpec rectangle(double x0, double y0, double x1, double y1);
  static DomainSpec unit_square() { return rectangle(0.0, 0.0, 1.0, 1.0); }

  bool is_rectangle() const;
  int num_edges() const { return static_cast<int>(vertices.size()); }
  bool edge_is_robin(int e) const;
  bool robin_everywhere() const;
  double diameter() const;
  void validate() const;  // simple, positively oriented, robin indices in range
};

/// Euclidean distance from x to the domain boundary; 0 for points outside
/// the closed domain. Exact minimum over the edge segments.
double boundary_distance(const DomainSpec& spec, const Vec2& x);

bool point_inside(const DomainSpec& spec, const Vec2& x);

struct BoundaryFacet {
  int a = -1, b = -1;     // node indices, boundary traversed CCW
  Vec2 normal{0, 0};      // outward unit normal
  FacetTag tag = FacetTag::Dirichlet;
  int edge = -1;          // index of the DomainSpec edge this facet lies on
};

/// Bilinear quadrilateral mesh. Elements store node indices CCW.
struct Mesh {
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 4>> elements;
  std::vector<BoundaryFacet> boundary_facets;
  double h = 0.0;  // max element diameter

  // Structured-lattice metadata (set by the builders; used for point location).
  Vec2 origin{0, 0};
  double dx = 0.0, dy = 0.0;
  int nx = 0, ny = 0;                 // lattice cells per direction
  std::vector<int> cell_of_lattice;   // lattice cell -> element index or -1

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_elements() const { return static_cast<int>(elements.size()); }

  /// Element containing x together with reference coordinates in [-1,1]^2.
  /// Points outside the meshed region are clamped to the nearest cell.
  int locate(const Vec2& x, Vec2& ref) const;

  /// Nodes lying on a Dirichlet-tagged facet.
  std::vector<char> dirichlet_node_mask() const;

  bool has_robin_facets() const;
  void validate() const;
};

/// Uniform m x m grid on the unit cell with opposite faces identified.
struct PeriodicMesh {
  Mesh mesh;                 // (m+1)^2 nodes on [0,1]^2
  int m = 0;
  std::vector<int> dof_map;  // node -> periodic DOF, idempotent through nodes
  int num_dofs = 0;          // m^2

  int dof_of_node(int node) const { return dof_map[node]; }
  /// Nodal values (size (m+1)^2) from periodic DOF values (size m^2 per comp).
  Eigen::VectorXd expand_to_nodes(const Eigen::VectorXd& dof_values) const;
};

PeriodicMesh build_unit_cell_mesh(int m);

/// Structured mesh of the domain with cell side <= h_target. Rectangles map
/// to a single block; axis-aligned rectilinear polygons are meshed from the
/// covering lattice, keeping cells inside the polygon (vertices must lie on
/// the lattice). Boundary facets are tagged from spec.robin_edges.
Mesh build_domain_mesh(const DomainSpec& spec, double h_target);

/// Same grid pitch in both directions; nx explicit (used by the epsilon-
/// resolving rule h = eps/kappa).
Mesh build_rectangle_mesh(const DomainSpec& spec, int nx_cells, int ny_cells);

/// Plain-text mesh listing: one record per line (nodes, elements, facets).
std::string export_mesh_text(const Mesh& mesh);

namespace detail {
// Fold a point into [0,1)^2.
inline Vec2 fold_unit(const Vec2& y) {
  return {y.x() - std::floor(y.x()), y.y() - std::floor(y.y())};
}
}  // namespace detail

}  // namespace homog2d
