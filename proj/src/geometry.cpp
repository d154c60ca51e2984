#include "homog2d/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace homog2d {

DomainSpec DomainSpec::rectangle(double x0, double y0, double x1, double y1) {
  if (!(x1 > x0) || !(y1 > y0)) throw GeometryError("rectangle: degenerate extents");
  DomainSpec s;
  s.vertices = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
  return s;
}

bool DomainSpec::is_rectangle() const {
  if (vertices.size() != 4) return false;
  return vertices[0].y() == vertices[1].y() && vertices[1].x() == vertices[2].x() &&
         vertices[2].y() == vertices[3].y() && vertices[3].x() == vertices[0].x();
}

bool DomainSpec::edge_is_robin(int e) const {
  return std::find(robin_edges.begin(), robin_edges.end(), e) != robin_edges.end();
}

bool DomainSpec::robin_everywhere() const {
  if (static_cast<int>(robin_edges.size()) != num_edges()) return false;
  for (int e = 0; e < num_edges(); ++e)
    if (!edge_is_robin(e)) return false;
  return true;
}

double DomainSpec::diameter() const {
  double d = 0;
  for (size_t i = 0; i < vertices.size(); ++i)
    for (size_t j = i + 1; j < vertices.size(); ++j)
      d = std::max(d, (vertices[i] - vertices[j]).norm());
  return d;
}

namespace {

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

bool segments_intersect_interior(const Vec2& p0, const Vec2& p1, const Vec2& q0,
                                 const Vec2& q1) {
  const double d1 = cross2(p1 - p0, q0 - p0);
  const double d2 = cross2(p1 - p0, q1 - p0);
  const double d3 = cross2(q1 - q0, p0 - q0);
  const double d4 = cross2(q1 - q0, p1 - q0);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
         ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

double point_segment_distance(const Vec2& x, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0) return (x - a).norm();
  const double t = std::clamp((x - a).dot(ab) / len2, 0.0, 1.0);
  return (x - (a + t * ab)).norm();
}

}  // namespace

void DomainSpec::validate() const {
  const int ne = num_edges();
  if (ne < 3) throw GeometryError("polygon needs at least 3 vertices");
  double area2 = 0;
  for (int e = 0; e < ne; ++e) area2 += cross2(vertices[e], vertices[(e + 1) % ne]);
  if (!(area2 > 0)) throw GeometryError("polygon must be simple and positively oriented");
  for (int e = 0; e < ne; ++e) {
    const Vec2& p0 = vertices[e];
    const Vec2& p1 = vertices[(e + 1) % ne];
    if ((p1 - p0).norm() == 0) throw GeometryError("degenerate polygon edge");
    for (int f = e + 1; f < ne; ++f) {
      if (f == e || (f + 1) % ne == e || (e + 1) % ne == f) continue;
      if (segments_intersect_interior(p0, p1, vertices[f], vertices[(f + 1) % ne]))
        throw GeometryError("polygon is self-intersecting");
    }
  }
  for (int e : robin_edges)
    if (e < 0 || e >= ne) throw GeometryError("robin edge index out of range");
}

bool point_inside(const DomainSpec& spec, const Vec2& x) {
  // Crossing number; boundary points count as inside.
  const int ne = spec.num_edges();
  for (int e = 0; e < ne; ++e) {
    if (point_segment_distance(x, spec.vertices[e], spec.vertices[(e + 1) % ne]) < 1e-14)
      return true;
  }
  bool inside = false;
  for (int e = 0; e < ne; ++e) {
    const Vec2& a = spec.vertices[e];
    const Vec2& b = spec.vertices[(e + 1) % ne];
    if ((a.y() > x.y()) != (b.y() > x.y())) {
      const double xc = a.x() + (x.y() - a.y()) / (b.y() - a.y()) * (b.x() - a.x());
      if (x.x() < xc) inside = !inside;
    }
  }
  return inside;
}

double boundary_distance(const DomainSpec& spec, const Vec2& x) {
  if (!point_inside(spec, x)) return 0.0;
  double d = std::numeric_limits<double>::max();
  const int ne = spec.num_edges();
  for (int e = 0; e < ne; ++e)
    d = std::min(d, point_segment_distance(x, spec.vertices[e], spec.vertices[(e + 1) % ne]));
  return d;
}

int Mesh::locate(const Vec2& x, Vec2& ref) const {
  if (nx <= 0 || ny <= 0 || dx <= 0 || dy <= 0)
    throw GeometryError("locate: mesh lacks lattice metadata");
  const double fx = (x.x() - origin.x()) / dx;
  const double fy = (x.y() - origin.y()) / dy;
  int ix = std::clamp(static_cast<int>(std::floor(fx)), 0, nx - 1);
  int iy = std::clamp(static_cast<int>(std::floor(fy)), 0, ny - 1);
  int e = cell_of_lattice.empty() ? iy * nx + ix : cell_of_lattice[iy * nx + ix];
  if (e < 0) {
    // Point in a lattice cell outside the meshed polygon: snap to the nearest
    // meshed lattice cell (small search ring; meshes here are rectilinear).
    int best = -1;
    double best_d2 = std::numeric_limits<double>::max();
    for (int jy = 0; jy < ny; ++jy)
      for (int jx = 0; jx < nx; ++jx) {
        const int cand = cell_of_lattice[jy * nx + jx];
        if (cand < 0) continue;
        const Vec2 c = origin + Vec2((jx + 0.5) * dx, (jy + 0.5) * dy);
        const double d2 = (x - c).squaredNorm();
        if (d2 < best_d2) {
          best_d2 = d2;
          best = cand;
          ix = jx;
          iy = jy;
        }
      }
    e = best;
    if (e < 0) throw GeometryError("locate: empty mesh");
  }
  const double lx = std::clamp(fx - ix, 0.0, 1.0);
  const double ly = std::clamp(fy - iy, 0.0, 1.0);
  ref = {2.0 * lx - 1.0, 2.0 * ly - 1.0};
  return e;
}

std::vector<char> Mesh::dirichlet_node_mask() const {
  std::vector<char> mask(nodes.size(), 0);
  for (const auto& f : boundary_facets)
    if (f.tag == FacetTag::Dirichlet) {
      mask[f.a] = 1;
      mask[f.b] = 1;
    }
  return mask;
}

bool Mesh::has_robin_facets() const {
  for (const auto& f : boundary_facets)
    if (f.tag == FacetTag::Robin) return true;
  return false;
}

void Mesh::validate() const {
  // Positive Jacobian at the 3x3 Gauss points of every element.
  static const double g = std::sqrt(3.0 / 5.0);
  static const double pts[3] = {-g, 0.0, g};
  for (const auto& el : elements) {
    for (double eta : pts)
      for (double xi : pts) {
        const double dN[4][2] = {
            {-(1 - eta) / 4, -(1 - xi) / 4},
            {(1 - eta) / 4, -(1 + xi) / 4},
            {(1 + eta) / 4, (1 + xi) / 4},
            {-(1 + eta) / 4, (1 - xi) / 4},
        };
        Eigen::Matrix2d J = Eigen::Matrix2d::Zero();
        for (int a = 0; a < 4; ++a) {
          J(0, 0) += dN[a][0] * nodes[el[a]].x();
          J(0, 1) += dN[a][1] * nodes[el[a]].x();
          J(1, 0) += dN[a][0] * nodes[el[a]].y();
          J(1, 1) += dN[a][1] * nodes[el[a]].y();
        }
        if (!(J.determinant() > 0)) throw GeometryError("element with non-positive Jacobian");
      }
  }
  for (const auto& f : boundary_facets) {
    if (std::abs(f.normal.norm() - 1.0) > 1e-12)
      throw GeometryError("boundary facet normal is not unit");
  }
}

PeriodicMesh build_unit_cell_mesh(int m) {
  if (m < 2) throw GeometryError("build_unit_cell_mesh: resolution must be >= 2");
  PeriodicMesh pm;
  pm.m = m;
  pm.num_dofs = m * m;
  Mesh& mesh = pm.mesh;
  const int np = m + 1;
  mesh.nodes.resize(static_cast<size_t>(np) * np);
  const double h = 1.0 / m;
  for (int iy = 0; iy < np; ++iy)
    for (int ix = 0; ix < np; ++ix) mesh.nodes[iy * np + ix] = {ix * h, iy * h};
  mesh.elements.reserve(static_cast<size_t>(m) * m);
  for (int iy = 0; iy < m; ++iy)
    for (int ix = 0; ix < m; ++ix)
      mesh.elements.push_back({iy * np + ix, iy * np + ix + 1, (iy + 1) * np + ix + 1,
                               (iy + 1) * np + ix});
  mesh.h = h * std::sqrt(2.0);
  mesh.origin = {0, 0};
  mesh.dx = mesh.dy = h;
  mesh.nx = mesh.ny = m;
  pm.dof_map.resize(mesh.nodes.size());
  for (int iy = 0; iy < np; ++iy)
    for (int ix = 0; ix < np; ++ix)
      pm.dof_map[iy * np + ix] = (iy % m) * m + (ix % m);
  return pm;
}

Eigen::VectorXd PeriodicMesh::expand_to_nodes(const Eigen::VectorXd& dof_values) const {
  Eigen::VectorXd out(mesh.num_nodes());
  for (int i = 0; i < mesh.num_nodes(); ++i) out[i] = dof_values[dof_map[i]];
  return out;
}

Mesh build_rectangle_mesh(const DomainSpec& spec, int nx_cells, int ny_cells) {
  if (!spec.is_rectangle()) throw GeometryError("build_rectangle_mesh: spec is not a rectangle");
  spec.validate();
  if (nx_cells < 1 || ny_cells < 1) throw GeometryError("rectangle mesh needs >= 1 cell");
  Mesh mesh;
  const Vec2 lo = spec.vertices[0], hi = spec.vertices[2];
  const double dx = (hi.x() - lo.x()) / nx_cells;
  const double dy = (hi.y() - lo.y()) / ny_cells;
  const int np = nx_cells + 1;
  mesh.nodes.resize(static_cast<size_t>(np) * (ny_cells + 1));
  for (int iy = 0; iy <= ny_cells; ++iy)
    for (int ix = 0; ix <= nx_cells; ++ix)
      mesh.nodes[iy * np + ix] = {lo.x() + ix * dx, lo.y() + iy * dy};
  for (int iy = 0; iy < ny_cells; ++iy)
    for (int ix = 0; ix < nx_cells; ++ix)
      mesh.elements.push_back({iy * np + ix, iy * np + ix + 1, (iy + 1) * np + ix + 1,
                               (iy + 1) * np + ix});
  mesh.h = std::hypot(dx, dy);
  mesh.origin = lo;
  mesh.dx = dx;
  mesh.dy = dy;
  mesh.nx = nx_cells;
  mesh.ny = ny_cells;

  auto tag_of_edge = [&](int e) {
    return spec.edge_is_robin(e) ? FacetTag::Robin : FacetTag::Dirichlet;
  };
  // Rectangle edges CCW from vertex 0: 0 bottom, 1 right, 2 top, 3 left.
  for (int ix = 0; ix < nx_cells; ++ix) {
    mesh.boundary_facets.push_back({ix, ix + 1, {0, -1}, tag_of_edge(0), 0});
    const int top = ny_cells * np;
    mesh.boundary_facets.push_back(
        {top + ix + 1, top + ix, {0, 1}, tag_of_edge(2), 2});
  }
  for (int iy = 0; iy < ny_cells; ++iy) {
    mesh.boundary_facets.push_back(
        {iy * np + nx_cells, (iy + 1) * np + nx_cells, {1, 0}, tag_of_edge(1), 1});
    mesh.boundary_facets.push_back({(iy + 1) * np, iy * np, {-1, 0}, tag_of_edge(3), 3});
  }
  return mesh;
}

namespace {

// Nearest lattice index for a coordinate that should sit on the lattice.
int lattice_index(double coord, double lo, double pitch, const char* what) {
  const double f = (coord - lo) / pitch;
  const double r = std::round(f);
  if (std::abs(f - r) > 1e-9)
    throw GeometryError(std::string("polygon ") + what + " not aligned to the mesh pitch");
  return static_cast<int>(r);
}

}  // namespace

Mesh build_domain_mesh(const DomainSpec& spec, double h_target) {
  spec.validate();
  if (!(h_target > 0)) throw GeometryError("h_target must be positive");

  if (spec.is_rectangle()) {
    const Vec2 lo = spec.vertices[0], hi = spec.vertices[2];
    const int nx = std::max(1, static_cast<int>(std::ceil((hi.x() - lo.x()) / h_target - 1e-12)));
    const int ny = std::max(1, static_cast<int>(std::ceil((hi.y() - lo.y()) / h_target - 1e-12)));
    return build_rectangle_mesh(spec, nx, ny);
  }

  // Axis-aligned rectilinear polygon: mesh from the covering lattice.
  for (int e = 0; e < spec.num_edges(); ++e) {
    const Vec2 d = spec.vertices[(e + 1) % spec.num_edges()] - spec.vertices[e];
    if (d.x() != 0 && d.y() != 0)
      throw GeometryError("only axis-aligned polygon edges are supported");
  }
  Vec2 lo = spec.vertices[0], hi = spec.vertices[0];
  for (const auto& v : spec.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  const int nx = std::max(1, static_cast<int>(std::ceil((hi.x() - lo.x()) / h_target - 1e-12)));
  const int ny = std::max(1, static_cast<int>(std::ceil((hi.y() - lo.y()) / h_target - 1e-12)));
  const double dx = (hi.x() - lo.x()) / nx;
  const double dy = (hi.y() - lo.y()) / ny;
  for (const auto& v : spec.vertices) {
    lattice_index(v.x(), lo.x(), dx, "vertex");
    lattice_index(v.y(), lo.y(), dy, "vertex");
  }

  Mesh mesh;
  mesh.origin = lo;
  mesh.dx = dx;
  mesh.dy = dy;
  mesh.nx = nx;
  mesh.ny = ny;
  mesh.h = std::hypot(dx, dy);
  mesh.cell_of_lattice.assign(static_cast<size_t>(nx) * ny, -1);

  const int np = nx + 1;
  std::vector<int> node_id(static_cast<size_t>(np) * (ny + 1), -1);
  auto get_node = [&](int ix, int iy) {
    int& id = node_id[iy * np + ix];
    if (id < 0) {
      id = mesh.num_nodes();
      mesh.nodes.push_back({lo.x() + ix * dx, lo.y() + iy * dy});
    }
    return id;
  };

  std::vector<char> keep(static_cast<size_t>(nx) * ny, 0);
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      const Vec2 c = lo + Vec2((ix + 0.5) * dx, (iy + 0.5) * dy);
      keep[iy * nx + ix] = point_inside(spec, c) ? 1 : 0;
    }
  if (std::find(keep.begin(), keep.end(), 1) == keep.end())
    throw GeometryError("mesh pitch too coarse for polygon");

  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      if (!keep[iy * nx + ix]) continue;
      mesh.cell_of_lattice[iy * nx + ix] = mesh.num_elements();
      mesh.elements.push_back({get_node(ix, iy), get_node(ix + 1, iy),
                               get_node(ix + 1, iy + 1), get_node(ix, iy + 1)});
    }

  auto edge_of_facet = [&](const Vec2& a, const Vec2& b) {
    const Vec2 mid = 0.5 * (a + b);
    for (int e = 0; e < spec.num_edges(); ++e) {
      if (point_segment_distance(mid, spec.vertices[e],
                                 spec.vertices[(e + 1) % spec.num_edges()]) < 1e-10)
        return e;
    }
    throw GeometryError("boundary facet does not lie on a polygon edge");
  };
  auto is_kept = [&](int ix, int iy) {
    return ix >= 0 && ix < nx && iy >= 0 && iy < ny && keep[iy * nx + ix];
  };
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      if (!keep[iy * nx + ix]) continue;
      struct Side {
        int dix, diy;
        int a_ix, a_iy, b_ix, b_iy;  // facet nodes CCW seen from the cell
        Vec2 normal;
      };
      const Side sides[4] = {
          {0, -1, ix, iy, ix + 1, iy, {0, -1}},
          {1, 0, ix + 1, iy, ix + 1, iy + 1, {1, 0}},
          {0, 1, ix + 1, iy + 1, ix, iy + 1, {0, 1}},
          {-1, 0, ix, iy + 1, ix, iy, {-1, 0}},
      };
      for (const auto& s : sides) {
        if (is_kept(ix + s.dix, iy + s.diy)) continue;
        BoundaryFacet f;
        f.a = get_node(s.a_ix, s.a_iy);
        f.b = get_node(s.b_ix, s.b_iy);
        f.normal = s.normal;
        f.edge = edge_of_facet(mesh.nodes[f.a], mesh.nodes[f.b]);
        f.tag = spec.edge_is_robin(f.edge) ? FacetTag::Robin : FacetTag::Dirichlet;
        mesh.boundary_facets.push_back(f);
      }
    }
  return mesh;
}

std::string export_mesh_text(const Mesh& mesh) {
  std::ostringstream os;
  os.precision(17);
  for (int i = 0; i < mesh.num_nodes(); ++i)
    os << "node " << i << " " << mesh.nodes[i].x() << " " << mesh.nodes[i].y() << "\n";
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& el = mesh.elements[e];
    os << "element " << e << " " << el[0] << " " << el[1] << " " << el[2] << " " << el[3]
       << "\n";
  }
  for (const auto& f : mesh.boundary_facets)
    os << "facet " << f.a << " " << f.b << " "
       << (f.tag == FacetTag::Dirichlet ? "dirichlet" : "robin") << " " << f.normal.x()
       << " " << f.normal.y() << "\n";
  return os.str();
}

}  // namespace homog2d
