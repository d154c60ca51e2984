#pragma once

#include <array>
#include <cmath>

#include "homog2d/geometry.hpp"

namespace homog2d {

/// Tensor Gauss rule on the reference square [-1,1]^2 together with the
/// bilinear shape functions evaluated at the rule points.
struct QuadRule {
  struct Point {
    double xi, eta, w;
    std::array<double, 4> N;
    std::array<std::array<double, 2>, 4> dN;  // reference gradients
  };
  std::vector<Point> points;

  static const QuadRule& gauss3();  // 3x3, default throughout
  static QuadRule make(int order);
};

/// Per-element geometry at the rule points (physical coordinates, physical
/// shape gradients, Jacobian-weighted quadrature weight).
struct ElementQuad {
  struct QPoint {
    Vec2 x;
    double w;                                 // includes |det J|
    std::array<std::array<double, 2>, 4> grad;  // physical dN
    std::array<double, 4> N;
  };
  std::vector<QPoint> pts;

  ElementQuad(const Mesh& mesh, int elem, const QuadRule& rule);
};

/// Per-mesh quadrature cache. Meshes built here have congruent axis-aligned
/// rectangular elements, so shape gradients and weights are shared and only
/// the physical point moves; falls back to per-element data otherwise.
class QuadCache {
 public:
  QuadCache(const Mesh& mesh, const QuadRule& rule = QuadRule::gauss3());

  int points_per_element() const { return static_cast<int>(ref_.pts.size()); }

  /// Visit the quadrature points of one element.
  template <class F>
  void for_each(int e, F&& f) const {
    if (uniform_) {
      const Vec2 base = mesh_->nodes[mesh_->elements[e][0]];
      for (size_t q = 0; q < ref_.pts.size(); ++q) {
        ElementQuad::QPoint qp = ref_.pts[q];
        qp.x = base + offsets_[q];
        f(static_cast<int>(q), qp);
      }
    } else {
      const ElementQuad eq(*mesh_, e, rule_);
      for (size_t q = 0; q < eq.pts.size(); ++q) f(static_cast<int>(q), eq.pts[q]);
    }
  }

  const Mesh& mesh() const { return *mesh_; }

 private:
  const Mesh* mesh_;
  const QuadRule& rule_;
  bool uniform_ = false;
  ElementQuad ref_;
  std::vector<Vec2> offsets_;
};

/// 2-point Gauss rule on a boundary facet.
struct FacetQuad {
  struct QPoint {
    Vec2 x;
    double w;
    double Na, Nb;  // linear trace shapes at the facet end nodes
  };
  std::array<QPoint, 2> pts;

  FacetQuad(const Mesh& mesh, const BoundaryFacet& f);
};

inline const QuadRule& QuadRule::gauss3() {
  static const QuadRule rule = make(3);
  return rule;
}

inline QuadRule QuadRule::make(int order) {
  std::vector<double> gp, gw;
  if (order <= 1) {
    gp = {0.0};
    gw = {2.0};
  } else if (order == 2) {
    const double g = 1.0 / std::sqrt(3.0);
    gp = {-g, g};
    gw = {1.0, 1.0};
  } else if (order == 3) {
    const double g = std::sqrt(3.0 / 5.0);
    gp = {-g, 0.0, g};
    gw = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  } else {
    // 4-point rule covers everything used here.
    const double a = std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
    const double b = std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
    const double wa = (18.0 + std::sqrt(30.0)) / 36.0;
    const double wb = (18.0 - std::sqrt(30.0)) / 36.0;
    gp = {-b, -a, a, b};
    gw = {wb, wa, wa, wb};
  }
  QuadRule rule;
  for (size_t j = 0; j < gp.size(); ++j)
    for (size_t i = 0; i < gp.size(); ++i) {
      QuadRule::Point p;
      p.xi = gp[i];
      p.eta = gp[j];
      p.w = gw[i] * gw[j];
      const double xi = p.xi, eta = p.eta;
      p.N = {0.25 * (1 - xi) * (1 - eta), 0.25 * (1 + xi) * (1 - eta),
             0.25 * (1 + xi) * (1 + eta), 0.25 * (1 - xi) * (1 + eta)};
      p.dN = {{{-0.25 * (1 - eta), -0.25 * (1 - xi)},
               {0.25 * (1 - eta), -0.25 * (1 + xi)},
               {0.25 * (1 + eta), 0.25 * (1 + xi)},
               {-0.25 * (1 + eta), 0.25 * (1 - xi)}}};
      rule.points.push_back(p);
    }
  return rule;
}

inline ElementQuad::ElementQuad(const Mesh& mesh, int elem, const QuadRule& rule) {
  const auto& el = mesh.elements[elem];
  pts.reserve(rule.points.size());
  for (const auto& rp : rule.points) {
    QPoint q;
    Eigen::Matrix2d J = Eigen::Matrix2d::Zero();
    q.x.setZero();
    for (int a = 0; a < 4; ++a) {
      const Vec2& p = mesh.nodes[el[a]];
      q.x += rp.N[a] * p;
      J(0, 0) += rp.dN[a][0] * p.x();
      J(0, 1) += rp.dN[a][1] * p.x();
      J(1, 0) += rp.dN[a][0] * p.y();
      J(1, 1) += rp.dN[a][1] * p.y();
    }
    const double det = J.determinant();
    const Eigen::Matrix2d Jinv = J.inverse();
    for (int a = 0; a < 4; ++a) {
      q.grad[a][0] = Jinv(0, 0) * rp.dN[a][0] + Jinv(1, 0) * rp.dN[a][1];
      q.grad[a][1] = Jinv(0, 1) * rp.dN[a][0] + Jinv(1, 1) * rp.dN[a][1];
    }
    q.N = rp.N;
    q.w = rp.w * det;
    pts.push_back(q);
  }
}

inline QuadCache::QuadCache(const Mesh& mesh, const QuadRule& rule)
    : mesh_(&mesh), rule_(rule), ref_(mesh, 0, rule) {
  uniform_ = mesh.dx > 0 && mesh.dy > 0 && mesh.num_elements() > 0;
  if (uniform_) {
    // Every element must be the dx x dy rectangle anchored at its first node.
    for (const auto& el : mesh.elements) {
      const Vec2& p0 = mesh.nodes[el[0]];
      const Vec2 d1 = mesh.nodes[el[1]] - p0;
      const Vec2 d2 = mesh.nodes[el[2]] - p0;
      const Vec2 d3 = mesh.nodes[el[3]] - p0;
      if (std::abs(d1.x() - mesh.dx) > 1e-14 || std::abs(d1.y()) > 1e-14 ||
          std::abs(d2.x() - mesh.dx) > 1e-14 || std::abs(d2.y() - mesh.dy) > 1e-14 ||
          std::abs(d3.x()) > 1e-14 || std::abs(d3.y() - mesh.dy) > 1e-14) {
        uniform_ = false;
        break;
      }
    }
  }
  if (uniform_) {
    const Vec2 base = mesh.nodes[mesh.elements[0][0]];
    offsets_.reserve(ref_.pts.size());
    for (const auto& q : ref_.pts) offsets_.push_back(q.x - base);
  }
}

inline FacetQuad::FacetQuad(const Mesh& mesh, const BoundaryFacet& f) {
  const Vec2& a = mesh.nodes[f.a];
  const Vec2& b = mesh.nodes[f.b];
  const double len = (b - a).norm();
  const double g = 1.0 / std::sqrt(3.0);
  for (int k = 0; k < 2; ++k) {
    const double s = 0.5 * (1.0 + (k == 0 ? -g : g));  // in [0,1]
    pts[k].x = a + s * (b - a);
    pts[k].w = 0.5 * len;
    pts[k].Na = 1.0 - s;
    pts[k].Nb = s;
  }
}

}  // namespace homog2d
