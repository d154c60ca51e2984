#include "homog2d/fields.hpp"

#include <cmath>

#include "homog2d/assembly.hpp"
#include "homog2d/quadrature.hpp"

namespace homog2d {

SolutionField::SolutionField(const Mesh& m, int components)
    : mesh(&m), n(components), values(Eigen::VectorXd::Zero(components * m.num_nodes())),
      constrained(static_cast<size_t>(components) * m.num_nodes(), 0) {}

void SolutionField::apply_constraints() {
  for (int d = 0; d < dofs(); ++d)
    if (constrained[d]) values[d] = 0.0;
}

void SolutionField::check_finite() const {
  if (!values.allFinite()) throw NumericError("solution field has non-finite entries");
}

double SolutionField::eval(int comp, const Vec2& x) const {
  Vec2 ref;
  const int e = mesh->locate(x, ref);
  const auto& el = mesh->elements[e];
  const double xi = ref.x(), eta = ref.y();
  const double N[4] = {0.25 * (1 - xi) * (1 - eta), 0.25 * (1 + xi) * (1 - eta),
                       0.25 * (1 + xi) * (1 + eta), 0.25 * (1 - xi) * (1 + eta)};
  double s = 0;
  for (int a = 0; a < 4; ++a) s += N[a] * at(comp, el[a]);
  return s;
}

Vec2 SolutionField::eval_grad(int comp, const Vec2& x) const {
  Vec2 ref;
  const int e = mesh->locate(x, ref);
  const auto& el = mesh->elements[e];
  const double xi = ref.x(), eta = ref.y();
  const double dN[4][2] = {{-0.25 * (1 - eta), -0.25 * (1 - xi)},
                           {0.25 * (1 - eta), -0.25 * (1 + xi)},
                           {0.25 * (1 + eta), 0.25 * (1 + xi)},
                           {-0.25 * (1 + eta), 0.25 * (1 - xi)}};
  Eigen::Matrix2d J = Eigen::Matrix2d::Zero();
  for (int a = 0; a < 4; ++a) {
    const Vec2& p = mesh->nodes[el[a]];
    J(0, 0) += dN[a][0] * p.x();
    J(0, 1) += dN[a][1] * p.x();
    J(1, 0) += dN[a][0] * p.y();
    J(1, 1) += dN[a][1] * p.y();
  }
  const Eigen::Matrix2d Jinv = J.inverse();
  Vec2 g{0, 0};
  for (int a = 0; a < 4; ++a) {
    const double gx = Jinv(0, 0) * dN[a][0] + Jinv(1, 0) * dN[a][1];
    const double gy = Jinv(0, 1) * dN[a][0] + Jinv(1, 1) * dN[a][1];
    g.x() += gx * at(comp, el[a]);
    g.y() += gy * at(comp, el[a]);
  }
  return g;
}

void constrain_dirichlet_boundary(SolutionField& u) {
  const auto mask = u.mesh->dirichlet_node_mask();
  for (int al = 0; al < u.n; ++al)
    for (int i = 0; i < u.mesh->num_nodes(); ++i)
      if (mask[i]) u.constrained[u.dof(al, i)] = 1;
  u.apply_constraints();
}

double sup_norm(const SolutionField& u) {
  u.check_finite();
  return u.values.size() ? u.values.cwiseAbs().maxCoeff() : 0.0;
}

double w1p_norm(const SolutionField& u, double p) {
  u.check_finite();
  if (!(p >= 2.0) || !std::isfinite(p)) throw NumericError("w1p_norm: p must be finite, >= 2");
  double acc = 0;
  const QuadCache qc(*u.mesh);
  for (int e = 0; e < u.mesh->num_elements(); ++e) {
    const auto& el = u.mesh->elements[e];
    qc.for_each(e, [&](int, const ElementQuad::QPoint& q) {
      for (int al = 0; al < u.n; ++al) {
        double v = 0, gx = 0, gy = 0;
        for (int a = 0; a < 4; ++a) {
          const double c = u.at(al, el[a]);
          v += q.N[a] * c;
          gx += q.grad[a][0] * c;
          gy += q.grad[a][1] * c;
        }
        acc += (std::pow(std::abs(v), p) + std::pow(std::abs(gx), p) +
                std::pow(std::abs(gy), p)) *
               q.w;
      }
    });
  }
  return std::pow(acc, 1.0 / p);
}

NormWorkspace::NormWorkspace(const Mesh& mesh, int n, const std::vector<char>& constrained)
    : constrained_(constrained) {
  K_ = assemble_h1(mesh, n);
  pin_constrained(K_, constrained_);
  factor_ = std::make_unique<FactorizedOperator>(K_);
}

double NormWorkspace::dual_h1(const Eigen::VectorXd& f) const {
  if (!f.allFinite()) throw NumericError("dual_h1: non-finite input");
  for (int d = 0; d < f.size(); ++d)
    if (constrained_[d] && f[d] != 0.0)
      throw NumericError("dual_h1: input not supported on unconstrained DOFs");
  const Eigen::VectorXd w = factor_->solve(f);
  const double v = f.dot(w);
  return std::sqrt(std::max(0.0, v));
}

double norm(const SolutionField& u, NormKind kind) {
  switch (kind.kind) {
    case NormKind::SupNorm:
      return sup_norm(u);
    case NormKind::W1p:
      return w1p_norm(u, kind.p);
    case NormKind::DualH1:
      return dual_norm(u.values, u);
  }
  return 0.0;
}

double dual_norm(const Eigen::VectorXd& f, const SolutionField& layout) {
  NormWorkspace ws(*layout.mesh, layout.n, layout.constrained);
  return ws.dual_h1(f);
}

}  // namespace homog2d
