#pragma once

#include <memory>
#include <optional>

#include "homog2d/geometry.hpp"
#include "homog2d/sparse.hpp"

namespace homog2d {

/// Norms used throughout: nodal sup norm, the W^{1,p} norm evaluated by
/// quadrature, and the discrete dual norm sqrt(f^T K^{-1} f) with K the
/// H^1 inner-product matrix on the constrained space.
struct NormKind {
  enum Kind { SupNorm, W1p, DualH1 } kind = SupNorm;
  double p = 2.0;

  static NormKind sup() { return {SupNorm, 0.0}; }
  static NormKind w1p(double p) { return {W1p, p}; }
  static NormKind dual() { return {DualH1, 2.0}; }
};

/// Nodal vector function with n components, component-major layout
/// (component block alpha occupies [alpha*N, (alpha+1)*N)). Entries flagged
/// in constrained are homogeneous Dirichlet values, kept exactly 0.
struct SolutionField {
  const Mesh* mesh = nullptr;
  int n = 1;
  Eigen::VectorXd values;
  std::vector<char> constrained;  // size n * num_nodes

  SolutionField() = default;
  SolutionField(const Mesh& m, int components);

  int dofs() const { return static_cast<int>(values.size()); }
  int dof(int comp, int node) const { return comp * mesh->num_nodes() + node; }
  double& at(int comp, int node) { return values[dof(comp, node)]; }
  double at(int comp, int node) const { return values[dof(comp, node)]; }

  void apply_constraints();           // zero constrained entries
  void check_finite() const;          // throws NumericError on NaN/Inf

  /// Component value at an arbitrary point (bilinear interpolation).
  double eval(int comp, const Vec2& x) const;
  /// FE gradient at an arbitrary point (discontinuous across element edges).
  Vec2 eval_grad(int comp, const Vec2& x) const;
};

/// Marks every component of the Dirichlet boundary nodes as constrained.
void constrain_dirichlet_boundary(SolutionField& u);

double sup_norm(const SolutionField& u);
double w1p_norm(const SolutionField& u, double p);

/// Caches the H^1 matrix factorization per (mesh, n, constraint) tuple so
/// dual norms inside iteration loops reuse the factor.
class NormWorkspace {
 public:
  NormWorkspace(const Mesh& mesh, int n, const std::vector<char>& constrained);

  /// sqrt(f^T K^{-1} f); f must vanish on constrained entries.
  double dual_h1(const Eigen::VectorXd& f) const;
  const SparseOperator& h1_matrix() const { return K_; }
  const FactorizedOperator& h1_factor() const { return *factor_; }

 private:
  SparseOperator K_;
  std::unique_ptr<FactorizedOperator> factor_;
  std::vector<char> constrained_;
};

double norm(const SolutionField& u, NormKind kind);
/// Dual norm of a residual-type vector laid out like the field `layout`.
double dual_norm(const Eigen::VectorXd& f, const SolutionField& layout);

}  // namespace homog2d
