#pragma once

#include <functional>

#include "homog2d/fields.hpp"
#include "homog2d/geometry.hpp"
#include "homog2d/nonlinearity.hpp"
#include "homog2d/quadrature.hpp"
#include "homog2d/sparse.hpp"

namespace homog2d {

struct AssemblyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Coefficient sampler in physical coordinates. Fills a buffer of 4*n*n
/// values, layout a[((i*2+j)*n + alpha)*n + beta] for the tensor a_ij^{ab}.
using TensorSampler = std::function<void(const Vec2&, double*)>;

inline int tensor_index(int n, int i, int j, int alpha, int beta) {
  return ((i * 2 + j) * n + alpha) * n + beta;
}

/// Optional node -> DOF relabeling (periodic identification). Identity when
/// map is null.
struct DofLayout {
  const std::vector<int>* node_to_dof = nullptr;
  int dofs_per_component = 0;

  int dof(int node) const { return node_to_dof ? (*node_to_dof)[node] : node; }
};

inline DofLayout identity_layout(const Mesh& mesh) {
  return DofLayout{nullptr, mesh.num_nodes()};
}
inline DofLayout periodic_layout(const PeriodicMesh& pm) {
  return DofLayout{&pm.dof_map, pm.num_dofs};
}

/// Galerkin matrix of the form  a_ij^{ab}(x) d_j u^b d_i phi^a  (no boundary
/// conditions applied). Row = (test node, alpha), column = (trial node, beta),
/// component-major like SolutionField.
SparseOperator assemble_diffusion(const Mesh& mesh, const TensorSampler& coeff, int n,
                                  const DofLayout& layout, bool symmetric_hint = false,
                                  const QuadRule& rule = QuadRule::gauss3());

SparseOperator assemble_diffusion(const Mesh& mesh, const TensorSampler& coeff, int n,
                                  bool symmetric_hint = false);

/// Mass matrix, identity coupling between components.
SparseOperator assemble_mass(const Mesh& mesh, int n, const DofLayout& layout,
                             const QuadRule& rule = QuadRule::gauss3());
SparseOperator assemble_mass(const Mesh& mesh, int n);

/// Stiffness (identity tensor) + mass: the discrete H^1 inner product.
SparseOperator assemble_h1(const Mesh& mesh, int n);

/// Discrete B(u): b_i^a(x,u) d_i phi^a + b^a(x,u) phi^a over the domain,
/// minus the boundary term b_0^a(x,u) phi^a on Robin facets. No constraint
/// handling; caller zeroes constrained entries.
Eigen::VectorXd assemble_semilinear(const SolutionField& u, const NonlinearityModel& model,
                                    const Mesh& mesh,
                                    const QuadRule& rule = QuadRule::gauss3());

/// Discrete B'(u) including the Robin block.
SparseOperator assemble_linearization(const SolutionField& u, const NonlinearityModel& model,
                                      const Mesh& mesh,
                                      const QuadRule& rule = QuadRule::gauss3());

/// Row/column elimination with identity pinning for constrained DOFs.
void pin_constrained(SparseOperator& A, const std::vector<char>& constrained);
void zero_constrained(Eigen::VectorXd& v, const std::vector<char>& constrained);

/// Load vector  integral f(x) phi_a(x) dx  for a scalar sampler (per component
/// the same sampler is not meaningful, so n = 1 layout).
Eigen::VectorXd assemble_scalar_load(const Mesh& mesh,
                                     const std::function<double(const Vec2&)>& f,
                                     const DofLayout& layout,
                                     const QuadRule& rule = QuadRule::gauss3());

}  // namespace homog2d
