#pragma once

#include <memory>

#include "homog2d/coefficients.hpp"
#include "homog2d/geometry.hpp"
#include "homog2d/sparse.hpp"

namespace homog2d {

/// Constant effective tensor with its coercivity certificate (smallest
/// eigenvalue of the symmetrized Legendre form).
struct HomogenizedTensor {
  int n = 1;
  std::vector<double> a;  // TensorSampler layout, 4*n*n entries
  double coercivity_lower_bound = 0;

  double operator()(int i, int j, int alpha, int beta) const {
    return a[tensor_index(n, i, j, alpha, beta)];
  }
  Eigen::Matrix2d matrix2() const;  // n = 1 convenience
  TensorSampler sampler() const;
};

/// Discrete cell-problem solutions v_j^{.b}: 2n mean-zero periodic vector
/// fields with n components each, bilinear on the unit-cell grid.
struct CorrectorSet {
  std::shared_ptr<PeriodicMesh> cell;
  int n = 1;
  /// dof_values[j*n + b] has component-major layout over periodic DOFs.
  std::vector<Eigen::VectorXd> dof_values;
  /// Same data expanded to the (m+1)^2 nodal grid for interpolation.
  std::vector<Eigen::VectorXd> node_values;
  double residual_inf = 0;  // recorded discrete residual after the solves

  /// v_j^{ab}(y) with y folded into the unit cell (bilinear interpolation).
  double value(int j, int beta, int alpha, const Vec2& y) const;
  /// Max |v| over nodes (used to scale expansion sanity checks).
  double sup() const;
  /// Cell mean of component (j, beta, alpha); mean-zero by construction.
  double mean(int j, int beta, int alpha) const;
};

/// Flux (dual) correctors. b lives at the quadrature points of the cell
/// mesh; c is nodal (periodic DOFs); the antisymmetric phi family is stored
/// through one stream function per column index, also at quadrature points,
/// so that phi_ijk = -phi_kji holds exactly as stored and the divergence
/// identity holds against every periodic basis function to solver accuracy.
struct FluxCorrectorSet {
  std::shared_ptr<PeriodicMesh> cell;
  int n = 1;
  int qpe = 9;  // quadrature points per element

  /// b_quad[(i*2+j)*n*n + a*n + b][e*qpe + q]
  std::vector<Eigen::VectorXd> b_quad;
  /// c[(i*2+j)*n*n + a*n + b] over periodic DOFs, mean zero
  std::vector<Eigen::VectorXd> c;
  /// psi_quad[j*n*n + a*n + b][e*qpe + q]; phi(1,j,2) = psi_j, phi(2,j,1) = -psi_j
  std::vector<Eigen::VectorXd> psi_quad;
  /// L2 projection of psi onto the bilinear space (export / inspection)
  std::vector<Eigen::VectorXd> psi_nodes;

  double identity_residual = 0;  // max weak residual of the divergence identity

  int bidx(int i, int j, int alpha, int beta) const {
    return (i * 2 + j) * n * n + alpha * n + beta;
  }
  int pidx(int j, int alpha, int beta) const { return j * n * n + alpha * n + beta; }

  /// phi_ijk^{ab} at quadrature point (e,q); antisymmetric in (i,k) exactly.
  double phi(int i, int j, int k, int alpha, int beta, int e, int q) const {
    if (i == k) return 0.0;
    const double v = psi_quad[pidx(j, alpha, beta)][e * qpe + q];
    return (i == 0 && k == 1) ? v : -v;
  }

  double b_mean(int i, int j, int alpha, int beta) const;
  double c_mean(int i, int j, int alpha, int beta) const;

  /// Max over (j,k,a,b) and all periodic basis functions of the weak
  /// residual of the divergence identity relating phi and b.
  double max_weak_identity_residual() const;
};

/// Solve the 2n periodic cell problems on an m x m cell grid.
/// Throws CoercivityError when the sampled Legendre minimum is not positive.
CorrectorSet solve_cell_problems(const PeriodicCoefficientField& a, int m);

/// Quadrature evaluation of the homogenized tensor from the correctors.
/// Throws CoercivityError when the certificate is not positive.
HomogenizedTensor homogenized_tensor(const PeriodicCoefficientField& a,
                                     const CorrectorSet& correctors);

/// Certificate only (no positivity requirement; negative values are data).
double verify_coercivity(const HomogenizedTensor& ahat);

FluxCorrectorSet flux_correctors(const PeriodicCoefficientField& a,
                                 const CorrectorSet& correctors,
                                 const HomogenizedTensor& ahat);

/// Corrector cache: descriptor + resolution keyed, bit-exact tensor reload.
/// The flux-corrector fields are an optional section of the record.
bool load_corrector_cache(const std::string& path, const std::string& descriptor, int m,
                          CorrectorSet& correctors, HomogenizedTensor& ahat,
                          FluxCorrectorSet* flux = nullptr);
void save_corrector_cache(const std::string& path, const std::string& descriptor,
                          const CorrectorSet& correctors, const HomogenizedTensor& ahat,
                          const FluxCorrectorSet* flux = nullptr);

}  // namespace homog2d
