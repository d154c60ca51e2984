#pragma once

#include <functional>
#include <string>

#include "homog2d/assembly.hpp"
#include "homog2d/geometry.hpp"

namespace homog2d {

struct CoercivityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Z^2-periodic coefficient tensor a_ij^{ab}(y), sampled on the unit cell.
/// The sampler receives y already folded into [0,1)^2 and fills the same
/// buffer layout as TensorSampler.
struct PeriodicCoefficientField {
  int n = 1;
  std::string descriptor;  // cache key; uniquely identifies the field
  std::function<void(const Vec2&, double*)> sampler;
  double inf_bound = 0, sup_bound = 0;  // essential bounds of the entries
  bool symmetric = true;
  bool legendre = false;  // built-ins satisfy the pointwise Legendre condition

  void sample(const Vec2& y, double* a) const { sampler(detail::fold_unit(y), a); }

  /// x-space sampler a(x/eps); eps = 0 yields a(x) (cell coordinates).
  TensorSampler oscillatory(double eps) const;
};

namespace fields {

/// Constant scalar-diagonal tensor a * I.
PeriodicCoefficientField constant_scalar(double a);
/// Constant full tensor (n components).
PeriodicCoefficientField constant_tensor(int n, const std::vector<double>& a);
/// Laminate in y1: value a1 on [0,1/2), a2 on [1/2,1), times identity.
PeriodicCoefficientField laminate(double a1, double a2);
/// Four-quadrant checkerboard: a1 where (y1<1/2)==(y2<1/2), else a2.
PeriodicCoefficientField checkerboard(double a1, double a2);
/// c0 + c1 sin(2 pi y1) sin(2 pi y2), requires c0 > |c1|.
PeriodicCoefficientField trigonometric(double c0, double c1);
/// Piecewise-constant per cell of a k x k grid; values[cell] scales identity.
PeriodicCoefficientField tabulated(int k, const std::vector<double>& values);
/// Constant 2-component system with cross diffusion, Legendre-positive.
PeriodicCoefficientField coupled_system();

std::vector<std::string> builtin_names();
PeriodicCoefficientField by_name(const std::string& name, double p1, double p2);

}  // namespace fields

/// Smallest eigenvalue of the symmetrized Legendre form a_ij^{ab} xi_i^a xi_j^b
/// sampled on a grid x grid lattice of cell points. Positive = Legendre holds
/// on the sample.
double legendre_minimum(const PeriodicCoefficientField& field, int grid = 64);

/// Smallest eigenvalue of the symmetrized Legendre form of a constant tensor
/// (buffer in TensorSampler layout).
double legendre_minimum_constant(const std::vector<double>& tensor, int n);

}  // namespace homog2d
