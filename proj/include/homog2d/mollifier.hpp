#pragma once

#include <functional>

#include "homog2d/geometry.hpp"

namespace homog2d {

/// Scaled smooth bump kernel rho_delta(x) = rho(x/delta)/delta^2 with
/// rho(x) = C exp(-1/(1-|x|^2)) on |x|<1, C fixed once numerically so that
/// the kernel integrates to 1.
struct Mollifier {
  double delta = 0.1;

  explicit Mollifier(double d);

  static double bump_normalization();  // integral of the unnormalized bump
  double rho(const Vec2& z) const;             // rho_delta
  Vec2 rho_grad(const Vec2& z) const;          // grad of rho_delta
  double support_radius() const { return delta; }
};

/// Midpoint integration lattice carrying the integrand at cell centers;
/// centers outside the domain carry value 0 (the convolution integrates over
/// the domain only).
struct SampleLattice {
  Vec2 origin{0, 0};
  double pitch = 0;
  int nx = 0, ny = 0;
  std::vector<double> values;  // size nx*ny, 0 where outside
  std::vector<char> inside;    // center lies in the domain

  static SampleLattice from_sampler(const DomainSpec& domain, double pitch,
                                    const std::function<double(const Vec2&)>& f);
};

/// Discrete convolution with rho_delta over the lattice. Kernel weights are
/// renormalized per evaluation point against the full (virtual) lattice, so
/// quadrature bias vanishes; truncation by the domain boundary is kept, as in
/// the underlying integral over the domain.
class MollifiedField {
 public:
  MollifiedField(SampleLattice lattice, double delta);

  double eval(const Vec2& x) const;
  Vec2 eval_grad(const Vec2& x) const;
  bool under_resolved() const { return under_resolved_; }  // delta <= 2*pitch

 private:
  SampleLattice lattice_;
  Mollifier kernel_;
  bool under_resolved_ = false;
};

}  // namespace homog2d
