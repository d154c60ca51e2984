#pragma once

#include "homog2d/cell.hpp"
#include "homog2d/fields.hpp"
#include "homog2d/mollifier.hpp"
#include "homog2d/newton.hpp"

namespace homog2d {

enum class ExpansionVariant { Smoothed, Direct };

/// First-order two-scale approximation recipe: variant, oscillation scale and
/// the smoothing-radius rule used by the smoothed variant.
struct ExpansionRecipe {
  ExpansionVariant variant = ExpansionVariant::Smoothed;
  double epsilon = 0;

  enum class DeltaRule { Power, InverseLog } delta_rule = DeltaRule::Power;
  double delta_exponent = 0.25;  // delta = eps^r, 0 < r < 1/2

  double delta() const;
  void validate() const;
};

/// Boundary cut-off: 0 on the strip of width eps, 1 outside the 2*eps strip,
/// quintic smoothstep ramp in between; |grad| <= 1.875/eps.
double cutoff(const DomainSpec& spec, double eps, const Vec2& x);

/// Quintic smoothstep on [0,1].
double smoothstep5(double t);

/// Nodal gradient of a field component recovered by second-order differences
/// on the structured node lattice (falls back to the FE gradient elsewhere).
Eigen::VectorXd recovered_gradient(const SolutionField& u, int comp, int dir);

/// u0 + eps * cutoff * (gradient factor) * corrector(x/eps) sampled on the
/// fine mesh. The smoothed variant mollifies the coarse FE gradient; the
/// direct variant uses the recovered nodal gradient.
SolutionField build_expansion(const ExpansionRecipe& recipe, const SolutionField& u0,
                              const CorrectorSet& correctors, const DomainSpec& domain,
                              const Mesh& fine_mesh);

/// Dual-norm size of the oscillatory residual at the approximate solution.
double discrepancy(const ProblemWorkspace& ws, const SolutionField& u_bar);

}  // namespace homog2d
