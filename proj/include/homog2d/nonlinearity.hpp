#pragma once

#include <functional>
#include <string>

#include <Eigen/Dense>

#include "homog2d/geometry.hpp"

namespace homog2d {

/// Lower-order terms of the system: drift b_i^a(x,u), reaction b^a(x,u) and
/// the natural-boundary density b_0^a(x,u), with their u-derivatives.
/// Callbacks fill caller-provided buffers; a missing callback means the term
/// is identically zero. Buffer layouts:
///   reaction     out[a]
///   reaction_du  out[a*n + g]          (d b^a / d u^g)
///   drift        out[i*n + a]
///   drift_du     out[(i*n + a)*n + g]
///   robin        out[a]
///   robin_du     out[a*n + g]
struct NonlinearityModel {
  using Callback = std::function<void(const Vec2&, const double*, double*)>;

  int n = 1;
  std::string name = "zero";
  Callback reaction, reaction_du;
  Callback drift, drift_du;
  Callback robin, robin_du;
  bool affine = false;  // u-derivatives constant; Newton converges in one step

  bool has_reaction() const { return static_cast<bool>(reaction); }
  bool has_drift() const { return static_cast<bool>(drift); }
  bool has_robin() const { return static_cast<bool>(robin); }
};

namespace models {

NonlinearityModel zero(int n = 1);

/// b(x,u) = c * u (componentwise).
NonlinearityModel linear_mass(double c, int n = 1);

/// Scalar cubic reaction b(x,u) = u^3 - f(x) with f manufactured so that
/// u0(x) = amplitude * sin(pi x1) sin(pi x2) solves the constant-coefficient
/// problem div(ahat grad u0) = b(x, u0) on the unit square.
NonlinearityModel cubic_manufactured(const Eigen::Matrix2d& ahat, double amplitude = 1.0);

/// b(x,u) = (1 + x1) sin(u); exercises non-polynomial reaction derivatives.
NonlinearityModel sine_reaction();

/// b(x,u) = cos(pi x1) (e^u - 1), bounded coefficient times smooth growth.
NonlinearityModel exp_reaction();

/// Drift b_1 = 0.3 x2 sin(u), b_2 = 0.2 x1 u plus cubic reaction; exercises
/// the drift block of the linearization.
NonlinearityModel drift_mix();

/// Two-component coupled cubic system; exercises cross derivatives.
NonlinearityModel coupled_cubic();

/// Adds the boundary density b_0(x,u) = 1 - u to an existing model.
NonlinearityModel with_robin_one_minus_u(NonlinearityModel base);

/// Catalog for tests and config lookup.
std::vector<std::string> builtin_names();
NonlinearityModel by_name(const std::string& name, const Eigen::Matrix2d& ahat,
                          double amplitude);

}  // namespace models

/// Max relative mismatch between derivative callbacks and central finite
/// differences of the value callbacks at (x,u); step 1e-6.
double derivative_check(const NonlinearityModel& model, const Vec2& x,
                        const Eigen::VectorXd& u);

}  // namespace homog2d
