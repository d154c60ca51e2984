#pragma once

#include <optional>

#include "homog2d/cell.hpp"
#include "homog2d/coefficients.hpp"
#include "homog2d/geometry.hpp"
#include "homog2d/nonlinearity.hpp"

namespace homog2d {

/// One boundary value problem: domain + diffusion side + lower-order terms.
/// epsilon > 0 selects the oscillatory tensor a(x/eps); epsilon = 0 uses the
/// given constant tensor (the homogenized limit problem).
struct ProblemSpec {
  DomainSpec domain;
  int n = 1;
  std::optional<PeriodicCoefficientField> field;  // oscillatory side
  double epsilon = 0;
  std::optional<HomogenizedTensor> tensor;  // homogenized side
  NonlinearityModel model;

  bool oscillatory() const { return epsilon > 0; }
  TensorSampler diffusion() const;
  bool diffusion_symmetric() const;

  static ProblemSpec oscillatory_problem(DomainSpec dom, PeriodicCoefficientField f,
                                         double eps, NonlinearityModel m);
  static ProblemSpec homogenized_problem(DomainSpec dom, HomogenizedTensor t,
                                         NonlinearityModel m);

  /// eps > 0 when oscillatory; Robin-everywhere requires the Legendre flag.
  void validate() const;
};

}  // namespace homog2d
