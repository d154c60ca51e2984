#pragma once

#include <memory>

#include "homog2d/assembly.hpp"
#include "homog2d/fields.hpp"
#include "homog2d/problem.hpp"

namespace homog2d {

struct DegeneracyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Discrete operators of one problem on one mesh: the diffusion matrix, the
/// constraint mask and the dual-norm workspace are assembled once and shared
/// by residual evaluations, Newton iterations and diagnostics.
class ProblemWorkspace {
 public:
  ProblemWorkspace(const ProblemSpec& spec, const Mesh& mesh);

  const ProblemSpec& spec() const { return *spec_; }
  const Mesh& mesh() const { return *mesh_; }
  const std::vector<char>& constrained() const { return constrained_; }
  const NormWorkspace& norms() const { return *norms_; }

  SolutionField make_field() const;

  /// Discrete F(u) = A u + B(u), zeroed on constrained DOFs.
  Eigen::VectorXd residual(const SolutionField& u) const;
  /// Discrete F'(u) with constraints pinned.
  SparseOperator linearization(const SolutionField& u) const;
  /// The linear part A alone (with the unit mass term when Robin covers the
  /// whole boundary), constraints pinned.
  SparseOperator linear_part_pinned() const;

  double dual_residual_norm(const SolutionField& u) const;

 private:
  const ProblemSpec* spec_;
  const Mesh* mesh_;
  SparseOperator diffusion_raw_;   // no constraints
  SparseOperator mass_raw_;        // only when Robin everywhere
  bool robin_everywhere_ = false;
  std::vector<char> constrained_;
  std::unique_ptr<NormWorkspace> norms_;
};

enum class NewtonMode { FullNewton, FrozenAtInitial };

struct NewtonReport {
  int iterations = 0;
  std::vector<double> residual_norms;  // dual norms, including the initial one
  bool converged = false;
  double final_update_w12 = 0;
  bool frozen_jacobian = false;
};

/// Newton iteration for F(u) = 0, convergence declared on the dual residual
/// norm. Frozen mode factors the Jacobian once at u_init (the contraction
/// map); full mode refreshes it each step. Non-convergence is reported, not
/// thrown; a singular Jacobian throws DegeneracyError.
std::pair<SolutionField, NewtonReport> newton_solve(const ProblemWorkspace& ws,
                                                    const SolutionField& u_init,
                                                    NewtonMode mode, double tol,
                                                    int max_iter);

/// Smallest singular value of the preconditioned linearized operator
/// K^{-1/2} (A + B'(u0)) K^{-1/2} on the free DOFs, by inverse iteration on
/// the normal-equations pencil. Positive = non-degenerate at this resolution.
double check_nondegeneracy(const ProblemWorkspace& ws, const SolutionField& u0,
                           int max_iter = 200, double tol = 1e-8);

struct ProbeTrial {
  bool converged = false;
  double deviation = 0;  // sup distance of the limit from u_ref
};

struct ProbeReport {
  std::vector<ProbeTrial> trials;
  bool all_converged = false;
  bool all_agree = false;  // deviations within agreement tolerance
  double max_deviation = 0;
  double agreement_tol = 1e-8;
};

/// Newton restarts from random sup-norm <= radius perturbations of u_ref
/// (componentwise uniform noise, one smoothing pass); reports whether every
/// converged limit coincides with u_ref.
ProbeReport local_uniqueness_probe(const ProblemWorkspace& ws, const SolutionField& u_ref,
                                   double radius, int trials, unsigned seed,
                                   double newton_tol = 1e-10, int max_iter = 25);

}  // namespace homog2d
