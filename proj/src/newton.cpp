#include "homog2d/newton.hpp"

#include <cmath>

#include "homog2d/rng.hpp"

namespace homog2d {

TensorSampler ProblemSpec::diffusion() const {
  if (oscillatory()) {
    if (!field) throw GeometryError("oscillatory problem without coefficient field");
    return field->oscillatory(epsilon);
  }
  if (tensor) return tensor->sampler();
  if (field) return field->oscillatory(0.0);
  throw GeometryError("problem has no diffusion coefficients");
}

bool ProblemSpec::diffusion_symmetric() const {
  if (oscillatory() || !tensor) return field && field->symmetric;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int al = 0; al < n; ++al)
        for (int be = 0; be < n; ++be)
          if ((*tensor)(i, j, al, be) != (*tensor)(j, i, be, al)) return false;
  return true;
}

ProblemSpec ProblemSpec::oscillatory_problem(DomainSpec dom, PeriodicCoefficientField f,
                                             double eps, NonlinearityModel m) {
  ProblemSpec s;
  s.domain = std::move(dom);
  s.n = f.n;
  s.field = std::move(f);
  s.epsilon = eps;
  s.model = std::move(m);
  s.validate();
  return s;
}

ProblemSpec ProblemSpec::homogenized_problem(DomainSpec dom, HomogenizedTensor t,
                                             NonlinearityModel m) {
  ProblemSpec s;
  s.domain = std::move(dom);
  s.n = t.n;
  s.tensor = std::move(t);
  s.model = std::move(m);
  s.validate();
  return s;
}

void ProblemSpec::validate() const {
  domain.validate();
  if (model.n != n) throw GeometryError("nonlinearity component count mismatch");
  if (field && field->n != n) throw GeometryError("coefficient component count mismatch");
  if (epsilon < 0) throw GeometryError("epsilon must be nonnegative");
  if (oscillatory() && !field)
    throw GeometryError("epsilon > 0 requires a periodic coefficient field");
  if (domain.robin_everywhere() && field && !field->legendre)
    throw CoercivityError(
        "Robin conditions on the whole boundary require the Legendre condition");
}

ProblemWorkspace::ProblemWorkspace(const ProblemSpec& spec, const Mesh& mesh)
    : spec_(&spec), mesh_(&mesh) {
  spec.validate();
  robin_everywhere_ = spec.domain.robin_everywhere();
  diffusion_raw_ =
      assemble_diffusion(mesh, spec.diffusion(), spec.n, spec.diffusion_symmetric());
  if (robin_everywhere_) mass_raw_ = assemble_mass(mesh, spec.n);

  SolutionField proto(mesh, spec.n);
  constrain_dirichlet_boundary(proto);
  constrained_ = proto.constrained;
  norms_ = std::make_unique<NormWorkspace>(mesh, spec.n, constrained_);
}

SolutionField ProblemWorkspace::make_field() const {
  SolutionField u(*mesh_, spec_->n);
  u.constrained = constrained_;
  return u;
}

Eigen::VectorXd ProblemWorkspace::residual(const SolutionField& u) const {
  u.check_finite();
  Eigen::VectorXd r = diffusion_raw_.mat * u.values;
  r += assemble_semilinear(u, spec_->model, *mesh_);
  zero_constrained(r, constrained_);
  return r;
}

SparseOperator ProblemWorkspace::linearization(const SolutionField& u) const {
  SparseOperator J = assemble_linearization(u, spec_->model, *mesh_);
  J.mat += diffusion_raw_.mat;
  J.symmetric = false;
  // The linearization is symmetric for reaction-only models with symmetric
  // reaction Jacobian and symmetric diffusion; detect the common scalar case.
  if (diffusion_raw_.symmetric && !spec_->model.has_drift() && !spec_->model.has_robin() &&
      spec_->n == 1)
    J.symmetric = true;
  pin_constrained(J, constrained_);
  return J;
}

SparseOperator ProblemWorkspace::linear_part_pinned() const {
  SparseOperator A = diffusion_raw_;
  if (robin_everywhere_) A.mat += mass_raw_.mat;
  A.symmetric = diffusion_raw_.symmetric;
  pin_constrained(A, constrained_);
  return A;
}

double ProblemWorkspace::dual_residual_norm(const SolutionField& u) const {
  return norms_->dual_h1(residual(u));
}

std::pair<SolutionField, NewtonReport> newton_solve(const ProblemWorkspace& ws,
                                                    const SolutionField& u_init,
                                                    NewtonMode mode, double tol,
                                                    int max_iter) {
  SolutionField u = u_init;
  u.constrained = ws.constrained();
  u.apply_constraints();

  NewtonReport report;
  report.frozen_jacobian = (mode == NewtonMode::FrozenAtInitial);

  std::unique_ptr<FactorizedOperator> frozen;
  if (mode == NewtonMode::FrozenAtInitial) {
    try {
      frozen = std::make_unique<FactorizedOperator>(ws.linearization(u));
    } catch (const NumericError& err) {
      throw DegeneracyError(std::string("Jacobian factorization failed: ") + err.what());
    }
  }

  Eigen::VectorXd r = ws.residual(u);
  double rn = ws.norms().dual_h1(r);
  report.residual_norms.push_back(rn);

  for (int it = 0; it < max_iter; ++it) {
    if (rn <= tol) {
      report.converged = true;
      break;
    }
    Eigen::VectorXd du;
    try {
      if (frozen) {
        du = frozen->solve(r);
      } else {
        FactorizedOperator J(ws.linearization(u));
        du = J.solve(r);
      }
    } catch (const NumericError& err) {
      throw DegeneracyError(std::string("Jacobian solve failed: ") + err.what());
    }
    if (!du.allFinite()) throw DegeneracyError("Newton update is not finite");
    u.values -= du;
    u.apply_constraints();
    ++report.iterations;

    r = ws.residual(u);
    rn = ws.norms().dual_h1(r);
    report.residual_norms.push_back(rn);

    SolutionField step = ws.make_field();
    step.values = du;
    report.final_update_w12 = w1p_norm(step, 2.0);
  }
  if (!report.converged && rn <= tol) report.converged = true;
  return {std::move(u), std::move(report)};
}

double check_nondegeneracy(const ProblemWorkspace& ws, const SolutionField& u0,
                           int max_iter, double tol) {
  // Reduce everything to the free DOFs.
  const auto& mask = ws.constrained();
  const int full = static_cast<int>(mask.size());
  std::vector<int> free_of_full(full, -1);
  int nfree = 0;
  for (int d = 0; d < full; ++d)
    if (!mask[d]) free_of_full[d] = nfree++;
  auto restrict_matrix = [&](const Eigen::SparseMatrix<double>& A) {
    std::vector<Eigen::Triplet<double>> trips;
    for (int k = 0; k < A.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it)
        if (free_of_full[it.row()] >= 0 && free_of_full[it.col()] >= 0)
          trips.emplace_back(free_of_full[it.row()], free_of_full[it.col()], it.value());
    Eigen::SparseMatrix<double> R(nfree, nfree);
    R.setFromTriplets(trips.begin(), trips.end());
    R.makeCompressed();
    return R;
  };

  SparseOperator Jp = ws.linearization(u0);
  SparseOperator Kp = ws.norms().h1_matrix();
  SparseOperator J(restrict_matrix(Jp.mat), Jp.symmetric);
  SparseOperator K(restrict_matrix(Kp.mat), true);

  FactorizedOperator Jf(J), Kf(K);
  Pcg32 rng(20240u);
  Eigen::VectorXd x(nfree);
  for (int i = 0; i < nfree; ++i) x[i] = rng.uniform(-1.0, 1.0);
  x /= std::sqrt(x.dot(K.mat * x));

  double sigma = 0, sigma_prev = -1;
  for (int it = 0; it < max_iter; ++it) {
    // Inverse iteration on J^T K^{-1} J x = sigma^2 K x.
    Eigen::VectorXd t = K.mat * x;
    Eigen::VectorXd w = Jf.solve_transposed(t);
    Eigen::VectorXd z = Jf.solve(K.mat * w);
    const double zn = std::sqrt(std::max(z.dot(K.mat * z), 0.0));
    if (!(zn > 0)) throw DegeneracyError("nondegeneracy iteration broke down");
    x = z / zn;
    const Eigen::VectorXd Jx = J.mat * x;
    sigma = std::sqrt(std::max(Jx.dot(Kf.solve(Jx)), 0.0));
    if (it > 2 && std::abs(sigma - sigma_prev) <= tol * std::max(sigma, 1e-300)) break;
    sigma_prev = sigma;
  }
  return sigma;
}

ProbeReport local_uniqueness_probe(const ProblemWorkspace& ws, const SolutionField& u_ref,
                                   double radius, int trials, unsigned seed,
                                   double newton_tol, int max_iter) {
  ProbeReport report;
  report.trials.reserve(trials);
  report.all_converged = true;
  report.all_agree = true;

  const SparseOperator M = assemble_mass(ws.mesh(), ws.spec().n);
  Eigen::VectorXd lumped = M.mat * Eigen::VectorXd::Ones(M.dim());

  Pcg32 rng(seed);
  for (int t = 0; t < trials; ++t) {
    SolutionField u = u_ref;
    u.constrained = ws.constrained();
    if (radius > 0) {
      Eigen::VectorXd noise(u.values.size());
      for (int i = 0; i < noise.size(); ++i) noise[i] = rng.uniform(-radius, radius);
      // One smoothing pass keeps the perturbation mesh-resolution-robust.
      noise = (M.mat * noise).cwiseQuotient(lumped);
      zero_constrained(noise, ws.constrained());
      const double mx = noise.cwiseAbs().maxCoeff();
      if (mx > 0) noise *= radius / mx;
      u.values += noise;
      u.apply_constraints();
    }
    ProbeTrial trial;
    try {
      auto [sol, rep] = newton_solve(ws, u, NewtonMode::FullNewton, newton_tol, max_iter);
      trial.converged = rep.converged;
      if (rep.converged)
        trial.deviation = (sol.values - u_ref.values).cwiseAbs().maxCoeff();
    } catch (const DegeneracyError&) {
      trial.converged = false;
    }
    if (!trial.converged)
      report.all_converged = false;
    else {
      report.max_deviation = std::max(report.max_deviation, trial.deviation);
      if (trial.deviation > report.agreement_tol) report.all_agree = false;
    }
    report.trials.push_back(trial);
  }
  if (!report.all_converged) report.all_agree = false;
  return report;
}

}  // namespace homog2d
