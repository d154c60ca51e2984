#include <doctest.h>

#include <cmath>

#include "homog2d/assembly.hpp"
#include "homog2d/coefficients.hpp"
#include "homog2d/fields.hpp"
#include "homog2d/nonlinearity.hpp"
#include "homog2d/rng.hpp"

using namespace homog2d;

namespace {

TensorSampler identity_tensor(int n) {
  return [n](const Vec2&, double* a) {
    for (int k = 0; k < 4 * n * n; ++k) a[k] = 0;
    for (int i = 0; i < 2; ++i)
      for (int al = 0; al < n; ++al) a[tensor_index(n, i, i, al, al)] = 1.0;
  };
}

SolutionField random_field(const Mesh& mesh, int n, unsigned seed, double scale = 1.0) {
  SolutionField u(mesh, n);
  Pcg32 rng(seed);
  for (int i = 0; i < u.dofs(); ++i) u.values[i] = rng.uniform(-scale, scale);
  constrain_dirichlet_boundary(u);
  return u;
}

}  // namespace

TEST_CASE("diffusion assembly: Laplace stencil row sums") {
  const Mesh mesh = build_domain_mesh(DomainSpec::unit_square(), 0.5);
  const SparseOperator A = assemble_diffusion(mesh, identity_tensor(1), 1, true);
  // Interior node of the 3x3 grid is node 4; the bilinear Laplacian row sums
  // to zero (constants are in the kernel of the unconstrained operator).
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(A.dim());
  const Eigen::VectorXd r = A.mat * ones;
  CHECK(std::abs(r[4]) < 1e-14);
  CHECK(A.mat.coeff(4, 4) > 0);
}

TEST_CASE("diffusion assembly: constant SPD tensor gives symmetric matrix") {
  const Mesh mesh = build_domain_mesh(DomainSpec::unit_square(), 0.25);
  const std::vector<double> tensor = {2.0, 0.3, 0.3, 1.5};  // (i,j) layout for n=1
  TensorSampler coeff = [&tensor](const Vec2&, double* a) {
    std::copy(tensor.begin(), tensor.end(), a);
  };
  const SparseOperator A = assemble_diffusion(mesh, coeff, 1, true);
  const Eigen::SparseMatrix<double> D = A.mat - Eigen::SparseMatrix<double>(A.mat.transpose());
  double asym = 0;
  for (int k = 0; k < D.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(D, k); it; ++it)
      asym = std::max(asym, std::abs(it.value()));
  CHECK(asym < 1e-14);
}

TEST_CASE("diffusion assembly: oscillatory checkerboard keeps positivity") {
  // Legendre-positive coefficients give a positive quadratic form on
  // Dirichlet-constrained vectors.
  const Mesh mesh = build_domain_mesh(DomainSpec::unit_square(), 1.0 / 16);
  const PeriodicCoefficientField cb = fields::checkerboard(1.0, 4.0);
  SparseOperator A = assemble_diffusion(mesh, cb.oscillatory(0.25), 1, true);
  SolutionField u = random_field(mesh, 1, 99);
  const double q = u.values.dot(A.mat * u.values);
  CHECK(q > 0);
}

TEST_CASE("diffusion assembly: non-finite sampler is rejected") {
  const Mesh mesh = build_domain_mesh(DomainSpec::unit_square(), 0.5);
  TensorSampler bad = [](const Vec2& x, double* a) {
    a[0] = x.x() > 0.4 ? std::numeric_limits<double>::quiet_NaN() : 1.0;
    a[1] = a[2] = 0;
    a[3] = 1.0;
  };
  CHECK_THROWS_AS(assemble_diffusion(mesh, bad, 1, true), AssemblyError);
}

TEST_CASE("semilinear assembly: zero model, constant source, mass row") {
  const Mesh mesh = build_domain_mesh(DomainSpec::unit_square(), 0.25);
  SolutionField u(mesh, 1);

  const Eigen::VectorXd r0 = assemble_semilinear(u, models::zero(), mesh);
  CHECK(r0.norm() == 0.0);

  // b(x,u) = 1: entries are integrals of the basis functions; total = |Omega|.
  NonlinearityModel one;
  one.reaction = [](const Vec2&, const double*, double* out) { out[0] = 1.0; };
  one.reaction_du = [](const Vec2&, const double*, double* out) { out[0] = 0.0; };
  const Eigen::VectorXd r1 = assemble_semilinear(u, one, mesh);
  CHECK(r1.sum() == doctest::Approx(1.0).epsilon(1e-13));

  // b(x,u) = u at the interpolant of 1 equals mass-matrix row sums.
  SolutionField w(mesh, 1);
  w.values.setOnes();
  const Eigen::VectorXd r2 = assemble_semilinear(w, models::linear_mass(1.0), mesh);
  const SparseOperator M = assemble_mass(mesh, 1);
  const Eigen::VectorXd rows = M.mat * Eigen::VectorXd::Ones(M.dim());
  CHECK((r2 - rows).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("linearization: cubic at constant state is a scaled mass matrix") {
  const Mesh mesh = build_domain_mesh(DomainSpec::unit_square(), 0.25);
  NonlinearityModel cubic;
  cubic.reaction = [](const Vec2&, const double* u, double* out) {
    out[0] = u[0] * u[0] * u[0];
  };
  cubic.reaction_du = [](const Vec2&, const double* u, double* out) {
    out[0] = 3.0 * u[0] * u[0];
  };
  SolutionField u(mesh, 1);
  u.values.setConstant(2.0);
  const SparseOperator J = assemble_linearization(u, cubic, mesh);
  const SparseOperator M = assemble_mass(mesh, 1);
  const Eigen::SparseMatrix<double> D = J.mat - 12.0 * M.mat;
  double diff = 0;
  for (int k = 0; k < D.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(D, k); it; ++it)
      diff = std::max(diff, std::abs(it.value()));
  CHECK(diff < 1e-12);

  // A model independent of u has a zero linearization.
  NonlinearityModel constant;
  constant.reaction = [](const Vec2&, const double*, double* out) { out[0] = 3.0; };
  constant.reaction_du = [](const Vec2&, const double*, double* out) { out[0] = 0.0; };
  const SparseOperator Z = assemble_linearization(u, constant, mesh);
  CHECK(Z.mat.norm() == 0.0);
}

TEST_CASE("linearization matches finite differences for every builtin model") {
  const Mesh mesh = build_domain_mesh(DomainSpec::unit_square(), 0.25);
  DomainSpec robin = DomainSpec::unit_square();
  robin.robin_edges = {0};
  const Mesh mesh_robin = build_domain_mesh(robin, 0.25);

  for (const auto& name : models::builtin_names()) {
    NonlinearityModel model = models::by_name(name, Eigen::Matrix2d::Identity(), 1.0);
    const Mesh& m = model.has_robin() ? mesh_robin : mesh;
    CAPTURE(name);
    Pcg32 rng(7u);
    for (int trial = 0; trial < 5; ++trial) {
      SolutionField u(m, model.n);
      for (int i = 0; i < u.dofs(); ++i) u.values[i] = rng.uniform(-1.0, 1.0);
      SolutionField v(m, model.n);
      for (int i = 0; i < v.dofs(); ++i) v.values[i] = rng.uniform(-1.0, 1.0);
      const double t = 1e-6;
      SolutionField up = u, um = u;
      up.values += t * v.values;
      um.values -= t * v.values;
      const Eigen::VectorXd fd =
          (assemble_semilinear(up, model, m) - assemble_semilinear(um, model, m)) /
          (2 * t);
      const SparseOperator J = assemble_linearization(u, model, m);
      const Eigen::VectorXd jv = J.mat * v.values;
      const double denom = std::max(1.0, v.values.norm());
      CHECK((jv - fd).norm() / denom <= 1e-5);
    }
  }
}

TEST_CASE("solve_sparse: identity, consistency, random SPD") {
  const int n = 50;
  Eigen::SparseMatrix<double> I(n, n);
  I.setIdentity();
  Eigen::VectorXd b(n);
  Pcg32 rng(3u);
  for (int i = 0; i < n; ++i) b[i] = rng.uniform(-2.0, 2.0);
  CHECK((solve_sparse(SparseOperator(I, true), b) - b).norm() == 0.0);

  // 1D Poisson stencil with a known solution.
  std::vector<Eigen::Triplet<double>> trips;
  for (int i = 0; i < n; ++i) {
    trips.emplace_back(i, i, 2.0);
    if (i > 0) trips.emplace_back(i, i - 1, -1.0);
    if (i + 1 < n) trips.emplace_back(i, i + 1, -1.0);
  }
  Eigen::SparseMatrix<double> P(n, n);
  P.setFromTriplets(trips.begin(), trips.end());
  Eigen::VectorXd xk(n);
  for (int i = 0; i < n; ++i) xk[i] = rng.uniform(-1.0, 1.0);
  const SparseOperator Pop(P, true);
  const Eigen::VectorXd sol = solve_sparse(Pop, P * xk);
  CHECK((sol - xk).cwiseAbs().maxCoeff() < 1e-10);

  // Random SPD built as M^T M + I.
  Eigen::MatrixXd Md(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) Md(i, j) = rng.uniform(-1.0, 1.0);
  const Eigen::MatrixXd S = Md.transpose() * Md + Eigen::MatrixXd::Identity(n, n);
  const SparseOperator Sop(S.sparseView(), true);
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < n; ++i) rhs[i] = rng.uniform(-1.0, 1.0);
  const Eigen::VectorXd x = solve_sparse(Sop, rhs);
  CHECK((S * x - rhs).norm() <= 1e-10 * rhs.norm());
}

TEST_CASE("matrix export is plain coordinate text") {
  Eigen::SparseMatrix<double> A(2, 2);
  A.insert(0, 0) = 1.5;
  A.insert(1, 0) = -2.0;
  A.makeCompressed();
  const std::string text = export_matrix_text(SparseOperator(A, false));
  CHECK(text == "0 0 1.5\n1 0 -2\n");
}

TEST_CASE("norms: sup, W1p, dual") {
  const Mesh mesh = build_domain_mesh(DomainSpec::unit_square(), 0.25);
  SolutionField u(mesh, 2);
  CHECK(norm(u, NormKind::sup()) == 0.0);
  CHECK(norm(u, NormKind::w1p(2.0)) == 0.0);

  u.at(0, 7) = 3.0;
  u.at(1, 12) = -5.0;
  CHECK(norm(u, NormKind::sup()) == doctest::Approx(5.0));

  // W^{1,2} agrees with sqrt(u^T K u + u^T M u) to quadrature accuracy.
  SolutionField w = random_field(mesh, 2, 21);
  const SparseOperator K = assemble_diffusion(mesh, identity_tensor(2), 2, true);
  const SparseOperator M = assemble_mass(mesh, 2);
  const double alg = std::sqrt(w.values.dot(K.mat * w.values) +
                               w.values.dot(M.mat * w.values));
  CHECK(w1p_norm(w, 2.0) == doctest::Approx(alg).epsilon(1e-12));

  // Dual norm identity: f = K w  =>  dual(f) = sqrt(w^T K w).
  NormWorkspace ws(mesh, 2, w.constrained);
  Eigen::VectorXd f = ws.h1_matrix().mat * w.values;
  zero_constrained(f, w.constrained);
  SolutionField wfree = w;  // w vanishes on the boundary already
  const double expected = std::sqrt(wfree.values.dot(ws.h1_matrix().mat * wfree.values));
  CHECK(ws.dual_h1(f) == doctest::Approx(expected).epsilon(1e-10));

  // Cauchy-Schwarz equality case: dual(f) = ||K^{-1} f||_{W^{1,2}-discrete}.
  const Eigen::VectorXd kinv_f = ws.h1_factor().solve(f);
  const double w12_of_kinv = std::sqrt(kinv_f.dot(ws.h1_matrix().mat * kinv_f));
  CHECK(ws.dual_h1(f) == doctest::Approx(w12_of_kinv).epsilon(1e-10));
}

TEST_CASE("norms: non-finite input rejected") {
  const Mesh mesh = build_domain_mesh(DomainSpec::unit_square(), 0.5);
  SolutionField u(mesh, 1);
  u.values[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(sup_norm(u), NumericError);
}

TEST_CASE("discrete coercivity: constrained diffusion matrix is positive definite") {
  // ~100-DOF instance, smallest eigenvalue by shifted inverse iteration.
  const Mesh mesh = build_domain_mesh(DomainSpec::unit_square(), 1.0 / 11);
  const PeriodicCoefficientField cb = fields::checkerboard(1.0, 4.0);
  SolutionField proto(mesh, 1);
  constrain_dirichlet_boundary(proto);
  SparseOperator A = assemble_diffusion(mesh, cb.oscillatory(0.5), 1, true);
  pin_constrained(A, proto.constrained);
  const double lmin = smallest_eigenvalue_symmetric(A);
  CHECK(lmin > 0);
}

TEST_CASE("solve_sparse: singular operator is reported") {
  Eigen::SparseMatrix<double> Z(4, 4);
  Z.insert(0, 0) = 1.0;  // rank 1
  Z.makeCompressed();
  Eigen::VectorXd b = Eigen::VectorXd::Ones(4);
  CHECK_THROWS_AS(solve_sparse(SparseOperator(Z, false), b), NumericError);
}

TEST_CASE("semilinear assembly: model failure names the quadrature point") {
  const Mesh mesh = build_domain_mesh(DomainSpec::unit_square(), 0.5);
  SolutionField u(mesh, 1);
  NonlinearityModel bad;
  bad.reaction = [](const Vec2& x, const double*, double* out) {
    out[0] = x.x() > 0.6 ? std::numeric_limits<double>::infinity() : 0.0;
  };
  CHECK_THROWS_WITH_AS(assemble_semilinear(u, bad, mesh),
                       doctest::Contains("non-finite"), AssemblyError);
}

TEST_CASE("W1p norm for p = 4 on a constant field") {
  const Mesh mesh = build_domain_mesh(DomainSpec::unit_square(), 0.25);
  SolutionField u(mesh, 1);
  u.values.setConstant(2.0);
  // gradient vanishes, so the norm is (|2|^4 * |Omega|)^{1/4}
  CHECK(w1p_norm(u, 4.0) == doctest::Approx(2.0).epsilon(1e-12));
}
