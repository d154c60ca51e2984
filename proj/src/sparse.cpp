#include "homog2d/sparse.hpp"

#include <sstream>

#include "homog2d/rng.hpp"

namespace homog2d {

FactorizedOperator::FactorizedOperator(const SparseOperator& A)
    : dim_(A.dim()), symmetric_(A.symmetric), mat_(A.mat) {
  mat_.makeCompressed();
  if (symmetric_) {
    ldlt_ = std::make_unique<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>();
    ldlt_->compute(mat_);
    if (ldlt_->info() != Eigen::Success)
      throw NumericError("LDLT factorization failed: zero or negative pivot "
                         "(operator not positive definite)");
  } else {
    lu_ = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
    lu_->compute(mat_);
    if (lu_->info() != Eigen::Success)
      throw NumericError("sparse LU factorization failed: " + lu_->lastErrorMessage());
  }
}

Eigen::VectorXd FactorizedOperator::solve(const Eigen::VectorXd& rhs) const {
  if (symmetric_) return ldlt_->solve(rhs);
  return lu_->solve(rhs);
}

Eigen::VectorXd FactorizedOperator::solve_transposed(const Eigen::VectorXd& rhs) const {
  if (symmetric_) return ldlt_->solve(rhs);
  if (!lu_t_) {
    lu_t_ = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
    Eigen::SparseMatrix<double> t = mat_.transpose();
    t.makeCompressed();
    lu_t_->compute(t);
    if (lu_t_->info() != Eigen::Success)
      throw NumericError("sparse LU factorization of transpose failed");
  }
  return lu_t_->solve(rhs);
}

Eigen::VectorXd solve_sparse(const SparseOperator& A, const Eigen::VectorXd& rhs,
                             double rtol) {
  if (A.mat.rows() != A.mat.cols()) throw NumericError("solve_sparse: operator not square");
  if (A.mat.rows() != rhs.size()) throw NumericError("solve_sparse: size mismatch");
  FactorizedOperator fac(A);
  Eigen::VectorXd x = fac.solve(rhs);
  const double rn = (A.mat * x - rhs).norm();
  const double bn = rhs.norm();
  if (bn > 0 && !(rn <= rtol * bn)) {
    std::ostringstream os;
    os << "solve_sparse: residual " << rn << " exceeds " << rtol << " * ||rhs|| = "
       << rtol * bn;
    throw NumericError(os.str());
  }
  if (!x.allFinite()) throw NumericError("solve_sparse: non-finite solution");
  return x;
}

double smallest_eigenvalue_symmetric(const SparseOperator& A, int max_iter, double tol,
                                     unsigned seed) {
  FactorizedOperator fac(A);
  Pcg32 rng(seed);
  Eigen::VectorXd x(A.dim());
  for (int i = 0; i < A.dim(); ++i) x[i] = rng.uniform(-1.0, 1.0);
  x.normalize();
  double lambda = 0, lambda_prev = 0;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd y = fac.solve(x);
    const double ny = y.norm();
    if (!(ny > 0)) throw NumericError("inverse iteration broke down");
    x = y / ny;
    lambda = x.dot(A.mat * x);
    if (it > 2 && std::abs(lambda - lambda_prev) <= tol * std::abs(lambda)) break;
    lambda_prev = lambda;
  }
  return lambda;
}

std::string export_matrix_text(const SparseOperator& A) {
  std::ostringstream os;
  os.precision(17);
  for (int k = 0; k < A.mat.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A.mat, k); it; ++it)
      os << it.row() << " " << it.col() << " " << it.value() << "\n";
  return os.str();
}

}  // namespace homog2d
