#pragma once

#include <memory>
#include <stdexcept>
#include <string>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

namespace homog2d {

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Assembled sparse operator. Entries are pre-summed (compressed); the
/// symmetry flag selects the factorization in solve_sparse.
struct SparseOperator {
  Eigen::SparseMatrix<double> mat;
  bool symmetric = false;

  int dim() const { return static_cast<int>(mat.rows()); }
  SparseOperator() = default;
  explicit SparseOperator(Eigen::SparseMatrix<double> m, bool sym = false)
      : mat(std::move(m)), symmetric(sym) {}
};

/// Direct solve with residual check: ||A x - b||_2 <= rtol ||b||_2.
Eigen::VectorXd solve_sparse(const SparseOperator& A, const Eigen::VectorXd& rhs,
                             double rtol = 1e-10);

/// Factorization cached for repeated solves (Newton iterations, dual norms).
/// Uses LDLT for symmetric operators and LU otherwise; LU also factors the
/// transpose on demand.
class FactorizedOperator {
 public:
  explicit FactorizedOperator(const SparseOperator& A);
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  Eigen::VectorXd solve_transposed(const Eigen::VectorXd& rhs) const;
  int dim() const { return dim_; }

 private:
  int dim_ = 0;
  bool symmetric_ = false;
  Eigen::SparseMatrix<double> mat_;  // kept for transpose factorization
  std::unique_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> ldlt_;
  std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
  mutable std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_t_;
};

/// Smallest eigenvalue of a symmetric operator by shifted inverse iteration.
double smallest_eigenvalue_symmetric(const SparseOperator& A, int max_iter = 500,
                                     double tol = 1e-10, unsigned seed = 7);

/// Coordinate text export: "row col value" per line, 0-based indices.
std::string export_matrix_text(const SparseOperator& A);

}  // namespace homog2d
