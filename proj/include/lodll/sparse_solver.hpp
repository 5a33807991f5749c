#pragma once

#include <memory>
#include <string>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "lodll/mesh.hpp"

namespace lodll {

/// Sparse direct LU factorization (UMFPACK when available, Eigen::SparseLU
/// otherwise).  Singular or failed factorizations throw a numerical Error
/// prefixed with `context`.
class SparseDirectSolver {
 public:
  explicit SparseDirectSolver(std::string context = "sparse solve");
  ~SparseDirectSolver();
  SparseDirectSolver(SparseDirectSolver&&) noexcept;
  SparseDirectSolver& operator=(SparseDirectSolver&&) noexcept;

  /// Symbolic + numeric factorization.
  void compute(const SparseMatrix& a);
  /// Numeric factorization reusing the symbolic analysis of the last
  /// compute(); the sparsity pattern must be unchanged.
  void refactor(const SparseMatrix& a);

  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

  std::size_t rows() const { return rows_; }
  static const char* backend();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::string context_;
  std::size_t rows_ = 0;
};

}  // namespace lodll
