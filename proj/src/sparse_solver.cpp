#include "lodll/sparse_solver.hpp"

#ifdef LODLL_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#else
#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>
#endif

#include "lodll/error.hpp"

namespace lodll {

using ColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

struct SparseDirectSolver::Impl {
#ifdef LODLL_HAVE_UMFPACK
  Eigen::UmfPackLU<ColMatrix> lu;
#else
  Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>> lu;
#endif
  ColMatrix a;
  bool analyzed = false;
};

SparseDirectSolver::SparseDirectSolver(std::string context)
    : impl_(std::make_unique<Impl>()), context_(std::move(context)) {}
SparseDirectSolver::~SparseDirectSolver() = default;
SparseDirectSolver::SparseDirectSolver(SparseDirectSolver&&) noexcept = default;
SparseDirectSolver& SparseDirectSolver::operator=(SparseDirectSolver&&) noexcept = default;

const char* SparseDirectSolver::backend() {
#ifdef LODLL_HAVE_UMFPACK
  return "umfpack";
#else
  return "eigen-sparselu";
#endif
}

void SparseDirectSolver::compute(const SparseMatrix& a) {
  if (a.rows() != a.cols()) fail(ErrorKind::invalid_argument, context_ + ": matrix is not square");
  impl_->a = a;
  impl_->a.makeCompressed();
  rows_ = static_cast<std::size_t>(a.rows());
  impl_->lu.analyzePattern(impl_->a);
  impl_->analyzed = true;
  refactor(a);
}

void SparseDirectSolver::refactor(const SparseMatrix& a) {
  if (!impl_->analyzed) {
    compute(a);
    return;
  }
  impl_->a = a;
  impl_->a.makeCompressed();
  impl_->lu.factorize(impl_->a);
  if (impl_->lu.info() != Eigen::Success) {
    fail(ErrorKind::numerical, context_ + ": factorization of a " + std::to_string(a.rows()) +
                                   "x" + std::to_string(a.cols()) +
                                   " system failed (singular matrix?)");
  }
}

Eigen::MatrixXd SparseDirectSolver::solve(const Eigen::MatrixXd& rhs) const {
  if (static_cast<std::size_t>(rhs.rows()) != rows_) {
    fail(ErrorKind::invalid_argument, context_ + ": right-hand side has wrong length");
  }
  Eigen::MatrixXd x = impl_->lu.solve(rhs);
  if (impl_->lu.info() != Eigen::Success || !x.allFinite()) {
    fail(ErrorKind::numerical, context_ + ": solve produced non-finite values");
  }
  return x;
}

Eigen::VectorXd SparseDirectSolver::solve(const Eigen::VectorXd& rhs) const {
  Eigen::MatrixXd x = solve(Eigen::MatrixXd(rhs));
  return x.col(0);
}

}  // namespace lodll
