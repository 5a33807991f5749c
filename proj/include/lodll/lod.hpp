#pragma once

#include <filesystem>
#include <limits>
#include <memory>
#include <optional>
#include <string>

#include <Eigen/Core>
#include <Eigen/SparseCholesky>

#include "lodll/assembly.hpp"
#include "lodll/coefficients.hpp"
#include "lodll/mesh.hpp"

namespace lodll {

/// Layer count meaning "no localization": every corrector is solved on the
/// whole domain.
inline constexpr std::size_t kGlobalLayers = std::numeric_limits<std::size_t>::max();

/// Layer count meaning "use default_layers for each coarse mesh".
inline constexpr std::size_t kAutoLayers = 0;

/// Default oversampling: ceil(2 log2(1/H)), at least one layer.
std::size_t default_layers(std::size_t coarse_n);

/// kAutoLayers resolved for one coarse mesh; other values pass through.
inline std::size_t resolve_layers(std::size_t layers, std::size_t coarse_n) {
  return layers == kAutoLayers ? default_layers(coarse_n) : layers;
}

/// L2-orthogonal projection from the fine P1 space onto the coarse one.
class CoarseProjector {
 public:
  explicit CoarseProjector(const MeshPair& pair);

  Eigen::VectorXd project(const Eigen::VectorXd& v_fine) const;
  Eigen::MatrixXd project(const Eigen::MatrixXd& v_fine) const;

  const SparseMatrix& coarse_mass() const { return coarse_mass_; }
  /// (coarse x fine) pairing (Lambda_j, phi_k).
  const SparseMatrix& mixed_mass() const { return mixed_mass_; }

 private:
  SparseMatrix coarse_mass_;
  SparseMatrix mixed_mass_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> factor_;
  std::size_t fine_nodes_ = 0;
};

Eigen::VectorXd project_coarse(const CoarseProjector& projector, const Eigen::VectorXd& v_fine);

/// a(u, v) = stiffness_scale (kappa grad u, grad v) + mass_scale (u, v).
struct EllipticForm {
  CoefficientField kappa;
  double stiffness_scale = 1.0;
  double mass_scale = 1.0;

  SparseMatrix assemble(const TriMesh& mesh) const;
  std::string tag() const;
};

/// Corrected coarse basis: column i is the prolonged coarse hat i plus the
/// sum of its element correctors, in fine-node coordinates.
struct LodBasis {
  std::shared_ptr<const MeshPair> pair;
  std::size_t layers = kGlobalLayers;
  EllipticForm form;
  Eigen::MatrixXd columns;

  bool global() const { return layers == kGlobalLayers; }
  std::size_t size() const { return static_cast<std::size_t>(columns.cols()); }
  std::size_t fine_size() const { return static_cast<std::size_t>(columns.rows()); }

  /// Fine nodal values of the LOD function with these coefficients.
  Eigen::VectorXd lift(const Eigen::VectorXd& coeffs) const { return columns * coeffs; }
  Eigen::MatrixX3d lift(const Eigen::MatrixX3d& coeffs) const { return columns * coeffs; }
  /// Corrector part (column minus prolonged hat).
  Eigen::MatrixXd corrector_part() const;
};

/// Factored patch saddle-point system for element correctors.  Reusable for
/// every seed sharing the same patch (in particular, the global patch).
class CorrectorProblem {
 public:
  CorrectorProblem(const MeshPair& pair, const EllipticForm& form, const Patch& patch,
                   const SparseMatrix& fine_operator);
  ~CorrectorProblem();
  CorrectorProblem(CorrectorProblem&&) noexcept;

  /// Corrector Q_K(v) for a coarse function given by its values on the
  /// seed element's three vertices; returned as a full fine vector.
  Eigen::VectorXd solve(int seed_element, const Eigen::Vector3d& seed_values) const;
  /// Correctors of all three seed-vertex hats (columns).
  Eigen::MatrixXd solve_vertex_hats(int seed_element) const;
  /// Solutions for arbitrary fine load vectors (columns); loads on nodes
  /// outside the patch interior are ignored.
  Eigen::MatrixXd solve_fine_loads(const Eigen::MatrixXd& loads) const;

 private:
  Eigen::MatrixXd element_loads(int seed_element, const Eigen::MatrixXd& coarse_values) const;

  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Q_K^l(v_H) for one seed element and patch.
Eigen::VectorXd solve_corrector(const MeshPair& pair, const CoefficientField& kappa,
                                const Patch& patch, const Eigen::Vector3d& seed_values);

LodBasis build_lod_basis(std::shared_ptr<const MeshPair> pair, const CoefficientField& kappa,
                         std::size_t layers);
LodBasis build_lod_basis(std::shared_ptr<const MeshPair> pair, const EllipticForm& form,
                         std::size_t layers);

/// build_lod_basis through an on-disk cache keyed by (coarse_n, fine_n,
/// layers, family, epsilon).  A hit returns the stored columns bit for bit.
LodBasis build_lod_basis_cached(std::shared_ptr<const MeshPair> pair, const CoefficientField& kappa,
                                std::size_t layers, const std::filesystem::path& cache_dir,
                                bool* cache_hit = nullptr);

/// B^T K B as a dense matrix.  Symmetric K gives an exactly symmetric result.
Eigen::MatrixXd reduce_operator(const LodBasis& basis, const SparseMatrix& fine_op);
/// Block-wise reduction with the same scalar basis per component; each
/// distinct scalar term is reduced once.
Eigen::MatrixXd reduce_operator(const LodBasis& basis, const BlockOperator& fine_op);

/// Reduce each term of a block operator (in term order).
std::vector<Eigen::MatrixXd> reduce_terms(const LodBasis& basis, const BlockOperator& fine_op);
/// Combine reduced terms into the (3N x 3N) reduced block matrix.
Eigen::MatrixXd combine_reduced(const BlockOperator& layout, const std::vector<Eigen::MatrixXd>& reduced);

/// Galerkin solve (B^T A B) c = B^T rhs for a symmetric positive definite A.
Eigen::VectorXd ritz_project(const LodBasis& basis, const SparseMatrix& bilinear,
                             const Eigen::VectorXd& rhs);

/// Energy-norm distance per basis column, sqrt((b1 - b2)^T A (b1 - b2)).
Eigen::VectorXd column_energy_distance(const LodBasis& a, const LodBasis& b,
                                       const SparseMatrix& energy);

}  // namespace lodll
