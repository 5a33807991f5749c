#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "lodll/coefficients.hpp"
#include "lodll/mesh.hpp"

namespace lodll {

/// Linear map on scalar nodal vectors.
using ScalarOperator = SparseMatrix;

/// Nodal P1 magnetization: row i holds (m1, m2, m3) at node i.
struct MagnetizationField {
  std::size_t n_sub = 0;
  Eigen::MatrixX3d values;

  MagnetizationField() = default;
  MagnetizationField(std::size_t n, Eigen::MatrixX3d v) : n_sub(n), values(std::move(v)) {}
  MagnetizationField(const TriMesh& mesh, Eigen::MatrixX3d v)
      : n_sub(mesh.n_sub()), values(std::move(v)) {}

  std::size_t num_nodes() const { return static_cast<std::size_t>(values.rows()); }
  Vec3 at(std::size_t node) const { return values.row(static_cast<Eigen::Index>(node)).transpose(); }
  bool finite() const { return values.allFinite(); }
};

/// Nodal interpolant of f on the mesh.
MagnetizationField interpolate(const TriMesh& mesh, const std::function<Vec3(double, double)>& f);
MagnetizationField constant_field(const TriMesh& mesh, const Vec3& value);

/// 3x3 grid of scalar blocks acting on (m1, m2, m3) stacked component-major.
/// Blocks are linear combinations of a shared list of scalar terms, so a
/// Galerkin reduction only has to touch each distinct term once.
struct BlockOperator {
  struct Entry {
    int row;
    int col;
    int term;
    double coeff;
  };

  std::size_t scalar_dim = 0;
  std::vector<ScalarOperator> terms;
  std::vector<Entry> entries;

  std::size_t dimension() const { return 3 * scalar_dim; }

  /// Add `coeff * op` to block (row, col); returns the term index.
  int add(int row, int col, ScalarOperator op, double coeff = 1.0);
  /// Reference an existing term from another block.
  void add_term(int row, int col, int term, double coeff);

  /// Assembled (3n x 3n) sparse matrix.
  SparseMatrix to_sparse() const;
  /// y = K x for x stacked component-major.
  Eigen::MatrixX3d apply(const Eigen::MatrixX3d& x) const;
};

/// Consistent P1 mass, optionally weighted by a per-element constant.
ScalarOperator assemble_mass(const TriMesh& mesh,
                             std::optional<std::span<const double>> weight = std::nullopt,
                             std::span<const int> element_order = {});

/// (kappa grad u, grad v) with kappa at element barycenters.
ScalarOperator assemble_stiffness(const TriMesh& mesh, const CoefficientField& kappa,
                                  std::span<const int> element_order = {});

/// (w grad u, grad v) for a per-element constant weight w.
ScalarOperator assemble_weighted_stiffness(const TriMesh& mesh, std::span<const double> weight,
                                           std::span<const int> element_order = {});

/// Trilinear form (M x kappa grad u, grad v).  Block (a, c) is
/// sum_b eps_abc (kappa M_b grad u, grad v).
BlockOperator assemble_cross_convection(const TriMesh& mesh, const CoefficientField& kappa,
                                        const MagnetizationField& M,
                                        std::span<const int> element_order = {});

/// The three (kappa M_b grad u, grad v) scalar forms used by the cross operator.
std::array<ScalarOperator, 3> assemble_cross_terms(const TriMesh& mesh,
                                                   const CoefficientField& kappa,
                                                   const MagnetizationField& M,
                                                   std::span<const int> element_order = {});

/// Builds the cross operator from the three scalar forms.
BlockOperator cross_from_terms(std::array<ScalarOperator, 3> terms);

/// Linearized projection coupling: block (a, b) is
/// ((kappa grad M_b . grad u) M_a, v), linear in the trial function u.
BlockOperator assemble_projection_coupling(const TriMesh& mesh, const CoefficientField& kappa,
                                           const MagnetizationField& M);

/// Per-element |grad M|^2 (constant for P1 fields).
std::vector<double> gradient_squared(const TriMesh& mesh, const MagnetizationField& M);
/// Per-element kappa(barycenter).
std::vector<double> element_coefficients(const TriMesh& mesh, const CoefficientField& kappa);

/// Load vectors (f, phi_i) by the 3-point edge-midpoint rule; column c is
/// the load for component c.
Eigen::MatrixX3d assemble_load(const TriMesh& mesh,
                               const std::function<Vec3(double, double)>& f,
                               std::span<const int> element_order = {});

/// Scalar load (f, phi_i), same rule.
Eigen::VectorXd assemble_scalar_load(const TriMesh& mesh,
                                     const std::function<double(double, double)>& f);

/// 1/2 int kappa |grad m|^2.
double ll_energy(const TriMesh& mesh, const CoefficientField& kappa, const MagnetizationField& M);
double ll_energy(const ScalarOperator& stiffness, const MagnetizationField& M);

}  // namespace lodll
