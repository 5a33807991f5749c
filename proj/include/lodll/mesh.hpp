#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace lodll {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Point = Eigen::Vector2d;

/// Uniform right-triangle mesh of the unit square.
///
/// Nodes are numbered row-major: node (i, j) at (i/n, j/n) has index
/// j*(n+1) + i.  Cell (ci, cj) with index c = cj*n + ci is split along the
/// lower-left to upper-right diagonal into element 2c (lower) and 2c+1
/// (upper), both counter-clockwise.
class TriMesh {
 public:
  explicit TriMesh(std::size_t n_sub);

  std::size_t n_sub() const { return n_sub_; }
  double h() const { return 1.0 / static_cast<double>(n_sub_); }
  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_elements() const { return elements_.size(); }

  const std::vector<Point>& nodes() const { return nodes_; }
  const std::vector<std::array<int, 3>>& elements() const { return elements_; }
  const std::vector<int>& boundary_nodes() const { return boundary_nodes_; }
  const Point& node(std::size_t i) const { return nodes_[i]; }
  const std::array<int, 3>& element(std::size_t e) const { return elements_[e]; }

  /// Elements having node i as a vertex.
  const std::vector<int>& node_elements(std::size_t i) const { return node_elements_[i]; }

  int node_index(std::size_t i, std::size_t j) const {
    return static_cast<int>(j * (n_sub_ + 1) + i);
  }

  double element_area(std::size_t e) const;
  Point barycenter(std::size_t e) const;

  /// Gradients of the three barycentric coordinates on element e.
  std::array<Point, 3> shape_gradients(std::size_t e) const;

  /// Element whose closure contains p, and the barycentric coordinates of p
  /// in it.  Points on shared edges resolve to the lower-indexed cell.
  std::pair<int, Eigen::Vector3d> locate(const Point& p) const;

 private:
  std::size_t n_sub_;
  std::vector<Point> nodes_;
  std::vector<std::array<int, 3>> elements_;
  std::vector<int> boundary_nodes_;
  std::vector<std::vector<int>> node_elements_;
};

TriMesh build_uniform_trimesh(std::size_t n_sub);

/// Coarse mesh nested in a fine mesh, plus the P1 prolongation between them.
struct MeshPair {
  TriMesh coarse;
  TriMesh fine;
  /// fine.num_nodes() x coarse.num_nodes(); rows sum to one.
  SparseMatrix prolongation;

  std::size_t ratio() const { return fine.n_sub() / coarse.n_sub(); }

  /// Coarse elements whose closure contains the given fine node.
  std::vector<int> coarse_elements_touching(std::size_t fine_node) const;

  /// Fine elements lying inside coarse element K.
  std::vector<int> fine_elements_in(std::size_t coarse_element) const;

  /// Coarse element containing fine element e.
  int coarse_parent(std::size_t fine_element) const;
};

MeshPair make_mesh_pair(std::size_t coarse_n, std::size_t fine_n);

/// l-layer element patch around a seed coarse element.
struct Patch {
  int seed_element = 0;
  std::size_t layers = 0;
  /// Sorted coarse element indices.
  std::vector<int> coarse_elements;
  /// Sorted fine node indices in the closure of the patch.  Empty unless the
  /// patch was built from a MeshPair.
  std::vector<int> fine_nodes;
  /// Subset of fine_nodes not on the patch boundary interior to the domain;
  /// these carry the corrector degrees of freedom.
  std::vector<int> free_fine_nodes;

  bool covers(std::size_t n_elements) const { return coarse_elements.size() == n_elements; }
};

/// Omega^0(K) = K; Omega^l(K) = all elements whose closure meets the closure
/// of Omega^{l-1}(K).  Vertex contact counts.
Patch element_patch(const TriMesh& mesh, int seed, std::size_t layers);

/// Same recursion on pair.coarse, with fine_nodes / free_fine_nodes filled.
Patch element_patch(const MeshPair& pair, int seed, std::size_t layers);

}  // namespace lodll
