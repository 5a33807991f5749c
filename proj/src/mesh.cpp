#include "lodll/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lodll/error.hpp"

namespace lodll {

TriMesh::TriMesh(std::size_t n_sub) : n_sub_(n_sub) {
  require(n_sub >= 1, "build_uniform_trimesh: n_sub must be at least 1 (got 0)");
  const std::size_t np = n_sub + 1;
  const double n = static_cast<double>(n_sub);
  nodes_.reserve(np * np);
  for (std::size_t j = 0; j < np; ++j) {
    for (std::size_t i = 0; i < np; ++i) {
      const double x = static_cast<double>(i) / n;
      const double y = static_cast<double>(j) / n;
      nodes_.emplace_back(x, y);
      if (i == 0 || j == 0 || i == n_sub || j == n_sub) {
        boundary_nodes_.push_back(static_cast<int>(j * np + i));
      }
    }
  }
  elements_.reserve(2 * n_sub * n_sub);
  for (std::size_t cj = 0; cj < n_sub; ++cj) {
    for (std::size_t ci = 0; ci < n_sub; ++ci) {
      const int n00 = node_index(ci, cj);
      const int n10 = node_index(ci + 1, cj);
      const int n11 = node_index(ci + 1, cj + 1);
      const int n01 = node_index(ci, cj + 1);
      elements_.push_back({n00, n10, n11});
      elements_.push_back({n00, n11, n01});
    }
  }
  node_elements_.resize(nodes_.size());
  for (std::size_t e = 0; e < elements_.size(); ++e) {
    for (int v : elements_[e]) node_elements_[v].push_back(static_cast<int>(e));
  }
}

double TriMesh::element_area(std::size_t e) const {
  const auto& t = elements_[e];
  const Point a = nodes_[t[1]] - nodes_[t[0]];
  const Point b = nodes_[t[2]] - nodes_[t[0]];
  return 0.5 * (a.x() * b.y() - a.y() * b.x());
}

Point TriMesh::barycenter(std::size_t e) const {
  const auto& t = elements_[e];
  return (nodes_[t[0]] + nodes_[t[1]] + nodes_[t[2]]) / 3.0;
}

std::array<Point, 3> TriMesh::shape_gradients(std::size_t e) const {
  const auto& t = elements_[e];
  const Point& p0 = nodes_[t[0]];
  const Point& p1 = nodes_[t[1]];
  const Point& p2 = nodes_[t[2]];
  const double det = (p1.x() - p0.x()) * (p2.y() - p0.y()) - (p2.x() - p0.x()) * (p1.y() - p0.y());
  // grad lambda_k = rot90(opposite edge) / det
  std::array<Point, 3> g;
  g[0] = Point(p1.y() - p2.y(), p2.x() - p1.x()) / det;
  g[1] = Point(p2.y() - p0.y(), p0.x() - p2.x()) / det;
  g[2] = Point(p0.y() - p1.y(), p1.x() - p0.x()) / det;
  return g;
}

std::pair<int, Eigen::Vector3d> TriMesh::locate(const Point& p) const {
  const double n = static_cast<double>(n_sub_);
  const auto clamp_cell = [&](double v) {
    auto c = static_cast<long>(std::floor(v * n));
    return static_cast<std::size_t>(std::clamp<long>(c, 0, static_cast<long>(n_sub_) - 1));
  };
  const std::size_t ci = clamp_cell(p.x());
  const std::size_t cj = clamp_cell(p.y());
  const double s = p.x() * n - static_cast<double>(ci);
  const double t = p.y() * n - static_cast<double>(cj);
  const std::size_t cell = cj * n_sub_ + ci;
  if (s >= t) return {static_cast<int>(2 * cell), Eigen::Vector3d(1.0 - s, s - t, t)};
  return {static_cast<int>(2 * cell + 1), Eigen::Vector3d(1.0 - t, s, t - s)};
}

TriMesh build_uniform_trimesh(std::size_t n_sub) { return TriMesh(n_sub); }

namespace {

// Index range of cells whose closure contains grid line coordinate I on a
// fine grid with r fine intervals per coarse cell.
std::pair<std::size_t, std::size_t> touching_cells(std::size_t I, std::size_t r, std::size_t nc) {
  const std::size_t c = I / r;
  if (I % r != 0) return {c, c};
  const std::size_t lo = c == 0 ? 0 : c - 1;
  const std::size_t hi = std::min(c, nc - 1);
  return {lo, hi};
}

}  // namespace

std::vector<int> MeshPair::coarse_elements_touching(std::size_t fine_node) const {
  const std::size_t nf = fine.n_sub();
  const std::size_t nc = coarse.n_sub();
  const std::size_t r = ratio();
  const std::size_t I = fine_node % (nf + 1);
  const std::size_t J = fine_node / (nf + 1);
  const auto [ci0, ci1] = touching_cells(I, r, nc);
  const auto [cj0, cj1] = touching_cells(J, r, nc);
  std::vector<int> out;
  for (std::size_t cj = cj0; cj <= cj1; ++cj) {
    for (std::size_t ci = ci0; ci <= ci1; ++ci) {
      // local integer offsets within the cell, in [0, r]
      const long s = static_cast<long>(I) - static_cast<long>(ci * r);
      const long t = static_cast<long>(J) - static_cast<long>(cj * r);
      const std::size_t cell = cj * nc + ci;
      if (s >= t) out.push_back(static_cast<int>(2 * cell));
      if (t >= s) out.push_back(static_cast<int>(2 * cell + 1));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> MeshPair::fine_elements_in(std::size_t coarse_element) const {
  const std::size_t nc = coarse.n_sub();
  const std::size_t nf = fine.n_sub();
  const std::size_t r = ratio();
  const std::size_t cell = coarse_element / 2;
  const bool lower = coarse_element % 2 == 0;
  const std::size_t ci = cell % nc;
  const std::size_t cj = cell / nc;
  std::vector<int> out;
  out.reserve(r * r);
  for (std::size_t b = 0; b < r; ++b) {
    for (std::size_t a = 0; a < r; ++a) {
      const std::size_t fcell = (cj * r + b) * nf + (ci * r + a);
      // Fine cell (a, b) in local coordinates; the coarse diagonal is a == b.
      if (lower) {
        if (a > b) {
          out.push_back(static_cast<int>(2 * fcell));
          out.push_back(static_cast<int>(2 * fcell + 1));
        } else if (a == b) {
          out.push_back(static_cast<int>(2 * fcell));
        }
      } else {
        if (b > a) {
          out.push_back(static_cast<int>(2 * fcell));
          out.push_back(static_cast<int>(2 * fcell + 1));
        } else if (a == b) {
          out.push_back(static_cast<int>(2 * fcell + 1));
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

int MeshPair::coarse_parent(std::size_t fine_element) const {
  const std::size_t nc = coarse.n_sub();
  const std::size_t nf = fine.n_sub();
  const std::size_t r = ratio();
  const std::size_t fcell = fine_element / 2;
  const bool fine_lower = fine_element % 2 == 0;
  const std::size_t fi = fcell % nf;
  const std::size_t fj = fcell / nf;
  const std::size_t ci = fi / r;
  const std::size_t cj = fj / r;
  const std::size_t a = fi % r;
  const std::size_t b = fj % r;
  const std::size_t cell = cj * nc + ci;
  bool lower;
  if (a != b) {
    lower = a > b;
  } else {
    lower = fine_lower;
  }
  return static_cast<int>(2 * cell + (lower ? 0 : 1));
}

MeshPair make_mesh_pair(std::size_t coarse_n, std::size_t fine_n) {
  require(coarse_n >= 1 && fine_n >= 1, "make_mesh_pair: subdivision counts must be positive");
  if (fine_n % coarse_n != 0) {
    fail(ErrorKind::invalid_argument, "make_mesh_pair: fine_n (" + std::to_string(fine_n) +
                                          ") is not a multiple of coarse_n (" +
                                          std::to_string(coarse_n) + ")");
  }
  MeshPair pair{TriMesh(coarse_n), TriMesh(fine_n), {}};
  const std::size_t r = fine_n / coarse_n;
  const std::size_t nfp = fine_n + 1;
  const double rr = static_cast<double>(r);

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(3 * nfp * nfp);
  for (std::size_t J = 0; J < nfp; ++J) {
    for (std::size_t I = 0; I < nfp; ++I) {
      const std::size_t row = J * nfp + I;
      const std::size_t ci = std::min(I / r, coarse_n - 1);
      const std::size_t cj = std::min(J / r, coarse_n - 1);
      const double s = static_cast<double>(I - ci * r) / rr;
      const double t = static_cast<double>(J - cj * r) / rr;
      const int n00 = pair.coarse.node_index(ci, cj);
      const int n10 = pair.coarse.node_index(ci + 1, cj);
      const int n11 = pair.coarse.node_index(ci + 1, cj + 1);
      const int n01 = pair.coarse.node_index(ci, cj + 1);
      std::array<std::pair<int, double>, 3> w;
      if (s >= t) {
        w = {{{n00, 1.0 - s}, {n10, s - t}, {n11, t}}};
      } else {
        w = {{{n00, 1.0 - t}, {n11, s}, {n01, t - s}}};
      }
      for (auto [col, val] : w) {
        if (val != 0.0) trips.emplace_back(static_cast<int>(row), col, val);
      }
    }
  }
  pair.prolongation.resize(static_cast<Eigen::Index>(pair.fine.num_nodes()),
                           static_cast<Eigen::Index>(pair.coarse.num_nodes()));
  pair.prolongation.setFromTriplets(trips.begin(), trips.end());
  return pair;
}

Patch element_patch(const TriMesh& mesh, int seed, std::size_t layers) {
  if (seed < 0 || static_cast<std::size_t>(seed) >= mesh.num_elements()) {
    fail(ErrorKind::invalid_argument, "element_patch: seed element " + std::to_string(seed) +
                                          " out of range [0, " +
                                          std::to_string(mesh.num_elements()) + ")");
  }
  std::vector<char> in_patch(mesh.num_elements(), 0);
  in_patch[seed] = 1;
  std::vector<int> current{seed};
  for (std::size_t l = 0; l < layers; ++l) {
    std::vector<char> node_mark(mesh.num_nodes(), 0);
    for (int e : current) {
      for (int v : mesh.element(e)) node_mark[v] = 1;
    }
    bool grew = false;
    for (std::size_t v = 0; v < mesh.num_nodes(); ++v) {
      if (!node_mark[v]) continue;
      for (int e : mesh.node_elements(v)) {
        if (!in_patch[e]) {
          in_patch[e] = 1;
          current.push_back(e);
          grew = true;
        }
      }
    }
    if (!grew) break;
  }
  Patch p;
  p.seed_element = seed;
  p.layers = layers;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    if (in_patch[e]) p.coarse_elements.push_back(static_cast<int>(e));
  }
  return p;
}

Patch element_patch(const MeshPair& pair, int seed, std::size_t layers) {
  Patch p = element_patch(pair.coarse, seed, layers);
  std::vector<char> in_patch(pair.coarse.num_elements(), 0);
  for (int e : p.coarse_elements) in_patch[e] = 1;
  std::vector<char> mark(pair.fine.num_nodes(), 0);
  const std::size_t nc = pair.coarse.n_sub();
  const std::size_t r = pair.ratio();
  for (int e : p.coarse_elements) {
    const std::size_t cell = static_cast<std::size_t>(e) / 2;
    const bool lower = e % 2 == 0;
    const std::size_t ci = cell % nc;
    const std::size_t cj = cell / nc;
    for (std::size_t b = 0; b <= r; ++b) {
      for (std::size_t a = 0; a <= r; ++a) {
        if (lower ? a < b : b < a) continue;
        mark[pair.fine.node_index(ci * r + a, cj * r + b)] = 1;
      }
    }
  }
  for (std::size_t v = 0; v < mark.size(); ++v) {
    if (!mark[v]) continue;
    p.fine_nodes.push_back(static_cast<int>(v));
    const auto touching = pair.coarse_elements_touching(v);
    const bool all_inside =
        std::all_of(touching.begin(), touching.end(), [&](int e) { return in_patch[e] != 0; });
    if (all_inside) p.free_fine_nodes.push_back(static_cast<int>(v));
  }
  return p;
}

}  // namespace lodll
