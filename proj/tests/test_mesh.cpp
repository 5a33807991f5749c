#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "lodll/error.hpp"
#include "lodll/mesh.hpp"

using namespace lodll;

namespace {

double signed_area(const TriMesh& m, std::size_t e) {
  const auto& t = m.element(e);
  const Point a = m.node(t[1]) - m.node(t[0]);
  const Point b = m.node(t[2]) - m.node(t[0]);
  return 0.5 * (a.x() * b.y() - a.y() * b.x());
}

// Brute-force closure intersection: two triangles of a uniform mesh touch iff
// they share a vertex.
std::set<int> brute_patch(const TriMesh& m, int seed, std::size_t layers) {
  std::set<int> cur = {seed};
  for (std::size_t l = 0; l < layers; ++l) {
    std::set<int> verts;
    for (int e : cur) {
      for (int v : m.element(e)) verts.insert(v);
    }
    std::set<int> next;
    for (std::size_t e = 0; e < m.num_elements(); ++e) {
      for (int v : m.element(e)) {
        if (verts.count(v)) next.insert(static_cast<int>(e));
      }
    }
    cur = next;
  }
  return cur;
}

}  // namespace

TEST_SUITE("mesh") {
  TEST_CASE("counts for small meshes") {
    const TriMesh m1 = build_uniform_trimesh(1);
    CHECK(m1.num_nodes() == 4);
    CHECK(m1.num_elements() == 2);
    const TriMesh m2(2);
    CHECK(m2.num_nodes() == 9);
    CHECK(m2.num_elements() == 8);
    const TriMesh m16(16);
    CHECK(m16.num_nodes() == 289);
    CHECK(m16.num_elements() == 512);
  }

  TEST_CASE("zero subdivisions rejected") { CHECK_THROWS_AS(TriMesh(0), Error); }

  TEST_CASE("areas positive and tile the square") {
    for (std::size_t n : {1, 2, 4, 8, 16, 32}) {
      const TriMesh m(n);
      double total = 0.0;
      for (std::size_t e = 0; e < m.num_elements(); ++e) {
        const double a = signed_area(m, e);
        CHECK(a == doctest::Approx(0.5 / double(n * n)).epsilon(1e-14));
        CHECK(m.element_area(e) == doctest::Approx(a).epsilon(1e-14));
        total += a;
      }
      CHECK(std::abs(total - 1.0) <= 1e-13);
    }
  }

  TEST_CASE("row-major nodes and boundary") {
    const TriMesh m(4);
    CHECK(m.node(m.node_index(3, 1)).x() == 0.75);
    CHECK(m.node(m.node_index(3, 1)).y() == 0.25);
    CHECK(m.boundary_nodes().size() == 16);
    for (int b : m.boundary_nodes()) {
      const Point& p = m.node(b);
      CHECK((p.x() == 0.0 || p.x() == 1.0 || p.y() == 0.0 || p.y() == 1.0));
    }
  }

  TEST_CASE("locate returns barycentric coordinates") {
    const TriMesh m(8);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 200; ++k) {
      const Point p(u(rng), u(rng));
      const auto [e, lam] = m.locate(p);
      CHECK(lam.minCoeff() >= -1e-14);
      CHECK(lam.sum() == doctest::Approx(1.0));
      const auto& t = m.element(e);
      const Point q = lam[0] * m.node(t[0]) + lam[1] * m.node(t[1]) + lam[2] * m.node(t[2]);
      CHECK((q - p).norm() <= 1e-14);
    }
  }

  TEST_CASE("mesh pair prolongation") {
    const MeshPair p12 = make_mesh_pair(1, 2);
    CHECK(p12.prolongation.rows() == 9);
    CHECK(p12.prolongation.cols() == 4);
    const Eigen::VectorXd sums = p12.prolongation * Eigen::VectorXd::Ones(4);
    CHECK((sums.array() - 1.0).abs().maxCoeff() <= 1e-15);

    const MeshPair p28 = make_mesh_pair(2, 8);
    const int center = p28.coarse.node_index(1, 1);
    const int quarter = p28.fine.node_index(2, 2);
    CHECK(p28.prolongation.coeff(quarter, center) == doctest::Approx(0.5).epsilon(1e-15));

    const MeshPair p4 = make_mesh_pair(4, 256);
    const Eigen::VectorXd ones = p4.prolongation * Eigen::VectorXd::Ones(25);
    CHECK((ones.array() - 1.0).abs().maxCoeff() <= 1e-15);

    CHECK_THROWS_AS(make_mesh_pair(3, 8), Error);
  }

  TEST_CASE("prolongation reproduces coarse values at coarse nodes") {
    const MeshPair pair = make_mesh_pair(4, 16);
    std::mt19937 rng(11);
    std::normal_distribution<double> g;
    const std::size_t r = pair.ratio();
    for (int trial = 0; trial < 100; ++trial) {
      Eigen::VectorXd v(pair.coarse.num_nodes());
      for (auto& x : v) x = g(rng);
      const Eigen::VectorXd f = pair.prolongation * v;
      double err = 0.0;
      for (std::size_t j = 0; j <= 4; ++j) {
        for (std::size_t i = 0; i <= 4; ++i) {
          err = std::max(err, std::abs(f(pair.fine.node_index(i * r, j * r)) - v(pair.coarse.node_index(i, j))));
        }
      }
      CHECK(err <= 1e-14);
    }
  }

  TEST_CASE("prolongation is exact for coarse P1 functions") {
    const MeshPair pair = make_mesh_pair(2, 8);
    std::mt19937 rng(5);
    std::normal_distribution<double> g;
    Eigen::VectorXd v(pair.coarse.num_nodes());
    for (auto& x : v) x = g(rng);
    const Eigen::VectorXd f = pair.prolongation * v;
    for (std::size_t i = 0; i < pair.fine.num_nodes(); ++i) {
      const auto [e, lam] = pair.coarse.locate(pair.fine.node(i));
      const auto& t = pair.coarse.element(e);
      CHECK(f(i) == doctest::Approx(lam[0] * v(t[0]) + lam[1] * v(t[1]) + lam[2] * v(t[2])).epsilon(1e-14));
    }
  }

  TEST_CASE("coarse-fine relations") {
    const MeshPair pair = make_mesh_pair(2, 8);
    std::set<int> seen;
    for (std::size_t K = 0; K < pair.coarse.num_elements(); ++K) {
      const auto fine = pair.fine_elements_in(K);
      CHECK(fine.size() == 16);
      for (int e : fine) {
        CHECK(pair.coarse_parent(e) == static_cast<int>(K));
        seen.insert(e);
      }
    }
    CHECK(seen.size() == pair.fine.num_elements());
    // The center fine node touches all six coarse elements around it.
    CHECK(pair.coarse_elements_touching(pair.fine.node_index(4, 4)).size() == 6);
    CHECK(pair.coarse_elements_touching(pair.fine.node_index(1, 2)).size() == 1);
  }

  TEST_CASE("patch recursion") {
    const TriMesh m(4);
    for (int seed : {0, 9, 13, 31}) {
      CHECK(element_patch(m, seed, 0).coarse_elements == std::vector<int>{seed});
      for (std::size_t l = 1; l <= 4; ++l) {
        const auto p = element_patch(m, seed, l);
        const auto b = brute_patch(m, seed, l);
        CHECK(std::vector<int>(b.begin(), b.end()) == p.coarse_elements);
        const auto prev = element_patch(m, seed, l - 1).coarse_elements;
        CHECK(std::includes(p.coarse_elements.begin(), p.coarse_elements.end(), prev.begin(), prev.end()));
      }
      CHECK(element_patch(m, seed, 8).coarse_elements.size() == 32);
    }
    CHECK_THROWS_AS(element_patch(m, 32, 1), Error);
    CHECK_THROWS_AS(element_patch(m, -1, 1), Error);
  }

  TEST_CASE("patch saturation bound") {
    for (std::size_t n : {1, 2, 3, 5, 8}) {
      const TriMesh m(n);
      for (std::size_t e = 0; e < m.num_elements(); ++e) {
        CHECK(element_patch(m, static_cast<int>(e), 2 * n).covers(m.num_elements()));
      }
    }
  }

  TEST_CASE("pair patch fine nodes") {
    const MeshPair pair = make_mesh_pair(4, 16);
    const auto whole = element_patch(pair, 5, 8);
    CHECK(whole.fine_nodes.size() == pair.fine.num_nodes());
    CHECK(whole.free_fine_nodes.size() == pair.fine.num_nodes());

    const auto p0 = element_patch(pair, 0, 0);
    // Closure of the lower triangle of the first coarse cell: 5 * 6 / 2 nodes.
    CHECK(p0.fine_nodes.size() == 15);
    for (int n : p0.free_fine_nodes) {
      for (int K : pair.coarse_elements_touching(n)) CHECK(K == 0);
    }
    const auto p1 = element_patch(pair, 0, 1);
    CHECK(std::includes(p1.fine_nodes.begin(), p1.fine_nodes.end(), p0.fine_nodes.begin(), p0.fine_nodes.end()));
  }
}
