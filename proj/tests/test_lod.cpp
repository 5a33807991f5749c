#include <doctest.h>

#include <filesystem>
#include <random>

#include <Eigen/Dense>

#include "lodll/assembly.hpp"
#include "lodll/error.hpp"
#include "lodll/lod.hpp"
#include "oracles.hpp"

using namespace lodll;

namespace {

std::shared_ptr<const MeshPair> pair_ptr(std::size_t c, std::size_t f) {
  return std::make_shared<const MeshPair>(make_mesh_pair(c, f));
}

Eigen::VectorXd random_vector(Eigen::Index n, std::mt19937& rng) {
  std::normal_distribution<double> g;
  Eigen::VectorXd v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

// Coarse hat j evaluated through the coarse mesh, independent of the prolongation matrix.
double coarse_hat(const TriMesh& coarse, int j, const Point& p) {
  const auto [e, lam] = coarse.locate(p);
  const auto& t = coarse.element(e);
  for (int k = 0; k < 3; ++k) {
    if (t[k] == j) return lam[k];
  }
  return 0.0;
}

// Dense L2 projection by quadrature of coarse hats against fine hats.
Eigen::VectorXd projection_oracle(const MeshPair& pair, const Eigen::VectorXd& v) {
  const std::size_t nc = pair.coarse.num_nodes();
  Eigen::MatrixXd mc = Eigen::MatrixXd::Zero(nc, nc);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nc);
  for (std::size_t e = 0; e < pair.fine.num_elements(); ++e) {
    const auto& t = pair.fine.element(e);
    for (std::size_t a = 0; a < nc; ++a) {
      rhs(a) += oracle::integrate(pair.fine, e, [&](const Point& p, const Eigen::Vector3d& l) {
        return coarse_hat(pair.coarse, int(a), p) * (l[0] * v(t[0]) + l[1] * v(t[1]) + l[2] * v(t[2]));
      });
      for (std::size_t b = 0; b < nc; ++b) {
        mc(a, b) += oracle::integrate(pair.fine, e, [&](const Point& p, const Eigen::Vector3d&) {
          return coarse_hat(pair.coarse, int(a), p) * coarse_hat(pair.coarse, int(b), p);
        });
      }
    }
  }
  return mc.ldlt().solve(rhs);
}

}  // namespace

TEST_SUITE("lod") {
  TEST_CASE("default layers") {
    CHECK(default_layers(1) == 1);
    CHECK(default_layers(2) == 2);
    CHECK(default_layers(8) == 6);
    CHECK(default_layers(16) == 8);
  }

  TEST_CASE("coarse projector") {
    std::mt19937 rng(31);
    for (auto [c, f] : {std::pair<std::size_t, std::size_t>{2, 8}, {4, 32}}) {
      const MeshPair pair = make_mesh_pair(c, f);
      const CoarseProjector proj(pair);
      for (int trial = 0; trial < 5; ++trial) {
        const Eigen::VectorXd v = random_vector(pair.fine.num_nodes(), rng);
        const Eigen::VectorXd p = project_coarse(proj, v);
        const Eigen::VectorXd pp = project_coarse(proj, Eigen::VectorXd(pair.prolongation * p));
        CHECK((pp - p).cwiseAbs().maxCoeff() <= 1e-11 * std::max(1.0, p.cwiseAbs().maxCoeff()));
        const Eigen::VectorXd vh = random_vector(pair.coarse.num_nodes(), rng);
        CHECK((project_coarse(proj, Eigen::VectorXd(pair.prolongation * vh)) - vh).cwiseAbs().maxCoeff() <= 1e-11);
      }
      const Eigen::VectorXd one = project_coarse(proj, Eigen::VectorXd::Ones(pair.fine.num_nodes()));
      CHECK((one.array() - 1.0).abs().maxCoeff() <= 1e-12);
      CHECK_THROWS_AS(project_coarse(proj, Eigen::VectorXd::Ones(3)), Error);
    }
    const MeshPair pair = make_mesh_pair(2, 8);
    const CoarseProjector proj(pair);
    const Eigen::VectorXd v = random_vector(pair.fine.num_nodes(), rng);
    CHECK((project_coarse(proj, v) - projection_oracle(pair, v)).cwiseAbs().maxCoeff() <= 1e-12);
  }

  TEST_CASE("global correctors lie in W and are A-orthogonal to W") {
    const auto pair = pair_ptr(2, 8);
    const EllipticForm form{CoefficientField::rough_int()};
    const SparseMatrix a = form.assemble(pair->fine);
    const LodBasis basis = build_lod_basis(pair, form, kGlobalLayers);
    CHECK(basis.size() == pair->coarse.num_nodes());
    CHECK(basis.fine_size() == pair->fine.num_nodes());

    const CoarseProjector proj(*pair);
    const Eigen::MatrixXd pc = proj.project(basis.corrector_part());
    CHECK(pc.cwiseAbs().maxCoeff() <= 1e-10);
    const Eigen::MatrixXd pb = proj.project(basis.columns);
    CHECK((pb - Eigen::MatrixXd::Identity(pb.rows(), pb.cols())).cwiseAbs().maxCoeff() <= 1e-10);

    // Dense basis of W = ker(P_H) from the mixed pairing.
    const Eigen::MatrixXd w = Eigen::FullPivLU<Eigen::MatrixXd>(Eigen::MatrixXd(proj.mixed_mass())).kernel();
    CHECK(w.cols() == Eigen::Index(pair->fine.num_nodes() - pair->coarse.num_nodes()));
    const Eigen::MatrixXd residual = basis.columns.transpose() * (a * w);
    CHECK(residual.cwiseAbs().maxCoeff() <= 1e-9);

    // A single corrector solved on the whole domain satisfies the same constraint.
    const Patch whole = element_patch(*pair, 0, 4);
    const Eigen::VectorXd q = solve_corrector(*pair, form.kappa, whole, Eigen::Vector3d(1, 0, 0));
    CHECK(proj.project(q).cwiseAbs().maxCoeff() <= 1e-10);
  }

  TEST_CASE("global basis reproduces constants") {
    const auto pair = pair_ptr(4, 16);
    const LodBasis basis = build_lod_basis(pair, CoefficientField::quasi_periodic(1.0 / 8), kGlobalLayers);
    const Eigen::VectorXd one = basis.lift(Eigen::VectorXd(Eigen::VectorXd::Ones(basis.size())));
    CHECK((one.array() - 1.0).abs().maxCoeff() <= 1e-10);

    // reduce(mass) against the coarse constant gives the integrals of the columns.
    const Eigen::MatrixXd rm = reduce_operator(basis, assemble_mass(pair->fine));
    const Eigen::VectorXd paired = rm * Eigen::VectorXd::Ones(basis.size());
    for (Eigen::Index c = 0; c < basis.columns.cols(); ++c) {
      double integral = 0.0;
      for (std::size_t e = 0; e < pair->fine.num_elements(); ++e) {
        const auto& t = pair->fine.element(e);
        integral += oracle::integrate(pair->fine, e, [&](const Point&, const Eigen::Vector3d& l) {
          return l[0] * basis.columns(t[0], c) + l[1] * basis.columns(t[1], c) + l[2] * basis.columns(t[2], c);
        });
      }
      CHECK(paired(c) == doctest::Approx(integral).epsilon(1e-10));
    }
  }

  TEST_CASE("localized correctors lie in W for every layer count") {
    const auto pair = pair_ptr(4, 32);
    const CoarseProjector proj(*pair);
    for (std::size_t l : {1, 2, 3}) {
      const LodBasis basis = build_lod_basis(pair, CoefficientField::rough_int(), l);
      CHECK(proj.project(basis.corrector_part()).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }

  TEST_CASE("localization distance decreases") {
    const auto pair = pair_ptr(4, 32);
    const EllipticForm form{CoefficientField::rough_int()};
    const SparseMatrix a = form.assemble(pair->fine);
    const LodBasis global = build_lod_basis(pair, form, kGlobalLayers);
    double prev = 1e300;
    for (std::size_t l : {1, 2, 3}) {
      const double d = column_energy_distance(build_lod_basis(pair, form, l), global, a).maxCoeff();
      CHECK(d <= prev);
      prev = d;
    }
    // Eight layers saturate a 4x4 coarse mesh from any seed.
    CHECK(column_energy_distance(build_lod_basis(pair, form, 8), global, a).maxCoeff() <= 1e-10);
  }

  TEST_CASE("deterministic construction and cache") {
    const auto pair = pair_ptr(2, 16);
    const LodBasis b1 = build_lod_basis(pair, CoefficientField::rough_int(), 1);
    const LodBasis b2 = build_lod_basis(pair, CoefficientField::rough_int(), 1);
    CHECK(b1.columns == b2.columns);

    const auto dir = std::filesystem::temp_directory_path() / "lodll-test-basis-cache";
    std::filesystem::remove_all(dir);
    bool hit = true;
    const LodBasis c1 = build_lod_basis_cached(pair, CoefficientField::rough_int(), 1, dir, &hit);
    CHECK_FALSE(hit);
    const LodBasis c2 = build_lod_basis_cached(pair, CoefficientField::rough_int(), 1, dir, &hit);
    CHECK(hit);
    CHECK(c1.columns == c2.columns);
    CHECK(c1.columns == b1.columns);
    const LodBasis c3 = build_lod_basis_cached(pair, CoefficientField::quasi_periodic(), 1, dir, &hit);
    CHECK_FALSE(hit);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("ritz projection and reduction") {
    std::mt19937 rng(37);
    const auto pair = pair_ptr(4, 16);
    const EllipticForm form{CoefficientField::rough_int()};
    const SparseMatrix a = form.assemble(pair->fine);
    const LodBasis basis = build_lod_basis(pair, form, 2);

    const Eigen::VectorXd cstar = random_vector(basis.size(), rng);
    const Eigen::VectorXd c = ritz_project(basis, a, a * basis.lift(cstar));
    CHECK((c - cstar).cwiseAbs().maxCoeff() <= 1e-10);

    const Eigen::MatrixXd rk = reduce_operator(basis, assemble_stiffness(pair->fine, form.kappa));
    CHECK((rk - rk.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * rk.cwiseAbs().maxCoeff());
    const Eigen::MatrixXd dense_ref = basis.columns.transpose() * (a * basis.columns);
    CHECK((reduce_operator(basis, a) - dense_ref).cwiseAbs().maxCoeff() <= 1e-12 * dense_ref.cwiseAbs().maxCoeff());

    std::normal_distribution<double> g;
    Eigen::MatrixX3d mv(pair->fine.num_nodes(), 3);
    for (Eigen::Index i = 0; i < mv.size(); ++i) mv.data()[i] = g(rng);
    const BlockOperator cross = assemble_cross_convection(pair->fine, form.kappa, MagnetizationField(pair->fine, mv));
    const Eigen::MatrixXd rc = reduce_operator(basis, cross);
    CHECK(rc.rows() == Eigen::Index(3 * basis.size()));
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::VectorXd v = random_vector(rc.rows(), rng);
      CHECK(std::abs(v.dot(rc * v)) <= 1e-12 * v.squaredNorm() * rc.cwiseAbs().maxCoeff());
    }
    const std::vector<Eigen::MatrixXd> terms = reduce_terms(basis, cross);
    CHECK((combine_reduced(cross, terms) - rc).cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("elliptic Ritz projection converges fast against the fine solve") {
    const EllipticForm form{CoefficientField::constant()};
    std::vector<double> err;
    for (std::size_t c : {2, 4, 8}) {
      const auto pair = pair_ptr(c, 64);
      const SparseMatrix a = form.assemble(pair->fine);
      const Eigen::VectorXd rhs = assemble_scalar_load(pair->fine, [](double, double) { return 1.0; });
      const Eigen::VectorXd fine = Eigen::MatrixXd(a).ldlt().solve(rhs);
      const LodBasis basis = build_lod_basis(pair, form, kGlobalLayers);
      const Eigen::VectorXd u = basis.lift(ritz_project(basis, a, rhs));
      const SparseMatrix m = assemble_mass(pair->fine);
      const Eigen::VectorXd d = u - fine;
      err.push_back(std::sqrt(d.dot(m * d) / fine.dot(m * fine)));
    }
    // f = 1 is matched exactly by the constant, so the errors sit at round-off.
    for (double e : err) CHECK(e <= 1e-10);
  }
}
