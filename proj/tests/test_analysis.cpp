#include <doctest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <random>

#include <Eigen/Dense>

#include "lodll/analysis.hpp"
#include "lodll/error.hpp"
#include "oracles.hpp"

using namespace lodll;

namespace {

// Errors of a P1 field against m_e(., t) by the degree-5 oracle rule.
ErrorPair oracle_errors(const TriMesh& m, const MagnetizationField& f, double t) {
  const ExactSolution ex = exact_solution_example1();
  double l2 = 0.0, semi = 0.0;
  for (std::size_t e = 0; e < m.num_elements(); ++e) {
    const auto& tri = m.element(e);
    const auto g = oracle::hat_gradients(m, e);
    Mat32 grad = Mat32::Zero();
    for (int k = 0; k < 3; ++k) grad += f.at(tri[k]) * g[k].transpose();
    l2 += oracle::integrate(m, e, [&](const Point& p, const Eigen::Vector3d& l) {
      const Vec3 v = l[0] * f.at(tri[0]) + l[1] * f.at(tri[1]) + l[2] * f.at(tri[2]);
      return (v - ex.value(p.x(), p.y(), t)).squaredNorm();
    });
    semi += oracle::integrate(m, e, [&](const Point& p, const Eigen::Vector3d&) {
      return (grad - ex.gradient(p.x(), p.y(), t)).squaredNorm();
    });
  }
  return {std::sqrt(l2), std::sqrt(l2 + semi)};
}

double modulus_oracle(const TriMesh& m, const MagnetizationField& f) {
  double s = 0.0;
  for (std::size_t e = 0; e < m.num_elements(); ++e) {
    const auto& tri = m.element(e);
    s += oracle::integrate(m, e, [&](const Point&, const Eigen::Vector3d& l) {
      const Vec3 v = l[0] * f.at(tri[0]) + l[1] * f.at(tri[1]) + l[2] * f.at(tri[2]);
      return std::pow(1.0 - v.squaredNorm(), 2);
    });
  }
  return std::sqrt(s);
}

std::vector<ErrorRow> rows_from(const std::vector<double>& H, const std::vector<double>& l2,
                                const std::vector<double>& h1) {
  std::vector<ErrorRow> rows;
  for (std::size_t i = 0; i < H.size(); ++i) rows.push_back({H[i], l2[i], h1[i], 0.0});
  return rows;
}

}  // namespace

TEST_SUITE("analysis") {
  TEST_CASE("error norms basics") {
    const TriMesh m(16);
    const MagnetizationField a = interpolate(m, initial_bump);
    const ErrorPair zero = error_norms(m, a, a);
    CHECK(zero.l2 == 0.0);
    CHECK(zero.h1 == 0.0);

    const MagnetizationField shifted = constant_field(m, Vec3(0.25, 0, 1));
    const ErrorPair c = error_norms(m, shifted, exact_solution_example1(), 0.0);
    CHECK(c.l2 == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(c.h1 == doctest::Approx(0.25).epsilon(1e-14));

    const MagnetizationField b = interpolate(m, [](double x, double y) { return Vec3(x * y, std::sin(x), 1.0); });
    const ErrorPair ab = error_norms(m, a, b), ba = error_norms(m, b, a);
    CHECK(ab.l2 == ba.l2);
    CHECK(ab.h1 == ba.h1);
    CHECK_THROWS_AS(error_norms(TriMesh(8), a, b), Error);
  }

  TEST_CASE("interpolation error against the quadrature oracle") {
    const TriMesh m(64);
    const ExactSolution ex = exact_solution_example1();
    const MagnetizationField f = interpolate(m, [&](double x, double y) { return ex.value(x, y, 0.5); });
    const ErrorPair got = error_norms(m, f, ex, 0.5);
    const ErrorPair want = oracle_errors(m, f, 0.5);
    CHECK(std::abs(got.l2 - want.l2) <= 1e-12);
    CHECK(std::abs(got.h1 - want.h1) <= 1e-12);
    const ErrorPair coarse = error_norms(TriMesh(32), interpolate(TriMesh(32), [&](double x, double y) { return ex.value(x, y, 0.5); }), ex, 0.5);
    CHECK(coarse.l2 / got.l2 == doctest::Approx(4.0).epsilon(0.05));
  }

  TEST_CASE("scalar error norms") {
    const TriMesh m(8);
    const Eigen::VectorXd u = Eigen::VectorXd::Constant(m.num_nodes(), 2.0);
    const ErrorPair e = scalar_error_norms(m, u, [](double, double) { return 1.5; },
                                           [](double, double) { return Eigen::Vector2d::Zero().eval(); });
    CHECK(e.l2 == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(scalar_error_norms(m, u, u).h1 == 0.0);
  }

  TEST_CASE("synthetic power law") {
    const std::vector<double> H = {0.5, 0.25, 0.125, 0.0625};
    std::vector<double> l2, h1;
    for (double h : H) l2.push_back(7.0 * h * h * h), h1.push_back(0.3 * h * h);
    const ErrorReport r = convergence_table(rows_from(H, l2, h1));
    CHECK(std::abs(r.slope_l2 - 3.0) <= 1e-12);
    CHECK(std::abs(r.slope_h1 - 2.0) <= 1e-12);
    REQUIRE(r.pair_rates_l2.size() == 3);
    for (double p : r.pair_rates_l2) CHECK(std::abs(p - 3.0) <= 1e-12);
    for (double p : r.pair_rates_h1) CHECK(std::abs(p - 2.0) <= 1e-12);

    CHECK_THROWS_AS(convergence_table(rows_from({0.5}, {1.0}, {1.0})), Error);
    CHECK_THROWS_AS(convergence_table(rows_from({0.25, 0.5}, {1.0, 2.0}, {1.0, 2.0})), Error);
    CHECK_THROWS_AS(loglog_slope({1.0, 2.0}, {1.0, -1.0}), Error);
  }

  TEST_CASE("published orders") {
    // Damping 1.0 study, L2 column.
    CHECK(loglog_slope({0.5, 0.25, 0.125}, {3.0057e-04, 2.9370e-05, 3.7779e-06}) == doctest::Approx(3.1570).epsilon(2e-4));
    // Damping 1.0 study, H1 column.
    CHECK(loglog_slope({0.5, 0.25, 0.125}, {2.6551e-03, 5.7892e-04, 1.4748e-04}) == doctest::Approx(2.0851).epsilon(2e-4));
    // Locally periodic coefficient, H1 column.
    CHECK(loglog_slope({0.5, 0.25, 0.125, 0.0625}, {5.4159e-01, 1.7299e-01, 4.8023e-02, 9.4035e-03}) ==
          doctest::Approx(1.9392).epsilon(2e-4));
  }

  TEST_CASE("modulus deviation") {
    const TriMesh m(8);
    CHECK(modulus_deviation(m, constant_field(m, Vec3(0, 0, 1))) <= 1e-14);
    CHECK(modulus_deviation(m, constant_field(m, Vec3(2, 0, 0))) == doctest::Approx(3.0).epsilon(1e-14));
    const TriMesh f(16);
    MagnetizationField b = interpolate(f, initial_bump);
    CHECK(((b.values.rowwise().norm().array() - 1.0).abs().maxCoeff()) <= 1e-14);
    const double dev = modulus_deviation(f, b);
    CHECK(dev > 0.0);
    CHECK(dev <= 0.1);
    CHECK(std::abs(dev - modulus_oracle(f, b)) <= 1e-13);
  }

  TEST_CASE("evaluation and prolongation") {
    const TriMesh c(4), f(16);
    const MagnetizationField lin = interpolate(c, [](double x, double y) { return Vec3(x, 2 * y - x, 1.0); });
    CHECK((evaluate(c, lin, Point(0.3, 0.7)) - Vec3(0.3, 1.1, 1.0)).norm() <= 1e-14);
    const MagnetizationField p = prolong_field(c, lin, f);
    const MagnetizationField direct = interpolate(f, [](double x, double y) { return Vec3(x, 2 * y - x, 1.0); });
    CHECK((p.values - direct.values).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK_THROWS_AS(prolong_field(f, direct, TriMesh(6)), Error);
  }

  TEST_CASE("cross sections") {
    const TriMesh m(32);
    const CrossSection flat = cross_section(m, constant_field(m, Vec3(0.6, 0, 0.8)), CrossAxis::y_fixed, 0.5, 65);
    REQUIRE(flat.samples.size() == 65);
    for (const auto& s : flat.samples) CHECK((s.m - Vec3(0.6, 0, 0.8)).norm() <= 1e-15);

    const ExactSolution ex = exact_solution_example1();
    const double T = 0.3;
    const MagnetizationField f = interpolate(m, [&](double x, double y) { return ex.value(x, y, T); });
    const CrossSection s = cross_section(m, f, CrossAxis::y_fixed, 0.5, 33);
    double worst = 0.0;
    for (std::size_t k = 0; k < s.samples.size(); ++k) {
      CHECK(s.samples[k].coordinate == doctest::Approx(double(k) / 32));
      // Samples on mesh nodes reproduce the nodal values exactly.
      CHECK((s.samples[k].m - f.at(m.node_index(k, 16))).norm() == 0.0);
      worst = std::max(worst, (s.samples[k].m - ex.value(s.samples[k].coordinate, 0.5, T)).norm());
    }
    CHECK(worst <= 1e-14);
    const CrossSection x = cross_section(m, f, CrossAxis::x_fixed, 0.3, 101);
    CHECK((x.samples.front().m - evaluate(m, f, Point(0.3, 0.0))).norm() == 0.0);
    CHECK((x.samples.back().m - evaluate(m, f, Point(0.3, 1.0))).norm() == 0.0);
    double mid = 0.0;
    for (const auto& q : x.samples) mid = std::max(mid, (q.m - ex.value(0.3, q.coordinate, T)).norm());
    CHECK(mid <= 0.5 * m.h() * m.h());
    CHECK_THROWS_AS(cross_section(m, f, CrossAxis::y_fixed, 1.5, 10), Error);
    CHECK_THROWS_AS(cross_section(m, f, CrossAxis::y_fixed, 0.5, 1), Error);
  }

  TEST_CASE("initial data descriptors") {
    for (auto d : {InitialData::bump, InitialData::example1, InitialData::constant_z}) {
      CHECK(parse_initial_data(to_string(d)) == d);
    }
    CHECK((initial_value(InitialData::example1, 0.2, 0.9) - Vec3(0, 0, 1)).norm() == 0.0);
    CHECK((initial_value(InitialData::bump, 0.2, 0.9) - initial_bump(0.2, 0.9)).norm() == 0.0);
  }

  TEST_CASE("reference cache") {
    ReferenceConfig cfg;
    cfg.fine_n = 8;
    cfg.tau = 1e-2;
    cfg.final_time = 0.05;
    cfg.alpha = 0.1;
    cfg.kappa = CoefficientField::rough_int();
    CHECK(cfg.num_steps() == 5);
    const auto dir = std::filesystem::temp_directory_path() / "lodll-test-reference-cache";
    std::filesystem::remove_all(dir);
    const std::size_t before = reference_runs();
    const ReferenceResult a = compute_reference(cfg, dir);
    const ReferenceResult b = compute_reference(cfg, dir);
    CHECK_FALSE(a.cache_hit);
    CHECK(b.cache_hit);
    CHECK(reference_runs() == before + 1);
    CHECK(a.field.values == b.field.values);
    ReferenceConfig other = cfg;
    other.alpha = 0.2;
    CHECK(other.key() != cfg.key());
    CHECK_FALSE(compute_reference(other, dir).cache_hit);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("B projection") {
    std::mt19937 rng(43);
    std::normal_distribution<double> g;
    const auto pair = std::make_shared<const MeshPair>(make_mesh_pair(2, 16));
    const LodBasis basis = build_lod_basis(pair, CoefficientField::rough_int(), kGlobalLayers);
    Eigen::MatrixX3d c(basis.size(), 3);
    for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = g(rng);
    const MagnetizationField member(pair->fine, basis.lift(c));
    const MagnetizationField zero = constant_field(pair->fine, Vec3::Zero());
    CHECK((bn_projection(basis, zero, member, 0.5) - c).cwiseAbs().maxCoeff() <= 1e-10);

    const MagnetizationField mn = interpolate(pair->fine, initial_bump);
    CHECK((bn_projection(basis, mn, member, 0.5) - c).cwiseAbs().maxCoeff() <= 1e-10);
    const Eigen::MatrixXd b = bn_reduced_matrix(basis, mn, 0.5);
    const Eigen::MatrixXd sym = 0.5 * (b + b.transpose());
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym).eigenvalues().minCoeff() > 0.0);
    CHECK((b - b.transpose()).cwiseAbs().maxCoeff() > 0.0);
  }
}
