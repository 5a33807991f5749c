#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lodll/assembly.hpp"
#include "lodll/coefficients.hpp"
#include "lodll/lod.hpp"
#include "lodll/mesh.hpp"
#include "lodll/stepper.hpp"

namespace lodll {

struct ErrorPair {
  double l2 = 0.0;
  double h1 = 0.0;  // full norm (|e|^2 + |grad e|^2)^(1/2)
};

/// Errors against the exact solution at time t.
ErrorPair error_norms(const TriMesh& mesh, const MagnetizationField& numeric,
                      const ExactSolution& truth, double t);
/// Errors between two fields on the same mesh.
ErrorPair error_norms(const TriMesh& mesh, const MagnetizationField& numeric,
                      const MagnetizationField& reference);
/// Scalar variant for elliptic studies.
ErrorPair scalar_error_norms(const TriMesh& mesh, const Eigen::VectorXd& numeric,
                             const std::function<double(double, double)>& u,
                             const std::function<Eigen::Vector2d(double, double)>& grad_u);
ErrorPair scalar_error_norms(const TriMesh& mesh, const Eigen::VectorXd& numeric,
                             const Eigen::VectorXd& reference);

struct ErrorRow {
  double H = 0.0;
  double l2 = 0.0;
  double h1 = 0.0;
  double modulus_dev = 0.0;
};

struct ErrorReport {
  std::vector<ErrorRow> rows;
  std::vector<double> pair_rates_l2;
  std::vector<double> pair_rates_h1;
  double slope_l2 = 0.0;
  double slope_h1 = 0.0;
};

/// Pair rates log(e_i/e_{i+1}) / log(H_i/H_{i+1}) and least-squares slopes of
/// log e against log H.  Needs at least two rows with strictly decreasing H.
ErrorReport convergence_table(std::vector<ErrorRow> rows);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// ||1 - |m|^2||_{L2}.
double modulus_deviation(const TriMesh& mesh, const MagnetizationField& field);

/// P1 evaluation of a field at a point.
Vec3 evaluate(const TriMesh& mesh, const MagnetizationField& field, const Point& p);

/// Nodal interpolant of a coarser nested field onto a finer mesh.
MagnetizationField prolong_field(const TriMesh& from, const MagnetizationField& field,
                                 const TriMesh& to);

enum class CrossAxis { x_fixed, y_fixed };

struct CrossSample {
  double coordinate;
  Vec3 m;
};

struct CrossSection {
  CrossAxis axis = CrossAxis::y_fixed;
  double value = 0.5;
  std::vector<CrossSample> samples;
};

CrossSection cross_section(const TriMesh& mesh, const MagnetizationField& field, CrossAxis axis,
                           double value, std::size_t n_samples);

enum class InitialData { bump, example1, constant_z };

std::string to_string(InitialData d);
InitialData parse_initial_data(const std::string& name);

/// Evaluates the initial magnetization for a descriptor.
Vec3 initial_value(InitialData d, double x, double y);

/// Fine reference run description.
struct ReferenceConfig {
  std::size_t fine_n = 64;
  double tau = 1e-3;
  double final_time = 0.1;
  double alpha = 1.0;
  Scheme scheme = Scheme::cimrak;
  CoefficientField kappa;
  InitialData initial = InitialData::bump;
  bool example1_forcing = false;

  std::size_t num_steps() const;
  /// Canonical text form; the cache key.
  std::string key() const;
};

struct ReferenceResult {
  MagnetizationField field;
  bool cache_hit = false;
};

/// step_fine to the final time, cached under cache_dir (empty path: no cache).
ReferenceResult compute_reference(const ReferenceConfig& cfg, const std::filesystem::path& cache_dir);

/// Number of uncached reference runs performed by this process.
std::size_t reference_runs();

/// Projection of `target` onto [V_LOD]^3 with respect to
///   B(u, v) = alpha (kappa grad u, grad v) - (Mn x kappa grad u, grad v) + alpha (u, v).
Eigen::MatrixX3d bn_projection(const LodBasis& basis, const MagnetizationField& mn,
                               const MagnetizationField& target, double alpha);

/// The reduced B matrix used by bn_projection.
Eigen::MatrixXd bn_reduced_matrix(const LodBasis& basis, const MagnetizationField& mn, double alpha);

/// Energy and modulus observer for run_evolution.
struct EnergyRecord {
  std::size_t step;
  double time;
  double energy;
  double modulus_deviation;
};

Observer energy_observer(const TriMesh& mesh, const ScalarOperator& stiffness,
                         std::vector<EnergyRecord>& out);

}  // namespace lodll
