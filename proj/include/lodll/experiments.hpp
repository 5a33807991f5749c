#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "lodll/analysis.hpp"
#include "lodll/config.hpp"
#include "lodll/lod.hpp"

namespace lodll {

/// Scientific notation with five significant digits, e.g. 3.0057e-04.
std::string format_number(double v);

struct CsvTable {
  std::string name;  // file name without directory
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
  std::string render() const;
};

/// Manufactured elliptic problem: u = cos(pi x) cos(pi y), source (2 pi^2 + 1) u.
double elliptic_exact(double x, double y);
double elliptic_source(double x, double y);

/// LOD Galerkin solutions of the elliptic source problem compared with the
/// fine P1 solution on the same fine mesh.
ErrorReport elliptic_convergence_study(const CoefficientField& kappa, const std::vector<std::size_t>& coarse,
                                       std::size_t fine_n, std::size_t layers);

struct DecayRow {
  std::size_t layers;
  double max_energy_distance;  // max over basis columns, against the global basis
  double l2_error;             // elliptic solution against the fine solution
  double h1_error;
};

struct DecayStudy {
  std::vector<DecayRow> rows;
  double global_l2 = 0.0;
  double global_h1 = 0.0;
  /// Mean of log(d_l) - log(d_{l+1}) over consecutive rows.
  double mean_log_decrement() const;
};

DecayStudy localization_decay_study(const CoefficientField& kappa, std::size_t coarse_n, std::size_t fine_n,
                                    const std::vector<std::size_t>& layer_list);

SchemeConfig scheme_config(const ExperimentConfig& cfg);

/// LOD coefficients of the initial data: Ritz projection of its fine nodal
/// interpolant with respect to (kappa grad u, grad v) + (u, v).
Eigen::MatrixX3d lod_initial_coefficients(const LodBasis& basis, InitialData initial);

/// Fine field of an LOD run of cfg at final_time.
EvolutionState run_lod(const LodBasis& basis, const ExperimentConfig& cfg, std::vector<EnergyRecord>* records,
                       std::ostream* log = nullptr);
EvolutionState run_fine(const TriMesh& mesh, const ExperimentConfig& cfg, std::vector<EnergyRecord>* records,
                        std::ostream* log = nullptr);

/// Basis for one coarse size; cached under cfg.effective_cache_dir() when
/// `use_cache` is set.
LodBasis lod_basis_for(const ExperimentConfig& cfg, std::size_t coarse_n, bool use_cache);

/// Error table of the LL study: exact truth when cfg uses the manufactured
/// forcing, otherwise a fine reference run.
ErrorReport ll_convergence_study(const ExperimentConfig& cfg, bool use_cache, std::ostream* log = nullptr);

/// Runs the configured experiment and returns its tables without touching
/// the file system apart from caches.
std::vector<CsvTable> run_experiment(const ExperimentConfig& cfg, std::ostream* log = nullptr);

/// Writes the tables plus `<experiment>.config` (the resolved config) to
/// cfg.output_dir.  On failure every file written by this call is removed.
std::vector<std::filesystem::path> write_outputs(const ExperimentConfig& cfg, const std::vector<CsvTable>& tables);

}  // namespace lodll
