#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lodll/assembly.hpp"
#include "lodll/lod.hpp"
#include "lodll/sparse_solver.hpp"

namespace lodll {

enum class Scheme { cimrak, gao, an };

std::string to_string(Scheme s);
Scheme parse_scheme(const std::string& name);

using Forcing = std::function<Vec3(double x, double y, double t)>;

struct SchemeConfig {
  double alpha = 1.0;
  double tau = 1e-3;
  Scheme scheme = Scheme::cimrak;
  Forcing forcing;  // empty means no forcing
  CoefficientField kappa;

  void validate() const;
};

enum class Representation { fine, lod };

/// Magnetization at t_n = n tau.  For the LOD representation `coefficients`
/// holds the reduced unknowns (one row per coarse node) and `field` their fine
/// realization; for the projection scheme `field` is the renormalized one.
struct EvolutionState {
  std::size_t step_index = 0;
  double time = 0.0;
  Representation representation = Representation::fine;
  MagnetizationField field;
  Eigen::MatrixX3d coefficients;
};

EvolutionState make_fine_state(const MagnetizationField& m0);
EvolutionState make_lod_state(const LodBasis& basis, const Eigen::MatrixX3d& coefficients);

/// Counts of fine operator assemblies, for checking which blocks are reused.
struct AssemblyCounters {
  std::size_t mass = 0;
  std::size_t stiffness = 0;
  std::size_t cross = 0;
  std::size_t weighted_mass = 0;
  std::size_t projection = 0;
  std::size_t load = 0;
};

/// Linearized backward Euler on the fine P1 space.
class FineStepper {
 public:
  FineStepper(const TriMesh& mesh, SchemeConfig cfg);

  EvolutionState step(const EvolutionState& state);

  const AssemblyCounters& counters() const { return counters_; }
  const SchemeConfig& config() const { return cfg_; }
  const ScalarOperator& stiffness() const { return stiffness_; }

 private:
  const TriMesh& mesh_;
  SchemeConfig cfg_;
  ScalarOperator mass_;
  ScalarOperator stiffness_;
  SparseDirectSolver solver_{"fine backward Euler system"};
  bool factored_ = false;
  AssemblyCounters counters_;
};

/// The same scheme posed over the LOD space [V_LOD]^3.
class LodStepper {
 public:
  LodStepper(const LodBasis& basis, SchemeConfig cfg);

  EvolutionState step(const EvolutionState& state);

  /// Dense reduced system matrix for the given fine magnetization.
  Eigen::MatrixXd system_matrix(const MagnetizationField& mn);

  const AssemblyCounters& counters() const { return counters_; }
  const SchemeConfig& config() const { return cfg_; }
  const ScalarOperator& stiffness() const { return stiffness_; }
  const LodBasis& basis() const { return basis_; }

 private:
  const LodBasis& basis_;
  SchemeConfig cfg_;
  ScalarOperator mass_;
  ScalarOperator stiffness_;
  Eigen::MatrixXd reduced_mass_;
  Eigen::MatrixXd reduced_stiffness_;
  AssemblyCounters counters_;
};

EvolutionState step_fine(const EvolutionState& state, const TriMesh& mesh, const SchemeConfig& cfg);
EvolutionState step_lod(const EvolutionState& state, const LodBasis& basis, const SchemeConfig& cfg);

using Observer = std::function<void(const EvolutionState&)>;

struct RunOptions {
  std::size_t n_steps = 1;
  std::size_t stride = 1;  // observers see steps 0, stride, 2 stride, ..., and the last
  std::vector<Observer> observers;
};

/// Sequential time loop.  `step` is a FineStepper or LodStepper.
template <typename Stepper>
EvolutionState run_evolution(const EvolutionState& initial, Stepper& stepper, const RunOptions& opts);

/// Node-wise m / |m|; throws if some nodal modulus is zero.
void normalize_nodes(MagnetizationField& m);

}  // namespace lodll
