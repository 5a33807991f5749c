#include "lodll/stepper.hpp"

#include <cmath>

#include <Eigen/LU>

#include "lodll/error.hpp"

namespace lodll {

namespace {

ScalarOperator weighted_gradient_mass(const TriMesh& mesh, const CoefficientField& kappa,
                                      const MagnetizationField& mn) {
  std::vector<double> w = gradient_squared(mesh, mn);
  const std::vector<double> k = element_coefficients(mesh, kappa);
  for (std::size_t e = 0; e < w.size(); ++e) w[e] *= k[e];
  return assemble_mass(mesh, std::span<const double>(w));
}

Eigen::MatrixX3d fine_load(const TriMesh& mesh, const SchemeConfig& cfg, double t) {
  return assemble_load(mesh, [&](double x, double y) { return cfg.forcing(x, y, t); });
}

// Cross block (a, c) = sum_b eps_abc G_b, entered with coefficient -1 on the
// left-hand side.
constexpr struct {
  int row, col, term;
  double sign;
} kCrossLayout[6] = {{1, 2, 0, -1.0}, {2, 1, 0, 1.0}, {0, 2, 1, 1.0},
                     {2, 0, 1, -1.0}, {0, 1, 2, -1.0}, {1, 0, 2, 1.0}};

void check_state(const EvolutionState& s, Representation expected, std::size_t n_sub) {
  if (s.representation != expected) {
    fail(ErrorKind::invalid_argument, "evolution state has the wrong representation for this stepper");
  }
  if (s.field.n_sub != n_sub) {
    fail(ErrorKind::invalid_argument, "evolution state lives on a " + std::to_string(s.field.n_sub) +
                                          "-mesh, stepper mesh is " + std::to_string(n_sub));
  }
}

double next_time(const EvolutionState& s, double tau) {
  return static_cast<double>(s.step_index + 1) * tau;
}

}  // namespace

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::cimrak: return "cimrak";
    case Scheme::gao: return "gao";
    case Scheme::an: return "an";
  }
  return "unknown";
}

Scheme parse_scheme(const std::string& name) {
  if (name == "cimrak") return Scheme::cimrak;
  if (name == "gao") return Scheme::gao;
  if (name == "an") return Scheme::an;
  fail(ErrorKind::config, "unknown scheme '" + name + "' (expected cimrak, gao or an)");
}

void SchemeConfig::validate() const {
  if (!(std::isfinite(alpha) && alpha > 0.0)) {
    fail(ErrorKind::config, "alpha must be positive and finite, got " + std::to_string(alpha));
  }
  if (!(std::isfinite(tau) && tau > 0.0)) {
    fail(ErrorKind::config, "tau must be positive and finite, got " + std::to_string(tau));
  }
}

void normalize_nodes(MagnetizationField& m) {
  for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
    const double r = m.values.row(i).norm();
    if (!(r > 0.0) || !std::isfinite(r)) {
      fail(ErrorKind::numerical, "projection step: nodal modulus at node " + std::to_string(i) +
                                     " is " + std::to_string(r));
    }
    m.values.row(i) /= r;
  }
}

EvolutionState make_fine_state(const MagnetizationField& m0) {
  EvolutionState s;
  s.representation = Representation::fine;
  s.field = m0;
  return s;
}

EvolutionState make_lod_state(const LodBasis& basis, const Eigen::MatrixX3d& coefficients) {
  require(static_cast<std::size_t>(coefficients.rows()) == basis.size(),
          "make_lod_state: coefficient count does not match the basis");
  EvolutionState s;
  s.representation = Representation::lod;
  s.coefficients = coefficients;
  s.field = MagnetizationField(basis.pair->fine, basis.lift(coefficients));
  return s;
}

FineStepper::FineStepper(const TriMesh& mesh, SchemeConfig cfg) : mesh_(mesh), cfg_(std::move(cfg)) {
  cfg_.validate();
  mass_ = assemble_mass(mesh_);
  stiffness_ = assemble_stiffness(mesh_, cfg_.kappa);
  ++counters_.mass;
  ++counters_.stiffness;
}

EvolutionState FineStepper::step(const EvolutionState& state) {
  check_state(state, Representation::fine, mesh_.n_sub());
  const double tau = cfg_.tau;
  const double alpha = cfg_.alpha;
  const MagnetizationField& mn = state.field;

  BlockOperator lhs;
  ScalarOperator diag = (1.0 / tau) * mass_ + alpha * stiffness_;
  ScalarOperator w;
  if (cfg_.scheme != Scheme::an) {
    w = weighted_gradient_mass(mesh_, cfg_.kappa, mn);
    ++counters_.weighted_mass;
  }
  if (cfg_.scheme == Scheme::cimrak) diag -= alpha * w;
  const int d = lhs.add(0, 0, std::move(diag));
  lhs.add_term(1, 1, d, 1.0);
  lhs.add_term(2, 2, d, 1.0);

  auto cross = assemble_cross_terms(mesh_, cfg_.kappa, mn);
  ++counters_.cross;
  int g[3];
  for (int b = 0; b < 3; ++b) g[b] = static_cast<int>(lhs.terms.size()), lhs.terms.push_back(std::move(cross[b]));
  for (const auto& c : kCrossLayout) lhs.add_term(c.row, c.col, g[c.term], -c.sign);

  if (cfg_.scheme == Scheme::an) {
    BlockOperator p = assemble_projection_coupling(mesh_, cfg_.kappa, mn);
    ++counters_.projection;
    const int offset = static_cast<int>(lhs.terms.size());
    for (auto& t : p.terms) lhs.terms.push_back(std::move(t));
    for (const auto& en : p.entries) lhs.add_term(en.row, en.col, offset + en.term, -alpha * en.coeff);
  }

  Eigen::MatrixX3d rhs = (1.0 / tau) * (mass_ * mn.values);
  if (cfg_.scheme == Scheme::gao) rhs += alpha * (w * mn.values);
  const double t1 = next_time(state, tau);
  if (cfg_.forcing) {
    rhs += fine_load(mesh_, cfg_, t1);
    ++counters_.load;
  }

  const SparseMatrix a = lhs.to_sparse();
  if (factored_) {
    solver_.refactor(a);
  } else {
    solver_.compute(a);
    factored_ = true;
  }
  const auto n = static_cast<Eigen::Index>(mesh_.num_nodes());
  const Eigen::VectorXd x = solver_.solve(Eigen::VectorXd(rhs.reshaped()));

  EvolutionState next;
  next.step_index = state.step_index + 1;
  next.time = t1;
  next.representation = Representation::fine;
  next.field = MagnetizationField(mesh_, x.reshaped(n, 3));
  if (cfg_.scheme == Scheme::an) normalize_nodes(next.field);
  if (!next.field.finite()) {
    fail(ErrorKind::numerical, "fine step " + std::to_string(next.step_index) + " produced non-finite values");
  }
  return next;
}

LodStepper::LodStepper(const LodBasis& basis, SchemeConfig cfg) : basis_(basis), cfg_(std::move(cfg)) {
  cfg_.validate();
  const TriMesh& fine = basis_.pair->fine;
  mass_ = assemble_mass(fine);
  stiffness_ = assemble_stiffness(fine, cfg_.kappa);
  ++counters_.mass;
  ++counters_.stiffness;
  reduced_mass_ = reduce_operator(basis_, mass_);
  reduced_stiffness_ = reduce_operator(basis_, stiffness_);
}

Eigen::MatrixXd LodStepper::system_matrix(const MagnetizationField& mn) {
  const TriMesh& fine = basis_.pair->fine;
  const auto nh = static_cast<Eigen::Index>(basis_.size());
  const double alpha = cfg_.alpha;

  Eigen::MatrixXd diag = (1.0 / cfg_.tau) * reduced_mass_ + alpha * reduced_stiffness_;
  if (cfg_.scheme == Scheme::cimrak) {
    diag -= alpha * reduce_operator(basis_, weighted_gradient_mass(fine, cfg_.kappa, mn));
    ++counters_.weighted_mass;
  }
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3 * nh, 3 * nh);
  for (int c = 0; c < 3; ++c) a.block(c * nh, c * nh, nh, nh) = diag;

  const auto cross = assemble_cross_terms(fine, cfg_.kappa, mn);
  ++counters_.cross;
  Eigen::MatrixXd g[3];
  for (int b = 0; b < 3; ++b) g[b] = reduce_operator(basis_, cross[b]);
  for (const auto& c : kCrossLayout) a.block(c.row * nh, c.col * nh, nh, nh) -= c.sign * g[c.term];

  if (cfg_.scheme == Scheme::an) {
    const BlockOperator p = assemble_projection_coupling(fine, cfg_.kappa, mn);
    ++counters_.projection;
    const auto reduced = reduce_terms(basis_, p);
    for (const auto& en : p.entries) {
      a.block(en.row * nh, en.col * nh, nh, nh) -= alpha * en.coeff * reduced[en.term];
    }
  }
  return a;
}

EvolutionState LodStepper::step(const EvolutionState& state) {
  const TriMesh& fine = basis_.pair->fine;
  check_state(state, Representation::lod, fine.n_sub());
  const MagnetizationField& mn = state.field;
  const double tau = cfg_.tau;

  const Eigen::MatrixXd a = system_matrix(mn);

  Eigen::MatrixX3d fine_rhs = (1.0 / tau) * (mass_ * mn.values);
  if (cfg_.scheme == Scheme::gao) {
    fine_rhs += cfg_.alpha * (weighted_gradient_mass(fine, cfg_.kappa, mn) * mn.values);
    ++counters_.weighted_mass;
  }
  const double t1 = next_time(state, tau);
  if (cfg_.forcing) {
    fine_rhs += fine_load(fine, cfg_, t1);
    ++counters_.load;
  }
  const Eigen::MatrixX3d rhs = basis_.columns.transpose() * fine_rhs;

  const auto nh = static_cast<Eigen::Index>(basis_.size());
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const Eigen::VectorXd x = lu.solve(Eigen::VectorXd(rhs.reshaped()));
  if (!x.allFinite()) {
    fail(ErrorKind::numerical, "LOD step " + std::to_string(state.step_index + 1) +
                                   ": reduced system is singular or produced non-finite values");
  }

  EvolutionState next;
  next.step_index = state.step_index + 1;
  next.time = t1;
  next.representation = Representation::lod;
  next.coefficients = x.reshaped(nh, 3);
  next.field = MagnetizationField(fine, basis_.lift(next.coefficients));
  if (cfg_.scheme == Scheme::an) normalize_nodes(next.field);
  return next;
}

EvolutionState step_fine(const EvolutionState& state, const TriMesh& mesh, const SchemeConfig& cfg) {
  FineStepper s(mesh, cfg);
  return s.step(state);
}

EvolutionState step_lod(const EvolutionState& state, const LodBasis& basis, const SchemeConfig& cfg) {
  LodStepper s(basis, cfg);
  return s.step(state);
}

template <typename Stepper>
EvolutionState run_evolution(const EvolutionState& initial, Stepper& stepper, const RunOptions& opts) {
  const std::size_t stride = opts.stride == 0 ? 1 : opts.stride;
  const auto notify = [&](const EvolutionState& s) {
    for (const auto& obs : opts.observers) obs(s);
  };
  EvolutionState state = initial;
  notify(state);
  for (std::size_t k = 0; k < opts.n_steps; ++k) {
    try {
      state = stepper.step(state);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::numerical && std::string(e.what()).find("step") == std::string::npos) {
        fail(e.kind(), "step " + std::to_string(state.step_index + 1) + ": " + e.what());
      }
      throw;
    }
    if ((k + 1) % stride == 0 || k + 1 == opts.n_steps) notify(state);
  }
  return state;
}

template EvolutionState run_evolution<FineStepper>(const EvolutionState&, FineStepper&, const RunOptions&);
template EvolutionState run_evolution<LodStepper>(const EvolutionState&, LodStepper&, const RunOptions&);

}  // namespace lodll
