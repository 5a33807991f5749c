#include "lodll/analysis.hpp"

#include <atomic>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <Eigen/LU>

#include "lodll/cache.hpp"
#include "lodll/error.hpp"

namespace lodll {

namespace {

// Degree-5, 7-point rule on the reference triangle (weights sum to one).
struct QuadPoint {
  double l0, l1, l2, w;
};

constexpr double kA1 = 0.059715871789770;
constexpr double kB1 = 0.470142064105115;
constexpr double kW1 = 0.132394152788506;
constexpr double kA2 = 0.797426985353087;
constexpr double kB2 = 0.101286507323456;
constexpr double kW2 = 0.125939180544827;

constexpr QuadPoint kRule[7] = {
    {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.225},
    {kA1, kB1, kB1, kW1}, {kB1, kA1, kB1, kW1}, {kB1, kB1, kA1, kW1},
    {kA2, kB2, kB2, kW2}, {kB2, kA2, kB2, kW2}, {kB2, kB2, kA2, kW2},
};

void check_mesh(const TriMesh& mesh, std::size_t n_sub, std::size_t rows, const char* who) {
  if (n_sub != mesh.n_sub() || rows != mesh.num_nodes()) {
    fail(ErrorKind::invalid_argument, std::string(who) + ": field lives on a " + std::to_string(n_sub) +
                                          "-mesh, expected " + std::to_string(mesh.n_sub()));
  }
}

Eigen::Matrix<double, 3, 2> element_gradient(const TriMesh& mesh, std::size_t e,
                                             const Eigen::MatrixX3d& v) {
  const auto g = mesh.shape_gradients(e);
  const auto& t = mesh.element(e);
  Eigen::Matrix<double, 3, 2> out = Eigen::Matrix<double, 3, 2>::Zero();
  for (int a = 0; a < 3; ++a) out += v.row(t[a]).transpose() * g[a].transpose();
  return out;
}

std::atomic<std::size_t> g_reference_runs{0};

}  // namespace

ErrorPair error_norms(const TriMesh& mesh, const MagnetizationField& numeric,
                      const ExactSolution& truth, double t) {
  check_mesh(mesh, numeric.n_sub, numeric.num_nodes(), "error_norms");
  double l2 = 0.0;
  double semi = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto& tri = mesh.element(e);
    const double area = mesh.element_area(e);
    const auto grad_h = element_gradient(mesh, e, numeric.values);
    const Point& p0 = mesh.node(tri[0]);
    const Point& p1 = mesh.node(tri[1]);
    const Point& p2 = mesh.node(tri[2]);
    for (const auto& q : kRule) {
      const Point x = q.l0 * p0 + q.l1 * p1 + q.l2 * p2;
      const Vec3 mh = q.l0 * numeric.at(tri[0]) + q.l1 * numeric.at(tri[1]) + q.l2 * numeric.at(tri[2]);
      l2 += q.w * area * (mh - truth.value(x.x(), x.y(), t)).squaredNorm();
      semi += q.w * area * (grad_h - truth.gradient(x.x(), x.y(), t)).squaredNorm();
    }
  }
  return {std::sqrt(l2), std::sqrt(l2 + semi)};
}

ErrorPair error_norms(const TriMesh& mesh, const MagnetizationField& numeric,
                      const MagnetizationField& reference) {
  check_mesh(mesh, numeric.n_sub, numeric.num_nodes(), "error_norms");
  check_mesh(mesh, reference.n_sub, reference.num_nodes(), "error_norms");
  const Eigen::MatrixX3d diff = numeric.values - reference.values;
  double l2 = 0.0;
  double semi = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto& tri = mesh.element(e);
    const double area = mesh.element_area(e);
    for (const auto& q : kRule) {
      const Eigen::RowVector3d d = q.l0 * diff.row(tri[0]) + q.l1 * diff.row(tri[1]) + q.l2 * diff.row(tri[2]);
      l2 += q.w * area * d.squaredNorm();
    }
    semi += area * element_gradient(mesh, e, diff).squaredNorm();
  }
  return {std::sqrt(l2), std::sqrt(l2 + semi)};
}

ErrorPair scalar_error_norms(const TriMesh& mesh, const Eigen::VectorXd& numeric,
                             const std::function<double(double, double)>& u,
                             const std::function<Eigen::Vector2d(double, double)>& grad_u) {
  check_mesh(mesh, mesh.n_sub(), static_cast<std::size_t>(numeric.size()), "scalar_error_norms");
  double l2 = 0.0;
  double semi = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto& tri = mesh.element(e);
    const double area = mesh.element_area(e);
    const auto g = mesh.shape_gradients(e);
    const Point grad_h = numeric[tri[0]] * g[0] + numeric[tri[1]] * g[1] + numeric[tri[2]] * g[2];
    for (const auto& q : kRule) {
      const Point x = q.l0 * mesh.node(tri[0]) + q.l1 * mesh.node(tri[1]) + q.l2 * mesh.node(tri[2]);
      const double uh = q.l0 * numeric[tri[0]] + q.l1 * numeric[tri[1]] + q.l2 * numeric[tri[2]];
      l2 += q.w * area * std::pow(uh - u(x.x(), x.y()), 2);
      semi += q.w * area * (grad_h - grad_u(x.x(), x.y())).squaredNorm();
    }
  }
  return {std::sqrt(l2), std::sqrt(l2 + semi)};
}

ErrorPair scalar_error_norms(const TriMesh& mesh, const Eigen::VectorXd& numeric,
                             const Eigen::VectorXd& reference) {
  Eigen::MatrixX3d a = Eigen::MatrixX3d::Zero(numeric.size(), 3);
  Eigen::MatrixX3d b = Eigen::MatrixX3d::Zero(reference.size(), 3);
  a.col(0) = numeric;
  b.col(0) = reference;
  return error_norms(mesh, MagnetizationField(mesh.n_sub(), a), MagnetizationField(mesh.n_sub(), b));
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, "loglog_slope: need at least two points");
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i] > 0.0 && y[i] > 0.0, "loglog_slope: values must be positive");
  }
  const auto n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ErrorReport convergence_table(std::vector<ErrorRow> rows) {
  require(rows.size() >= 2, "convergence_table: need at least two runs");
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    require(rows[i + 1].H < rows[i].H, "convergence_table: H must be strictly decreasing");
  }
  ErrorReport r;
  std::vector<double> hs, l2, h1;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    hs.push_back(rows[i].H);
    l2.push_back(rows[i].l2);
    h1.push_back(rows[i].h1);
    if (i + 1 < rows.size()) {
      const double lh = std::log(rows[i].H / rows[i + 1].H);
      r.pair_rates_l2.push_back(std::log(rows[i].l2 / rows[i + 1].l2) / lh);
      r.pair_rates_h1.push_back(std::log(rows[i].h1 / rows[i + 1].h1) / lh);
    }
  }
  r.slope_l2 = loglog_slope(hs, l2);
  r.slope_h1 = loglog_slope(hs, h1);
  r.rows = std::move(rows);
  return r;
}

double modulus_deviation(const TriMesh& mesh, const MagnetizationField& field) {
  check_mesh(mesh, field.n_sub, field.num_nodes(), "modulus_deviation");
  double acc = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto& tri = mesh.element(e);
    const double area = mesh.element_area(e);
    for (const auto& q : kRule) {
      const Vec3 m = q.l0 * field.at(tri[0]) + q.l1 * field.at(tri[1]) + q.l2 * field.at(tri[2]);
      acc += q.w * area * std::pow(1.0 - m.squaredNorm(), 2);
    }
  }
  return std::sqrt(acc);
}

Vec3 evaluate(const TriMesh& mesh, const MagnetizationField& field, const Point& p) {
  const auto [e, lam] = mesh.locate(p);
  const auto& tri = mesh.element(static_cast<std::size_t>(e));
  return lam[0] * field.at(tri[0]) + lam[1] * field.at(tri[1]) + lam[2] * field.at(tri[2]);
}

MagnetizationField prolong_field(const TriMesh& from, const MagnetizationField& field,
                                 const TriMesh& to) {
  check_mesh(from, field.n_sub, field.num_nodes(), "prolong_field");
  require(to.n_sub() % from.n_sub() == 0, "prolong_field: meshes are not nested");
  if (to.n_sub() == from.n_sub()) return field;
  return interpolate(to, [&](double x, double y) { return evaluate(from, field, Point(x, y)); });
}

CrossSection cross_section(const TriMesh& mesh, const MagnetizationField& field, CrossAxis axis,
                           double value, std::size_t n_samples) {
  require(value >= 0.0 && value <= 1.0, "cross_section: line position must lie in [0, 1]");
  require(n_samples >= 2, "cross_section: need at least two samples");
  check_mesh(mesh, field.n_sub, field.num_nodes(), "cross_section");
  CrossSection cs;
  cs.axis = axis;
  cs.value = value;
  cs.samples.reserve(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k) {
    const double s = static_cast<double>(k) / static_cast<double>(n_samples - 1);
    const Point p = axis == CrossAxis::y_fixed ? Point(s, value) : Point(value, s);
    cs.samples.push_back({s, evaluate(mesh, field, p)});
  }
  return cs;
}

std::string to_string(InitialData d) {
  switch (d) {
    case InitialData::bump: return "bump";
    case InitialData::example1: return "example1";
    case InitialData::constant_z: return "constant_z";
  }
  return "unknown";
}

InitialData parse_initial_data(const std::string& name) {
  if (name == "bump") return InitialData::bump;
  if (name == "example1") return InitialData::example1;
  if (name == "constant_z") return InitialData::constant_z;
  fail(ErrorKind::config, "unknown initial data '" + name + "' (expected bump, example1 or constant_z)");
}

Vec3 initial_value(InitialData d, double x, double y) {
  switch (d) {
    case InitialData::bump: return initial_bump(x, y);
    case InitialData::example1: return exact_solution_example1().value(x, y, 0.0);
    case InitialData::constant_z: return {0.0, 0.0, 1.0};
  }
  return {0.0, 0.0, 1.0};
}

std::size_t ReferenceConfig::num_steps() const {
  const double n = std::round(final_time / tau);
  if (!(n >= 1.0) || std::abs(n * tau - final_time) > 1e-9 * final_time) {
    fail(ErrorKind::config, "final time " + std::to_string(final_time) +
                                " is not a positive multiple of tau " + std::to_string(tau));
  }
  return static_cast<std::size_t>(n);
}

std::string ReferenceConfig::key() const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "reference;fine_n=" << fine_n << ";tau=" << tau << ";T=" << final_time << ";alpha=" << alpha
     << ";scheme=" << to_string(scheme) << ";kappa=" << to_string(kappa.family)
     << ";epsilon=" << kappa.epsilon << ";scale=" << kappa.scale << ";initial=" << to_string(initial)
     << ";forcing=" << (example1_forcing ? "example1" : "none") << ";";
  return os.str();
}

ReferenceResult compute_reference(const ReferenceConfig& cfg, const std::filesystem::path& cache_dir) {
  const std::string key = cfg.key();
  const TriMesh mesh(cfg.fine_n);
  std::filesystem::path file;
  if (!cache_dir.empty()) {
    file = cache_dir / ("reference-" + cache_stem(key) + ".bin");
    if (auto m = read_matrix_file(file, key)) {
      if (static_cast<std::size_t>(m->rows()) != mesh.num_nodes() || m->cols() != 3) {
        fail(ErrorKind::io, "cache file " + file.string() + " is corrupt: wrong shape");
      }
      return {MagnetizationField(mesh, Eigen::MatrixX3d(*m)), true};
    }
  }
  SchemeConfig sc;
  sc.alpha = cfg.alpha;
  sc.tau = cfg.tau;
  sc.scheme = cfg.scheme;
  sc.kappa = cfg.kappa;
  if (cfg.example1_forcing) {
    const double alpha = cfg.alpha;
    sc.forcing = [alpha](double x, double y, double t) { return forcing_example1(alpha, x, y, t); };
  }
  FineStepper stepper(mesh, sc);
  RunOptions opts;
  opts.n_steps = cfg.num_steps();
  const InitialData init = cfg.initial;
  const auto m0 = interpolate(mesh, [init](double x, double y) { return initial_value(init, x, y); });
  EvolutionState final_state = run_evolution(make_fine_state(m0), stepper, opts);
  ++g_reference_runs;
  if (!file.empty()) write_matrix_file(file, key, final_state.field.values);
  return {std::move(final_state.field), false};
}

std::size_t reference_runs() { return g_reference_runs.load(); }

namespace {

BlockOperator bn_fine_operator(const LodBasis& basis, const MagnetizationField& mn, double alpha) {
  require(alpha > 0.0, "bn_projection: alpha must be positive");
  const TriMesh& fine = basis.pair->fine;
  const CoefficientField& kappa = basis.form.kappa;
  BlockOperator op;
  const int d = op.add(0, 0, alpha * (assemble_stiffness(fine, kappa) + assemble_mass(fine)));
  op.add_term(1, 1, d, 1.0);
  op.add_term(2, 2, d, 1.0);
  const BlockOperator cross = assemble_cross_convection(fine, kappa, mn);
  const int offset = static_cast<int>(op.terms.size());
  for (const auto& t : cross.terms) op.terms.push_back(t);
  for (const auto& en : cross.entries) op.add_term(en.row, en.col, offset + en.term, -en.coeff);
  return op;
}

}  // namespace

Eigen::MatrixXd bn_reduced_matrix(const LodBasis& basis, const MagnetizationField& mn, double alpha) {
  return reduce_operator(basis, bn_fine_operator(basis, mn, alpha));
}

Eigen::MatrixX3d bn_projection(const LodBasis& basis, const MagnetizationField& mn,
                               const MagnetizationField& target, double alpha) {
  const TriMesh& fine = basis.pair->fine;
  check_mesh(fine, mn.n_sub, mn.num_nodes(), "bn_projection");
  check_mesh(fine, target.n_sub, target.num_nodes(), "bn_projection");
  const BlockOperator op = bn_fine_operator(basis, mn, alpha);
  const Eigen::MatrixXd a = reduce_operator(basis, op);
  const Eigen::MatrixX3d rhs = basis.columns.transpose() * op.apply(target.values);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const Eigen::VectorXd x = lu.solve(Eigen::VectorXd(rhs.reshaped()));
  if (!x.allFinite()) fail(ErrorKind::numerical, "bn_projection: reduced matrix is singular");
  return x.reshaped(static_cast<Eigen::Index>(basis.size()), 3);
}

Observer energy_observer(const TriMesh& mesh, const ScalarOperator& stiffness,
                         std::vector<EnergyRecord>& out) {
  return [&mesh, &stiffness, &out](const EvolutionState& s) {
    out.push_back({s.step_index, s.time, ll_energy(stiffness, s.field), modulus_deviation(mesh, s.field)});
  };
}

}  // namespace lodll
