#include "lodll/lod.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>

#include "lodll/cache.hpp"
#include "lodll/error.hpp"
#include "lodll/sparse_solver.hpp"

namespace lodll {

std::size_t default_layers(std::size_t coarse_n) {
  const double l = std::ceil(2.0 * std::log2(static_cast<double>(coarse_n)));
  return std::max<std::size_t>(1, static_cast<std::size_t>(l));
}

CoarseProjector::CoarseProjector(const MeshPair& pair)
    : coarse_mass_(assemble_mass(pair.coarse)), fine_nodes_(pair.fine.num_nodes()) {
  const SparseMatrix fine_mass = assemble_mass(pair.fine);
  mixed_mass_ = SparseMatrix(pair.prolongation.transpose()) * fine_mass;
  factor_.compute(Eigen::SparseMatrix<double>(coarse_mass_));
  if (factor_.info() != Eigen::Success) {
    fail(ErrorKind::numerical, "CoarseProjector: coarse mass factorization failed");
  }
}

Eigen::VectorXd CoarseProjector::project(const Eigen::VectorXd& v_fine) const {
  if (static_cast<std::size_t>(v_fine.size()) != fine_nodes_) {
    fail(ErrorKind::invalid_argument, "project_coarse: fine vector has " +
                                          std::to_string(v_fine.size()) + " entries, expected " +
                                          std::to_string(fine_nodes_));
  }
  return factor_.solve(mixed_mass_ * v_fine);
}

Eigen::MatrixXd CoarseProjector::project(const Eigen::MatrixXd& v_fine) const {
  if (static_cast<std::size_t>(v_fine.rows()) != fine_nodes_) {
    fail(ErrorKind::invalid_argument, "project_coarse: fine block has wrong row count");
  }
  return factor_.solve(Eigen::MatrixXd(mixed_mass_ * v_fine));
}

Eigen::VectorXd project_coarse(const CoarseProjector& projector, const Eigen::VectorXd& v_fine) {
  return projector.project(v_fine);
}

SparseMatrix EllipticForm::assemble(const TriMesh& mesh) const {
  SparseMatrix a = stiffness_scale * assemble_stiffness(mesh, kappa);
  a += mass_scale * assemble_mass(mesh);
  return a;
}

std::string EllipticForm::tag() const {
  std::ostringstream os;
  os.precision(17);
  os << "kappa=" << to_string(kappa.family) << ",eps=" << kappa.epsilon << ",scale=" << kappa.scale
     << ",stiffness=" << stiffness_scale << ",mass=" << mass_scale;
  return os.str();
}

Eigen::MatrixXd LodBasis::corrector_part() const {
  return columns - Eigen::MatrixXd(pair->prolongation);
}

struct CorrectorProblem::Impl {
  const MeshPair* pair = nullptr;
  EllipticForm form;
  std::vector<double> fine_kappa;
  std::vector<int> free_nodes;
  std::vector<int> local_of;  // fine node -> free index or -1
  std::vector<int> constraint_nodes;
  SparseDirectSolver solver{"corrector saddle-point system"};
};

CorrectorProblem::CorrectorProblem(const MeshPair& pair, const EllipticForm& form,
                                   const Patch& patch, const SparseMatrix& fine_operator)
    : impl_(std::make_unique<Impl>()) {
  Impl& s = *impl_;
  s.pair = &pair;
  s.form = form;
  s.fine_kappa = element_coefficients(pair.fine, form.kappa);
  require(!patch.free_fine_nodes.empty(), "CorrectorProblem: patch has no fine degrees of freedom");
  s.free_nodes = patch.free_fine_nodes;
  s.local_of.assign(pair.fine.num_nodes(), -1);
  for (std::size_t k = 0; k < s.free_nodes.size(); ++k) s.local_of[s.free_nodes[k]] = static_cast<int>(k);

  std::vector<char> vmark(pair.coarse.num_nodes(), 0);
  for (int e : patch.coarse_elements) {
    for (int v : pair.coarse.element(e)) vmark[v] = 1;
  }
  for (std::size_t v = 0; v < vmark.size(); ++v) {
    if (vmark[v]) s.constraint_nodes.push_back(static_cast<int>(v));
  }

  // (Lambda_j, phi_k) restricted to patch rows/cols.
  const SparseMatrix fine_mass = assemble_mass(pair.fine);
  const SparseMatrix mixed = SparseMatrix(pair.prolongation.transpose()) * fine_mass;

  const auto nf = static_cast<int>(s.free_nodes.size());
  const auto nc = static_cast<int>(s.constraint_nodes.size());
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(nf) * 7 + static_cast<std::size_t>(nc) * 64);
  for (int k = 0; k < nf; ++k) {
    for (SparseMatrix::InnerIterator it(fine_operator, s.free_nodes[k]); it; ++it) {
      const int c = s.local_of[it.col()];
      if (c >= 0) trips.emplace_back(k, c, it.value());
    }
  }
  for (int j = 0; j < nc; ++j) {
    bool any = false;
    for (SparseMatrix::InnerIterator it(mixed, s.constraint_nodes[j]); it; ++it) {
      const int c = s.local_of[it.col()];
      if (c < 0 || it.value() == 0.0) continue;
      trips.emplace_back(nf + j, c, it.value());
      trips.emplace_back(c, nf + j, it.value());
      any = true;
    }
    if (!any) {
      fail(ErrorKind::numerical,
           "corrector: constraint for coarse node " + std::to_string(s.constraint_nodes[j]) +
               " has no support on the patch of seed element " + std::to_string(patch.seed_element) +
               " (fine mesh too coarse relative to the coarse mesh?)");
    }
  }
  SparseMatrix saddle(nf + nc, nf + nc);
  saddle.setFromTriplets(trips.begin(), trips.end());
  try {
    s.solver.compute(saddle);
  } catch (const Error& e) {
    fail(ErrorKind::numerical, std::string(e.what()) + " [seed element " +
                                   std::to_string(patch.seed_element) + ", " +
                                   std::to_string(nc) + " constraints]");
  }
}

CorrectorProblem::~CorrectorProblem() = default;
CorrectorProblem::CorrectorProblem(CorrectorProblem&&) noexcept = default;

Eigen::MatrixXd CorrectorProblem::element_loads(int seed_element,
                                                const Eigen::MatrixXd& coarse_values) const {
  const Impl& s = *impl_;
  const MeshPair& pair = *s.pair;
  const auto& K = pair.coarse.element(static_cast<std::size_t>(seed_element));
  const auto gK = pair.coarse.shape_gradients(static_cast<std::size_t>(seed_element));
  const Point x0 = pair.coarse.node(K[0]);
  const auto lambda = [&](int a, const Point& p) {
    return (a == 0 ? 1.0 : 0.0) + gK[a].dot(p - x0);
  };
  const auto ncols = coarse_values.cols();
  const auto nf = static_cast<Eigen::Index>(s.free_nodes.size());
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nf + static_cast<Eigen::Index>(s.constraint_nodes.size()), ncols);
  for (int fe : pair.fine_elements_in(static_cast<std::size_t>(seed_element))) {
    const auto& t = pair.fine.element(static_cast<std::size_t>(fe));
    const auto g = pair.fine.shape_gradients(static_cast<std::size_t>(fe));
    const double area = pair.fine.element_area(static_cast<std::size_t>(fe));
    Eigen::Matrix3d local;
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        local(a, b) = s.form.stiffness_scale * s.fine_kappa[fe] * area * g[a].dot(g[b]) +
                      s.form.mass_scale * area / 12.0 * (a == b ? 2.0 : 1.0);
      }
    }
    // coarse function values at the fine element's vertices
    Eigen::Matrix<double, 3, Eigen::Dynamic> vals(3, ncols);
    for (int q = 0; q < 3; ++q) {
      const Point& p = pair.fine.node(t[q]);
      for (Eigen::Index c = 0; c < ncols; ++c) {
        vals(q, c) = coarse_values(0, c) * lambda(0, p) + coarse_values(1, c) * lambda(1, p) +
                     coarse_values(2, c) * lambda(2, p);
      }
    }
    const Eigen::MatrixXd contrib = local * vals;
    for (int a = 0; a < 3; ++a) {
      const int k = s.local_of[t[a]];
      if (k >= 0) rhs.row(k) -= contrib.row(a);
    }
  }
  return rhs;
}

Eigen::VectorXd CorrectorProblem::solve(int seed_element, const Eigen::Vector3d& seed_values) const {
  const Impl& s = *impl_;
  const Eigen::MatrixXd rhs = element_loads(seed_element, Eigen::MatrixXd(seed_values));
  const Eigen::MatrixXd sol = s.solver.solve(rhs);
  Eigen::VectorXd q = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.pair->fine.num_nodes()));
  for (std::size_t k = 0; k < s.free_nodes.size(); ++k) q(s.free_nodes[k]) = sol(static_cast<Eigen::Index>(k), 0);
  return q;
}

Eigen::MatrixXd CorrectorProblem::solve_vertex_hats(int seed_element) const {
  const Impl& s = *impl_;
  const Eigen::MatrixXd rhs = element_loads(seed_element, Eigen::Matrix3d::Identity());
  const Eigen::MatrixXd sol = s.solver.solve(rhs);
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(s.pair->fine.num_nodes()), 3);
  for (std::size_t k = 0; k < s.free_nodes.size(); ++k) {
    q.row(s.free_nodes[k]) = sol.row(static_cast<Eigen::Index>(k));
  }
  return q;
}

Eigen::MatrixXd CorrectorProblem::solve_fine_loads(const Eigen::MatrixXd& loads) const {
  const Impl& s = *impl_;
  require(static_cast<std::size_t>(loads.rows()) == s.pair->fine.num_nodes(),
          "CorrectorProblem: load rows must match the fine mesh");
  const auto nf = static_cast<Eigen::Index>(s.free_nodes.size());
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nf + static_cast<Eigen::Index>(s.constraint_nodes.size()),
                                              loads.cols());
  for (Eigen::Index k = 0; k < nf; ++k) rhs.row(k) = loads.row(s.free_nodes[k]);
  const Eigen::MatrixXd sol = s.solver.solve(rhs);
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(loads.rows(), loads.cols());
  for (Eigen::Index k = 0; k < nf; ++k) q.row(s.free_nodes[k]) = sol.row(k);
  return q;
}

Eigen::VectorXd solve_corrector(const MeshPair& pair, const CoefficientField& kappa,
                                const Patch& patch, const Eigen::Vector3d& seed_values) {
  require(!patch.free_fine_nodes.empty(),
          "solve_corrector: patch must be built from the mesh pair (no fine nodes attached)");
  const EllipticForm form{kappa, 1.0, 1.0};
  const SparseMatrix a = form.assemble(pair.fine);
  const CorrectorProblem prob(pair, form, patch, a);
  return prob.solve(patch.seed_element, seed_values);
}

namespace {

// On the whole-domain patch the element correctors of a coarse hat sum to a
// single global corrector with load -A (P e_i).
Eigen::MatrixXd global_correctors(const MeshPair& pair, const EllipticForm& form,
                                  const SparseMatrix& a) {
  const Patch whole = element_patch(pair, 0, 2 * pair.coarse.n_sub());
  require(whole.covers(pair.coarse.num_elements()), "global patch did not saturate");
  const CorrectorProblem prob(pair, form, whole, a);
  const Eigen::MatrixXd loads = -(a * Eigen::MatrixXd(pair.prolongation));
  return prob.solve_fine_loads(loads);
}

}  // namespace

LodBasis build_lod_basis(std::shared_ptr<const MeshPair> pair, const EllipticForm& form,
                         std::size_t layers) {
  require(pair != nullptr, "build_lod_basis: null mesh pair");
  require(layers >= 1, "build_lod_basis: layers must be at least 1 (or kGlobalLayers)");
  LodBasis basis;
  basis.pair = pair;
  basis.layers = layers;
  basis.form = form;
  basis.columns = Eigen::MatrixXd(pair->prolongation);

  const SparseMatrix a = form.assemble(pair->fine);
  const bool saturated = layers != kGlobalLayers && layers >= 2 * pair->coarse.n_sub();
  if (layers == kGlobalLayers || saturated) {
    basis.columns += global_correctors(*pair, form, a);
    return basis;
  }
  for (std::size_t K = 0; K < pair->coarse.num_elements(); ++K) {
    const Patch patch = element_patch(*pair, static_cast<int>(K), layers);
    Eigen::MatrixXd qk;
    try {
      const CorrectorProblem prob(*pair, form, patch, a);
      qk = prob.solve_vertex_hats(static_cast<int>(K));
    } catch (const Error& e) {
      fail(e.kind(), "build_lod_basis: seed element " + std::to_string(K) + ": " + e.what());
    }
    const auto& t = pair->coarse.element(K);
    for (int v = 0; v < 3; ++v) basis.columns.col(t[v]) += qk.col(v);
  }
  return basis;
}

LodBasis build_lod_basis(std::shared_ptr<const MeshPair> pair, const CoefficientField& kappa,
                         std::size_t layers) {
  return build_lod_basis(std::move(pair), EllipticForm{kappa, 1.0, 1.0}, layers);
}

LodBasis build_lod_basis_cached(std::shared_ptr<const MeshPair> pair, const CoefficientField& kappa,
                                std::size_t layers, const std::filesystem::path& cache_dir,
                                bool* cache_hit) {
  const EllipticForm form{kappa, 1.0, 1.0};
  std::ostringstream key;
  key << "lod-basis;coarse_n=" << pair->coarse.n_sub() << ";fine_n=" << pair->fine.n_sub()
      << ";layers=" << (layers == kGlobalLayers ? std::string("global") : std::to_string(layers))
      << ";" << form.tag();
  const auto path = cache_dir / ("basis-" + cache_stem(key.str()) + ".bin");
  if (auto m = read_matrix_file(path, key.str())) {
    if (cache_hit) *cache_hit = true;
    return LodBasis{std::move(pair), layers, form, std::move(*m)};
  }
  if (cache_hit) *cache_hit = false;
  LodBasis basis = build_lod_basis(std::move(pair), form, layers);
  write_matrix_file(path, key.str(), basis.columns);
  return basis;
}

namespace {

bool exactly_symmetric(const SparseMatrix& m) {
  if (m.rows() != m.cols()) return false;
  const SparseMatrix t = m.transpose();
  if (t.nonZeros() != m.nonZeros()) return false;
  const SparseMatrix d = m - t;
  for (Eigen::Index k = 0; k < d.nonZeros(); ++k) {
    if (d.valuePtr()[k] != 0.0) return false;
  }
  return true;
}

Eigen::MatrixXd congruence(const Eigen::MatrixXd& b, const SparseMatrix& k) {
  const Eigen::MatrixXd kb = k * b;
  if (!exactly_symmetric(k)) return b.transpose() * kb;
  const auto n = b.cols();
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(n, n);
  r.triangularView<Eigen::Lower>() = b.transpose() * kb;
  r.triangularView<Eigen::StrictlyUpper>() = r.transpose();
  return r;
}

}  // namespace

Eigen::MatrixXd reduce_operator(const LodBasis& basis, const SparseMatrix& fine_op) {
  if (static_cast<std::size_t>(fine_op.rows()) != basis.fine_size() ||
      static_cast<std::size_t>(fine_op.cols()) != basis.fine_size()) {
    fail(ErrorKind::invalid_argument, "reduce_operator: operator is " +
                                          std::to_string(fine_op.rows()) + "x" +
                                          std::to_string(fine_op.cols()) + ", basis fine size " +
                                          std::to_string(basis.fine_size()));
  }
  return congruence(basis.columns, fine_op);
}

std::vector<Eigen::MatrixXd> reduce_terms(const LodBasis& basis, const BlockOperator& fine_op) {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(fine_op.terms.size());
  for (const auto& t : fine_op.terms) out.push_back(reduce_operator(basis, t));
  return out;
}

Eigen::MatrixXd combine_reduced(const BlockOperator& layout, const std::vector<Eigen::MatrixXd>& reduced) {
  require(reduced.size() == layout.terms.size(), "combine_reduced: term count mismatch");
  const Eigen::Index n = reduced.empty() ? 0 : reduced.front().rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(3 * n, 3 * n);
  for (const auto& en : layout.entries) {
    out.block(en.row * n, en.col * n, n, n) += en.coeff * reduced[en.term];
  }
  return out;
}

Eigen::MatrixXd reduce_operator(const LodBasis& basis, const BlockOperator& fine_op) {
  return combine_reduced(fine_op, reduce_terms(basis, fine_op));
}

Eigen::VectorXd ritz_project(const LodBasis& basis, const SparseMatrix& bilinear,
                             const Eigen::VectorXd& rhs) {
  require(static_cast<std::size_t>(rhs.size()) == basis.fine_size(),
          "ritz_project: right-hand side must be a fine load vector");
  const Eigen::MatrixXd reduced = reduce_operator(basis, bilinear);
  const Eigen::LLT<Eigen::MatrixXd> llt(reduced);
  if (llt.info() != Eigen::Success) {
    fail(ErrorKind::numerical, "ritz_project: reduced matrix is not symmetric positive definite");
  }
  return llt.solve(basis.columns.transpose() * rhs);
}

Eigen::VectorXd column_energy_distance(const LodBasis& a, const LodBasis& b,
                                       const SparseMatrix& energy) {
  require(a.columns.rows() == b.columns.rows() && a.columns.cols() == b.columns.cols(),
          "column_energy_distance: bases have different shapes");
  const Eigen::MatrixXd d = a.columns - b.columns;
  const Eigen::MatrixXd ad = energy * d;
  Eigen::VectorXd out(d.cols());
  for (Eigen::Index c = 0; c < d.cols(); ++c) out(c) = std::sqrt(std::max(0.0, d.col(c).dot(ad.col(c))));
  return out;
}

}  // namespace lodll
