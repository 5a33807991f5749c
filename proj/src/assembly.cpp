#include "lodll/assembly.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>

#include "lodll/error.hpp"

namespace lodll {

namespace {

// CSR sparsity of the P1 adjacency graph plus, for every stored entry, the
// element-local contributions that land on it in increasing element order.
// Summing in that fixed order makes assembly independent of the order in
// which element matrices are computed.
struct P1Pattern {
  SparseMatrix skeleton;
  std::vector<int> slot_begin;
  std::vector<int> contributions;  // e * 9 + a * 3 + b
};

std::shared_ptr<const P1Pattern> build_pattern(const TriMesh& mesh) {
  const auto n = static_cast<Eigen::Index>(mesh.num_nodes());
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(9 * mesh.num_elements());
  for (const auto& t : mesh.elements()) {
    for (int a : t) {
      for (int b : t) trips.emplace_back(a, b, 0.0);
    }
  }
  auto pat = std::make_shared<P1Pattern>();
  pat->skeleton.resize(n, n);
  pat->skeleton.setFromTriplets(trips.begin(), trips.end());
  pat->skeleton.makeCompressed();

  const auto nnz = static_cast<std::size_t>(pat->skeleton.nonZeros());
  const int* outer = pat->skeleton.outerIndexPtr();
  const int* inner = pat->skeleton.innerIndexPtr();
  const auto slot_of = [&](int row, int col) {
    const int* b = inner + outer[row];
    const int* e = inner + outer[row + 1];
    return static_cast<int>(std::lower_bound(b, e, col) - inner);
  };
  std::vector<int> count(nnz, 0);
  std::vector<int> slot_of_contrib(9 * mesh.num_elements());
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto& t = mesh.element(e);
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        const int s = slot_of(t[a], t[b]);
        slot_of_contrib[e * 9 + a * 3 + b] = s;
        ++count[s];
      }
    }
  }
  pat->slot_begin.assign(nnz + 1, 0);
  for (std::size_t s = 0; s < nnz; ++s) pat->slot_begin[s + 1] = pat->slot_begin[s] + count[s];
  pat->contributions.resize(slot_of_contrib.size());
  std::vector<int> fill(pat->slot_begin.begin(), pat->slot_begin.end() - 1);
  for (std::size_t c = 0; c < slot_of_contrib.size(); ++c) {
    pat->contributions[fill[slot_of_contrib[c]]++] = static_cast<int>(c);
  }
  return pat;
}

std::shared_ptr<const P1Pattern> pattern_for(const TriMesh& mesh) {
  static std::mutex mu;
  static std::map<std::size_t, std::shared_ptr<const P1Pattern>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(mesh.n_sub());
  if (it != cache.end()) return it->second;
  auto p = build_pattern(mesh);
  cache.emplace(mesh.n_sub(), p);
  return p;
}

std::vector<int> resolve_order(const TriMesh& mesh, std::span<const int> order) {
  std::vector<int> out;
  if (order.empty()) {
    out.resize(mesh.num_elements());
    std::iota(out.begin(), out.end(), 0);
  } else {
    require(order.size() == mesh.num_elements(),
            "element_order must list every element exactly once");
    out.assign(order.begin(), order.end());
  }
  return out;
}

template <typename LocalFn>
SparseMatrix gather_matrix(const TriMesh& mesh, std::span<const int> element_order,
                           LocalFn&& local) {
  const auto pat = pattern_for(mesh);
  std::vector<double> buf(9 * mesh.num_elements(), 0.0);
  for (int e : resolve_order(mesh, element_order)) {
    local(static_cast<std::size_t>(e), std::span<double, 9>(buf.data() + 9 * e, 9));
  }
  SparseMatrix out = pat->skeleton;
  double* values = out.valuePtr();
  const auto nnz = static_cast<std::size_t>(out.nonZeros());
  for (std::size_t s = 0; s < nnz; ++s) {
    double acc = 0.0;
    for (int k = pat->slot_begin[s]; k < pat->slot_begin[s + 1]; ++k) {
      acc += buf[pat->contributions[k]];
    }
    values[s] = acc;
  }
  return out;
}

void check_field(const TriMesh& mesh, const MagnetizationField& M, const char* who) {
  if (M.n_sub != mesh.n_sub() || M.num_nodes() != mesh.num_nodes()) {
    fail(ErrorKind::invalid_argument, std::string(who) + ": magnetization lives on a " +
                                          std::to_string(M.n_sub) + "-mesh, operator mesh is " +
                                          std::to_string(mesh.n_sub()));
  }
}

// Local consistent mass: area/12 * (1 + delta_ab).
void local_mass(double area, double w, std::span<double, 9> out) {
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) out[a * 3 + b] = w * area / 12.0 * (a == b ? 2.0 : 1.0);
  }
}

void local_stiffness(const TriMesh& mesh, std::size_t e, double w, std::span<double, 9> out) {
  const auto g = mesh.shape_gradients(e);
  const double area = mesh.element_area(e);
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) out[a * 3 + b] = w * area * g[a].dot(g[b]);
  }
}

}  // namespace

MagnetizationField interpolate(const TriMesh& mesh, const std::function<Vec3(double, double)>& f) {
  Eigen::MatrixX3d v(static_cast<Eigen::Index>(mesh.num_nodes()), 3);
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
    const Point& p = mesh.node(i);
    v.row(static_cast<Eigen::Index>(i)) = f(p.x(), p.y()).transpose();
  }
  return {mesh, std::move(v)};
}

MagnetizationField constant_field(const TriMesh& mesh, const Vec3& value) {
  Eigen::MatrixX3d v(static_cast<Eigen::Index>(mesh.num_nodes()), 3);
  v.rowwise() = value.transpose();
  return {mesh, std::move(v)};
}

int BlockOperator::add(int row, int col, ScalarOperator op, double coeff) {
  require(scalar_dim == 0 || static_cast<std::size_t>(op.rows()) == scalar_dim,
          "BlockOperator: block dimension mismatch");
  scalar_dim = static_cast<std::size_t>(op.rows());
  terms.push_back(std::move(op));
  const int t = static_cast<int>(terms.size()) - 1;
  entries.push_back({row, col, t, coeff});
  return t;
}

void BlockOperator::add_term(int row, int col, int term, double coeff) {
  require(term >= 0 && static_cast<std::size_t>(term) < terms.size(),
          "BlockOperator: unknown term index");
  entries.push_back({row, col, term, coeff});
}

SparseMatrix BlockOperator::to_sparse() const {
  const auto n = static_cast<Eigen::Index>(scalar_dim);
  std::vector<Eigen::Triplet<double>> trips;
  for (const auto& en : entries) {
    const ScalarOperator& op = terms[en.term];
    for (Eigen::Index r = 0; r < op.outerSize(); ++r) {
      for (ScalarOperator::InnerIterator it(op, r); it; ++it) {
        trips.emplace_back(static_cast<int>(en.row * n + it.row()),
                           static_cast<int>(en.col * n + it.col()), en.coeff * it.value());
      }
    }
  }
  SparseMatrix out(3 * n, 3 * n);
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

Eigen::MatrixX3d BlockOperator::apply(const Eigen::MatrixX3d& x) const {
  require(static_cast<std::size_t>(x.rows()) == scalar_dim, "BlockOperator::apply: size mismatch");
  Eigen::MatrixX3d y = Eigen::MatrixX3d::Zero(x.rows(), 3);
  for (const auto& en : entries) y.col(en.row) += en.coeff * (terms[en.term] * x.col(en.col));
  return y;
}

ScalarOperator assemble_mass(const TriMesh& mesh, std::optional<std::span<const double>> weight,
                             std::span<const int> element_order) {
  if (weight) {
    if (weight->size() != mesh.num_elements()) {
      fail(ErrorKind::invalid_argument,
           "assemble_mass: weight has " + std::to_string(weight->size()) +
               " entries, mesh has " + std::to_string(mesh.num_elements()) + " elements");
    }
  }
  return gather_matrix(mesh, element_order, [&](std::size_t e, std::span<double, 9> out) {
    local_mass(mesh.element_area(e), weight ? (*weight)[e] : 1.0, out);
  });
}

ScalarOperator assemble_weighted_stiffness(const TriMesh& mesh, std::span<const double> weight,
                                           std::span<const int> element_order) {
  require(weight.size() == mesh.num_elements(),
          "assemble_weighted_stiffness: one weight per element required");
  return gather_matrix(mesh, element_order, [&](std::size_t e, std::span<double, 9> out) {
    local_stiffness(mesh, e, weight[e], out);
  });
}

ScalarOperator assemble_stiffness(const TriMesh& mesh, const CoefficientField& kappa,
                                  std::span<const int> element_order) {
  const auto k = element_coefficients(mesh, kappa);
  return assemble_weighted_stiffness(mesh, k, element_order);
}

std::vector<double> element_coefficients(const TriMesh& mesh, const CoefficientField& kappa) {
  std::vector<double> k(mesh.num_elements());
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const Point c = mesh.barycenter(e);
    k[e] = kappa(c.x(), c.y());
  }
  return k;
}

std::vector<double> gradient_squared(const TriMesh& mesh, const MagnetizationField& M) {
  check_field(mesh, M, "gradient_squared");
  std::vector<double> out(mesh.num_elements());
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto g = mesh.shape_gradients(e);
    const auto& t = mesh.element(e);
    double acc = 0.0;
    for (int c = 0; c < 3; ++c) {
      Point grad = Point::Zero();
      for (int a = 0; a < 3; ++a) grad += M.values(t[a], c) * g[a];
      acc += grad.squaredNorm();
    }
    out[e] = acc;
  }
  return out;
}

std::array<ScalarOperator, 3> assemble_cross_terms(const TriMesh& mesh,
                                                   const CoefficientField& kappa,
                                                   const MagnetizationField& M,
                                                   std::span<const int> element_order) {
  check_field(mesh, M, "assemble_cross_convection");
  const auto k = element_coefficients(mesh, kappa);
  std::array<ScalarOperator, 3> out;
  for (int b = 0; b < 3; ++b) {
    out[b] = gather_matrix(mesh, element_order, [&](std::size_t e, std::span<double, 9> loc) {
      const auto& t = mesh.element(e);
      // M_b averaged over the three edge midpoints.
      double mean = 0.0;
      for (int q = 0; q < 3; ++q) {
        mean += 0.5 * (M.values(t[q], b) + M.values(t[(q + 1) % 3], b));
      }
      mean /= 3.0;
      local_stiffness(mesh, e, k[e] * mean, loc);
    });
  }
  return out;
}

BlockOperator cross_from_terms(std::array<ScalarOperator, 3> terms) {
  BlockOperator op;
  const int g0 = op.add(1, 2, std::move(terms[0]), -1.0);
  op.add_term(2, 1, g0, 1.0);
  const int g1 = op.add(0, 2, std::move(terms[1]), 1.0);
  op.add_term(2, 0, g1, -1.0);
  const int g2 = op.add(0, 1, std::move(terms[2]), -1.0);
  op.add_term(1, 0, g2, 1.0);
  return op;
}

BlockOperator assemble_cross_convection(const TriMesh& mesh, const CoefficientField& kappa,
                                        const MagnetizationField& M,
                                        std::span<const int> element_order) {
  return cross_from_terms(assemble_cross_terms(mesh, kappa, M, element_order));
}

BlockOperator assemble_projection_coupling(const TriMesh& mesh, const CoefficientField& kappa,
                                           const MagnetizationField& M) {
  check_field(mesh, M, "assemble_projection_coupling");
  const auto k = element_coefficients(mesh, kappa);
  BlockOperator op;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      auto term = gather_matrix(mesh, {}, [&](std::size_t e, std::span<double, 9> loc) {
        const auto& t = mesh.element(e);
        const auto g = mesh.shape_gradients(e);
        const double area = mesh.element_area(e);
        Point grad_mb = Point::Zero();
        for (int q = 0; q < 3; ++q) grad_mb += M.values(t[q], b) * g[q];
        const double sum_ma = M.values(t[0], a) + M.values(t[1], a) + M.values(t[2], a);
        for (int i = 0; i < 3; ++i) {
          // int M_a phi_i over the element, exact for P1 M_a
          const double ma_phi = area / 12.0 * (M.values(t[i], a) + sum_ma);
          for (int j = 0; j < 3; ++j) loc[i * 3 + j] = k[e] * ma_phi * grad_mb.dot(g[j]);
        }
      });
      op.add(a, b, std::move(term), 1.0);
    }
  }
  return op;
}

namespace {

template <typename F, typename Out>
void midpoint_load(const TriMesh& mesh, std::span<const int> element_order, int ncomp, F&& f,
                   Out& out) {
  std::vector<double> buf(3 * ncomp * mesh.num_elements(), 0.0);
  for (int e : resolve_order(mesh, element_order)) {
    const auto& t = mesh.element(e);
    const double w = mesh.element_area(e) / 3.0;
    for (int q = 0; q < 3; ++q) {
      // midpoint of edge (q, q+1): phi_q = phi_{q+1} = 1/2, opposite vertex 0
      const int a = q;
      const int b = (q + 1) % 3;
      const Point mid = 0.5 * (mesh.node(t[a]) + mesh.node(t[b]));
      const auto val = f(mid.x(), mid.y());
      for (int c = 0; c < ncomp; ++c) {
        buf[(static_cast<std::size_t>(e) * 3 + a) * ncomp + c] += w * 0.5 * val[c];
        buf[(static_cast<std::size_t>(e) * 3 + b) * ncomp + c] += w * 0.5 * val[c];
      }
    }
  }
  for (std::size_t v = 0; v < mesh.num_nodes(); ++v) {
    for (int e : mesh.node_elements(v)) {
      const auto& t = mesh.element(e);
      const int a = static_cast<int>(std::find(t.begin(), t.end(), static_cast<int>(v)) - t.begin());
      for (int c = 0; c < ncomp; ++c) {
        out(static_cast<Eigen::Index>(v), c) += buf[(static_cast<std::size_t>(e) * 3 + a) * ncomp + c];
      }
    }
  }
}

}  // namespace

Eigen::MatrixX3d assemble_load(const TriMesh& mesh, const std::function<Vec3(double, double)>& f,
                               std::span<const int> element_order) {
  Eigen::MatrixX3d out = Eigen::MatrixX3d::Zero(static_cast<Eigen::Index>(mesh.num_nodes()), 3);
  midpoint_load(mesh, element_order, 3, f, out);
  return out;
}

Eigen::VectorXd assemble_scalar_load(const TriMesh& mesh,
                                     const std::function<double(double, double)>& f) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(mesh.num_nodes()), 1);
  midpoint_load(mesh, {}, 1, [&](double x, double y) { return std::array<double, 1>{f(x, y)}; },
                out);
  return out.col(0);
}

double ll_energy(const ScalarOperator& stiffness, const MagnetizationField& M) {
  require(static_cast<std::size_t>(stiffness.rows()) == M.num_nodes(),
          "ll_energy: stiffness and field sizes differ");
  double e = 0.0;
  for (int c = 0; c < 3; ++c) e += M.values.col(c).dot(stiffness * M.values.col(c));
  return 0.5 * e;
}

double ll_energy(const TriMesh& mesh, const CoefficientField& kappa, const MagnetizationField& M) {
  check_field(mesh, M, "ll_energy");
  return ll_energy(assemble_stiffness(mesh, kappa), M);
}

}  // namespace lodll
