#include "lodll/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <ostream>

#include "lodll/error.hpp"
#include "lodll/sparse_solver.hpp"

namespace lodll {

namespace {

constexpr double kPi = std::numbers::pi;

std::string fraction(std::size_t n) { return "1/" + std::to_string(n); }

void note(std::ostream* log, const std::string& msg) {
  if (log) *log << msg << std::endl;
}

Eigen::VectorXd fine_elliptic_solution(const SparseMatrix& a, const Eigen::VectorXd& b) {
  SparseDirectSolver solver("fine elliptic solve");
  solver.compute(a);
  return solver.solve(b);
}

void add_rate_columns(CsvTable& t, const ErrorReport& r, bool with_modulus) {
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const auto& row = r.rows[i];
    std::vector<std::string> cells = {format_number(row.H), format_number(row.l2), format_number(row.h1)};
    if (with_modulus) cells.push_back(format_number(row.modulus_dev));
    cells.push_back(i == 0 ? "-" : format_number(r.pair_rates_l2[i - 1]));
    cells.push_back(i == 0 ? "-" : format_number(r.pair_rates_h1[i - 1]));
    t.add_row(std::move(cells));
  }
  std::vector<std::string> footer = {"order", format_number(r.slope_l2), format_number(r.slope_h1)};
  while (footer.size() < t.header.size()) footer.emplace_back("-");
  t.add_row(std::move(footer));
}

CsvTable section_table(const std::string& name, const CrossSection& ref, const CrossSection& fem,
                       const CrossSection& lod) {
  CsvTable t{name,
             {"coordinate", "ref_m1", "ref_m2", "ref_m3", "fem_m1", "fem_m2", "fem_m3", "lod_m1", "lod_m2",
              "lod_m3"},
             {}};
  for (std::size_t k = 0; k < ref.samples.size(); ++k) {
    std::vector<std::string> row = {format_number(ref.samples[k].coordinate)};
    for (const auto* cs : {&ref, &fem, &lod}) {
      for (int c = 0; c < 3; ++c) row.push_back(format_number(cs->samples[k].m[c]));
    }
    t.add_row(std::move(row));
  }
  return t;
}

}  // namespace

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4e", v);
  return buf;
}

void CsvTable::add_row(std::vector<std::string> row) {
  require(row.size() == header.size(), "CsvTable " + name + ": row has " + std::to_string(row.size()) +
                                           " cells, header has " + std::to_string(header.size()));
  rows.push_back(std::move(row));
}

std::string CsvTable::render() const {
  std::string out;
  const auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + cells[i];
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

double elliptic_exact(double x, double y) { return std::cos(kPi * x) * std::cos(kPi * y); }

double elliptic_source(double x, double y) { return (2.0 * kPi * kPi + 1.0) * elliptic_exact(x, y); }

ErrorReport elliptic_convergence_study(const CoefficientField& kappa, const std::vector<std::size_t>& coarse,
                                       std::size_t fine_n, std::size_t layers) {
  const TriMesh fine(fine_n);
  const SparseMatrix a = EllipticForm{kappa}.assemble(fine);
  const Eigen::VectorXd b = assemble_scalar_load(fine, elliptic_source);
  const Eigen::VectorXd u_fine = fine_elliptic_solution(a, b);
  std::vector<ErrorRow> rows;
  for (std::size_t n : coarse) {
    auto pair = std::make_shared<const MeshPair>(make_mesh_pair(n, fine_n));
    const LodBasis basis = build_lod_basis(pair, kappa, resolve_layers(layers, n));
    const Eigen::VectorXd u = basis.lift(ritz_project(basis, a, b));
    const ErrorPair e = scalar_error_norms(fine, u, u_fine);
    rows.push_back({1.0 / static_cast<double>(n), e.l2, e.h1, 0.0});
  }
  return convergence_table(std::move(rows));
}

double DecayStudy::mean_log_decrement() const {
  require(rows.size() >= 2, "mean_log_decrement: need at least two layer counts");
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    acc += std::log(rows[i].max_energy_distance) - std::log(rows[i + 1].max_energy_distance);
  }
  return acc / static_cast<double>(rows.size() - 1);
}

DecayStudy localization_decay_study(const CoefficientField& kappa, std::size_t coarse_n, std::size_t fine_n,
                                    const std::vector<std::size_t>& layer_list) {
  auto pair = std::make_shared<const MeshPair>(make_mesh_pair(coarse_n, fine_n));
  const SparseMatrix a = EllipticForm{kappa}.assemble(pair->fine);
  const Eigen::VectorXd b = assemble_scalar_load(pair->fine, elliptic_source);
  const Eigen::VectorXd u_fine = fine_elliptic_solution(a, b);
  const LodBasis global = build_lod_basis(pair, kappa, kGlobalLayers);

  DecayStudy study;
  const auto solve_error = [&](const LodBasis& basis) {
    return scalar_error_norms(pair->fine, basis.lift(ritz_project(basis, a, b)), u_fine);
  };
  const ErrorPair eg = solve_error(global);
  study.global_l2 = eg.l2;
  study.global_h1 = eg.h1;
  for (std::size_t l : layer_list) {
    const LodBasis local = build_lod_basis(pair, kappa, l);
    const Eigen::VectorXd d = column_energy_distance(local, global, a);
    const ErrorPair e = solve_error(local);
    study.rows.push_back({l, d.maxCoeff(), e.l2, e.h1});
  }
  return study;
}

SchemeConfig scheme_config(const ExperimentConfig& cfg) {
  SchemeConfig sc;
  sc.alpha = cfg.alpha;
  sc.tau = cfg.tau;
  sc.scheme = cfg.scheme;
  sc.kappa = cfg.kappa;
  if (cfg.example1_forcing) {
    const double alpha = cfg.alpha;
    sc.forcing = [alpha](double x, double y, double t) { return forcing_example1(alpha, x, y, t); };
  }
  return sc;
}

Eigen::MatrixX3d lod_initial_coefficients(const LodBasis& basis, InitialData initial) {
  const TriMesh& fine = basis.pair->fine;
  const auto m0 = interpolate(fine, [initial](double x, double y) { return initial_value(initial, x, y); });
  const SparseMatrix a = basis.form.assemble(fine);
  Eigen::MatrixX3d c(static_cast<Eigen::Index>(basis.size()), 3);
  for (int k = 0; k < 3; ++k) c.col(k) = ritz_project(basis, a, a * m0.values.col(k));
  return c;
}

EvolutionState run_lod(const LodBasis& basis, const ExperimentConfig& cfg, std::vector<EnergyRecord>* records,
                       std::ostream* log) {
  LodStepper stepper(basis, scheme_config(cfg));
  RunOptions opts;
  opts.n_steps = cfg.num_steps();
  opts.stride = cfg.stride;
  if (records) opts.observers.push_back(energy_observer(basis.pair->fine, stepper.stiffness(), *records));
  note(log, "  LOD run: H=" + fraction(basis.pair->coarse.n_sub()) + ", " + std::to_string(opts.n_steps) +
                " steps");
  return run_evolution(make_lod_state(basis, lod_initial_coefficients(basis, cfg.initial)), stepper, opts);
}

EvolutionState run_fine(const TriMesh& mesh, const ExperimentConfig& cfg, std::vector<EnergyRecord>* records,
                        std::ostream* log) {
  FineStepper stepper(mesh, scheme_config(cfg));
  RunOptions opts;
  opts.n_steps = cfg.num_steps();
  opts.stride = cfg.stride;
  if (records) opts.observers.push_back(energy_observer(mesh, stepper.stiffness(), *records));
  note(log, "  fine run: h=" + fraction(mesh.n_sub()) + ", " + std::to_string(opts.n_steps) + " steps");
  const InitialData init = cfg.initial;
  const auto m0 = interpolate(mesh, [init](double x, double y) { return initial_value(init, x, y); });
  return run_evolution(make_fine_state(m0), stepper, opts);
}

LodBasis lod_basis_for(const ExperimentConfig& cfg, std::size_t coarse_n, bool use_cache) {
  auto pair = std::make_shared<const MeshPair>(make_mesh_pair(coarse_n, cfg.effective_fine_n()));
  const std::size_t layers = resolve_layers(cfg.layers, coarse_n);
  if (use_cache) return build_lod_basis_cached(pair, cfg.kappa, layers, cfg.effective_cache_dir());
  return build_lod_basis(pair, cfg.kappa, layers);
}

namespace {

ReferenceConfig reference_config(const ExperimentConfig& cfg) {
  ReferenceConfig rc;
  rc.fine_n = cfg.effective_reference_n();
  rc.tau = cfg.tau;
  rc.final_time = cfg.final_time;
  rc.alpha = cfg.alpha;
  rc.scheme = cfg.scheme;
  rc.kappa = cfg.kappa;
  rc.initial = cfg.initial;
  rc.example1_forcing = cfg.example1_forcing;
  return rc;
}

}  // namespace

ErrorReport ll_convergence_study(const ExperimentConfig& cfg, bool use_cache, std::ostream* log) {
  std::optional<TriMesh> ref_mesh;
  std::optional<MagnetizationField> reference;
  if (!cfg.example1_forcing) {
    note(log, "reference run on h=" + fraction(cfg.effective_reference_n()));
    ReferenceResult r = compute_reference(reference_config(cfg), use_cache ? cfg.effective_cache_dir() : "");
    note(log, r.cache_hit ? "  reference loaded from cache" : "  reference computed");
    ref_mesh.emplace(cfg.effective_reference_n());
    reference = std::move(r.field);
  }
  std::vector<ErrorRow> rows;
  for (std::size_t n : cfg.coarse) {
    note(log, "coarse H=" + fraction(n));
    const LodBasis basis = lod_basis_for(cfg, n, use_cache);
    const EvolutionState s = run_lod(basis, cfg, nullptr, log);
    const TriMesh& fine = basis.pair->fine;
    ErrorRow row{1.0 / static_cast<double>(n), 0.0, 0.0, modulus_deviation(fine, s.field)};
    if (reference) {
      const ErrorPair e = error_norms(*ref_mesh, prolong_field(fine, s.field, *ref_mesh), *reference);
      row.l2 = e.l2;
      row.h1 = e.h1;
    } else {
      const ErrorPair e = error_norms(fine, s.field, exact_solution_example1(), s.time);
      row.l2 = e.l2;
      row.h1 = e.h1;
    }
    note(log, "  L2 " + format_number(row.l2) + "  H1 " + format_number(row.h1));
    rows.push_back(row);
  }
  return convergence_table(std::move(rows));
}

std::vector<CsvTable> run_experiment(const ExperimentConfig& cfg, std::ostream* log) {
  validate(cfg);
  std::vector<CsvTable> tables;
  try {
    switch (cfg.experiment) {
      case Experiment::elliptic_convergence: {
        const ErrorReport r = elliptic_convergence_study(cfg.kappa, cfg.coarse, cfg.effective_fine_n(), cfg.layers);
        CsvTable t{"elliptic_convergence.csv", {"H", "l2_error", "h1_error", "rate_l2", "rate_h1"}, {}};
        add_rate_columns(t, r, false);
        tables.push_back(std::move(t));
        break;
      }
      case Experiment::localization_decay: {
        const DecayStudy d = localization_decay_study(cfg.kappa, cfg.coarse.front(), cfg.effective_fine_n(), cfg.layer_list);
        CsvTable t{"localization_decay.csv", {"layers", "max_energy_distance", "l2_error", "h1_error"}, {}};
        for (const auto& row : d.rows) {
          t.add_row({std::to_string(row.layers), format_number(row.max_energy_distance), format_number(row.l2_error),
                     format_number(row.h1_error)});
        }
        t.add_row({"global", format_number(0.0), format_number(d.global_l2), format_number(d.global_h1)});
        tables.push_back(std::move(t));
        break;
      }
      case Experiment::ll_convergence: {
        const ErrorReport r = ll_convergence_study(cfg, true, log);
        CsvTable t{"ll_convergence.csv",
                   {"H", "l2_error", "h1_error", "modulus_deviation", "rate_l2", "rate_h1"},
                   {}};
        add_rate_columns(t, r, true);
        tables.push_back(std::move(t));
        break;
      }
      case Experiment::ll_run: {
        std::vector<EnergyRecord> records;
        if (cfg.run_space == RunSpace::fine) {
          run_fine(TriMesh(cfg.effective_fine_n()), cfg, &records, log);
        } else {
          run_lod(lod_basis_for(cfg, cfg.coarse.back(), true), cfg, &records, log);
        }
        CsvTable t{"ll_run.csv", {"step", "time", "energy", "modulus_deviation"}, {}};
        for (const auto& r : records) {
          t.add_row({std::to_string(r.step), format_number(r.time), format_number(r.energy),
                     format_number(r.modulus_deviation)});
        }
        tables.push_back(std::move(t));
        break;
      }
      case Experiment::cross_section: {
        const std::size_t nh = cfg.coarse.back();
        ReferenceResult ref = compute_reference(reference_config(cfg), cfg.effective_cache_dir());
        const TriMesh ref_mesh(cfg.effective_reference_n());
        const TriMesh coarse_mesh(nh);
        note(log, "standard P1 run on the coarse mesh");
        const EvolutionState fem = run_fine(coarse_mesh, cfg, nullptr, log);
        const LodBasis basis = lod_basis_for(cfg, nh, true);
        const EvolutionState lod = run_lod(basis, cfg, nullptr, log);
        const TriMesh& fine = basis.pair->fine;
        for (auto axis : {CrossAxis::y_fixed, CrossAxis::x_fixed}) {
          const std::string name = axis == CrossAxis::y_fixed ? "cross_section_y.csv" : "cross_section_x.csv";
          tables.push_back(section_table(name, cross_section(ref_mesh, ref.field, axis, cfg.section, cfg.samples),
                                         cross_section(coarse_mesh, fem.field, axis, cfg.section, cfg.samples),
                                         cross_section(fine, lod.field, axis, cfg.section, cfg.samples)));
        }
        CsvTable grid{"field_grid.csv", {"x", "y", "kappa", "ref_m1", "fem_m1", "lod_m1"}, {}};
        const std::size_t n = cfg.samples;
        for (std::size_t j = 0; j < n; ++j) {
          for (std::size_t i = 0; i < n; ++i) {
            const Point p(static_cast<double>(i) / static_cast<double>(n - 1),
                          static_cast<double>(j) / static_cast<double>(n - 1));
            grid.add_row({format_number(p.x()), format_number(p.y()), format_number(cfg.kappa(p.x(), p.y())),
                          format_number(evaluate(ref_mesh, ref.field, p)[0]),
                          format_number(evaluate(coarse_mesh, fem.field, p)[0]),
                          format_number(evaluate(fine, lod.field, p)[0])});
          }
        }
        tables.push_back(std::move(grid));
        break;
      }
    }
  } catch (const Error& e) {
    fail(e.kind(), "experiment " + to_string(cfg.experiment) + ": " + e.what());
  }
  return tables;
}

std::vector<std::filesystem::path> write_outputs(const ExperimentConfig& cfg, const std::vector<CsvTable>& tables) {
  namespace fs = std::filesystem;
  std::vector<fs::path> written;
  const auto write_file = [&](const fs::path& path, const std::string& text) {
    const fs::path tmp = path.string() + ".tmp";
    {
      std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
      if (!os) fail(ErrorKind::io, "cannot open " + tmp.string() + " for writing");
      os << text;
      if (!os) fail(ErrorKind::io, "write to " + tmp.string() + " failed");
    }
    fs::rename(tmp, path);
    written.push_back(path);
  };
  try {
    fs::create_directories(cfg.output_dir);
    for (const auto& t : tables) write_file(cfg.output_dir / t.name, t.render());
    write_file(cfg.output_dir / (to_string(cfg.experiment) + ".config"), to_text(cfg));
  } catch (...) {
    std::error_code ec;
    for (const auto& p : written) fs::remove(p, ec);
    for (const auto& t : tables) fs::remove(cfg.output_dir / (t.name + ".tmp"), ec);
    throw;
  }
  return written;
}

}  // namespace lodll
