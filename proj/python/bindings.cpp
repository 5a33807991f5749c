#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lodll/config.hpp"
#include "lodll/error.hpp"
#include "lodll/experiments.hpp"

namespace py = pybind11;
using namespace lodll;

namespace {

ConfigEntries entries_from(const std::map<std::string, std::string>& overrides) {
  return ConfigEntries(overrides.begin(), overrides.end());
}

std::map<std::string, std::string> run(const std::string& preset, const std::map<std::string, std::string>& overrides) {
  const ExperimentConfig cfg = resolve_config(preset, {}, entries_from(overrides));
  std::map<std::string, std::string> out;
  for (const auto& t : run_experiment(cfg)) out[t.name] = t.render();
  return out;
}

Eigen::VectorXd coefficient(const std::string& family, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                            double epsilon, double scale) {
  require(x.size() == y.size(), "coefficient: x and y must have the same length");
  const CoefficientField k{parse_coefficient_family(family), epsilon, scale};
  Eigen::VectorXd out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out(i) = k(x(i), y(i));
  return out;
}

py::dict elliptic(const std::string& family, const std::vector<std::size_t>& coarse, std::size_t fine_n,
                  std::size_t layers) {
  const ErrorReport r = elliptic_convergence_study(CoefficientField{parse_coefficient_family(family)}, coarse, fine_n,
                                                   layers);
  std::vector<double> H, l2, h1;
  for (const auto& row : r.rows) H.push_back(row.H), l2.push_back(row.l2), h1.push_back(row.h1);
  py::dict d;
  d["H"] = H;
  d["l2"] = l2;
  d["h1"] = h1;
  d["slope_l2"] = r.slope_l2;
  d["slope_h1"] = r.slope_h1;
  return d;
}

}  // namespace

PYBIND11_MODULE(_lodll, m) {
  m.doc() = "LOD multiscale solver for the Landau-Lifshitz equation";

  static py::exception<Error> error(m, "LodllError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(error.ptr(), (std::string(to_string(e.kind())) + ": " + e.what()).c_str());
    }
  });

  m.def("presets", &preset_names, "Names of the built-in configuration presets.");
  m.def("config_keys", &config_keys, "Every accepted configuration key.");
  m.def(
      "resolve_config",
      [](const std::string& preset, const std::map<std::string, std::string>& overrides) {
        return to_text(resolve_config(preset, {}, entries_from(overrides)));
      },
      py::arg("preset") = "", py::arg("overrides") = std::map<std::string, std::string>{},
      "Canonical key=value text of a validated configuration.");
  m.def("run_experiment", &run, py::arg("preset") = "", py::arg("overrides") = std::map<std::string, std::string>{},
        py::call_guard<py::gil_scoped_release>(), "Runs an experiment and returns {csv name: csv text}.");
  m.def("coefficient", &coefficient, py::arg("family"), py::arg("x"), py::arg("y"), py::arg("epsilon") = 1.0 / 32.0,
        py::arg("scale") = 1.0, "Evaluates a coefficient family at the given points.");
  m.def("elliptic_convergence", &elliptic, py::arg("family"), py::arg("coarse"), py::arg("fine_n"),
        py::arg("layers") = kGlobalLayers, "Elliptic LOD errors against the fine solution.");
  m.def("loglog_slope", &loglog_slope, py::arg("x"), py::arg("y"), "Least-squares slope of log y against log x.");
  m.def("default_layers", &default_layers, py::arg("coarse_n"));
  m.attr("GLOBAL_LAYERS") = kGlobalLayers;
}
