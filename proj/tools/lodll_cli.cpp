#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lodll/config.hpp"
#include "lodll/error.hpp"
#include "lodll/experiments.hpp"

namespace {

struct Options {
  std::string config;
  std::string preset;
  std::string out;
  std::string layers;
  std::string fine_n;
  std::string scheme;
  std::vector<std::string> sets;
  bool quiet = false;
};

int exit_code(lodll::ErrorKind k) {
  switch (k) {
    case lodll::ErrorKind::config: return 2;
    case lodll::ErrorKind::invalid_argument: return 2;
    case lodll::ErrorKind::numerical: return 3;
    case lodll::ErrorKind::io: return 4;
  }
  return 1;
}

lodll::ConfigEntries overrides(const std::string& experiment, const Options& o) {
  lodll::ConfigEntries e;
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) lodll::fail(lodll::ErrorKind::config, "--set expects key=value, got '" + s + "'");
    e.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  e.emplace_back("experiment", experiment);
  if (!o.out.empty()) e.emplace_back("output.dir", o.out);
  if (!o.layers.empty()) e.emplace_back("lod.layers", o.layers);
  if (!o.fine_n.empty()) e.emplace_back("mesh.fine", o.fine_n);
  if (!o.scheme.empty()) e.emplace_back("scheme", o.scheme);
  return e;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LOD discretization of the Landau-Lifshitz equation: experiment driver"};
  app.require_subcommand(1);
  Options opts;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"elliptic-convergence", "LOD convergence for a manufactured elliptic problem"},
      {"localization-decay", "corrector localization error against patch layers"},
      {"ll-convergence", "Landau-Lifshitz error table over coarse meshes"},
      {"ll-run", "single Landau-Lifshitz run with energy and modulus history"},
      {"cross-section", "cross-sections of reference, coarse P1 and LOD solutions"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opts.config, "key=value config file");
    sub->add_option("--preset", opts.preset, "named parameter preset");
    sub->add_option("--out", opts.out, "output directory");
    sub->add_option("--layers", opts.layers, "oversampling layers, 'auto' or 'global'");
    sub->add_option("--fine-n", opts.fine_n, "fine mesh subdivisions");
    sub->add_option("--scheme", opts.scheme, "cimrak, gao or an");
    sub->add_option("--set", opts.sets, "extra key=value override (repeatable)");
    sub->add_flag("--quiet", opts.quiet, "suppress progress output");
  }
  auto* list = app.add_subcommand("presets", "list preset names and their settings");
  auto* keys = app.add_subcommand("keys", "list accepted config keys");

  CLI11_PARSE(app, argc, argv);

  try {
    if (list->parsed()) {
      for (const auto& name : lodll::preset_names()) {
        std::cout << "[" << name << "]\n";
        for (const auto& [k, v] : lodll::preset_entries(name)) std::cout << "  " << k << "=" << v << "\n";
      }
      return 0;
    }
    if (keys->parsed()) {
      for (const auto& k : lodll::config_keys()) std::cout << k << "\n";
      return 0;
    }
    std::string experiment;
    for (const auto& [name, _] : commands) {
      if (app.got_subcommand(name)) experiment = name;
    }
    const lodll::ExperimentConfig cfg =
        lodll::resolve_config(opts.preset, opts.config, overrides(experiment, opts));
    const auto tables = lodll::run_experiment(cfg, opts.quiet ? nullptr : &std::cerr);
    for (const auto& p : lodll::write_outputs(cfg, tables)) {
      if (!opts.quiet) std::cerr << "wrote " << p.string() << "\n";
    }
  } catch (const lodll::Error& e) {
    std::cerr << "error[" << lodll::to_string(e.kind()) << "]: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error[internal]: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
