#include "lodll/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "lodll/error.hpp"

namespace lodll {

namespace {

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& why) {
  fail(ErrorKind::config, "key '" + key + "': " + why + " (got '" + value + "')");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& key, const std::string& value) {
  double v = 0.0;
  const char* first = value.data();
  const char* last = first + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) bad_value(key, value, "expected a finite number");
  return v;
}

std::size_t parse_count(const std::string& key, const std::string& value) {
  std::size_t v = 0;
  const char* first = value.data();
  const char* last = first + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) bad_value(key, value, "expected a non-negative integer");
  return v;
}

std::vector<std::size_t> parse_count_list(const std::string& key, const std::string& value) {
  std::vector<std::size_t> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_count(key, trim(item)));
  if (out.empty()) bad_value(key, value, "expected a comma-separated list of integers");
  return out;
}

bool parse_bool_word(const std::string& key, const std::string& value, const char* yes, const char* no) {
  if (value == yes) return true;
  if (value == no) return false;
  bad_value(key, value, std::string("expected '") + yes + "' or '" + no + "'");
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_list(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

template <typename Parse>
auto wrap(const std::string& key, const std::string& value, Parse&& parse) {
  try {
    return parse(value);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::config && std::string(e.what()).rfind("key '", 0) == 0) throw;
    bad_value(key, value, e.what());
  }
}

struct KeySpec {
  std::string key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

const std::vector<KeySpec>& key_specs() {
  static const std::vector<KeySpec> specs = {
      {"experiment",
       [](ExperimentConfig& c, const std::string& v) {
         c.experiment = wrap("experiment", v, parse_experiment);
         c.experiment_set = true;
       },
       [](const ExperimentConfig& c) { return to_string(c.experiment); }},
      {"coefficient.family",
       [](ExperimentConfig& c, const std::string& v) {
         c.kappa.family = wrap("coefficient.family", v, parse_coefficient_family);
       },
       [](const ExperimentConfig& c) { return to_string(c.kappa.family); }},
      {"coefficient.epsilon",
       [](ExperimentConfig& c, const std::string& v) { c.kappa.epsilon = parse_real("coefficient.epsilon", v); },
       [](const ExperimentConfig& c) { return format_real(c.kappa.epsilon); }},
      {"coefficient.scale",
       [](ExperimentConfig& c, const std::string& v) { c.kappa.scale = parse_real("coefficient.scale", v); },
       [](const ExperimentConfig& c) { return format_real(c.kappa.scale); }},
      {"alpha", [](ExperimentConfig& c, const std::string& v) { c.alpha = parse_real("alpha", v); },
       [](const ExperimentConfig& c) { return format_real(c.alpha); }},
      {"tau", [](ExperimentConfig& c, const std::string& v) { c.tau = parse_real("tau", v); },
       [](const ExperimentConfig& c) { return format_real(c.tau); }},
      {"final_time",
       [](ExperimentConfig& c, const std::string& v) { c.final_time = parse_real("final_time", v); },
       [](const ExperimentConfig& c) { return format_real(c.final_time); }},
      {"mesh.coarse",
       [](ExperimentConfig& c, const std::string& v) { c.coarse = parse_count_list("mesh.coarse", v); },
       [](const ExperimentConfig& c) { return format_list(c.coarse); }},
      {"mesh.fine", [](ExperimentConfig& c, const std::string& v) { c.fine_n = parse_count("mesh.fine", v); },
       [](const ExperimentConfig& c) { return std::to_string(c.fine_n); }},
      {"lod.layers",
       [](ExperimentConfig& c, const std::string& v) {
         if (v == "global") {
           c.layers = kGlobalLayers;
         } else if (v == "auto") {
           c.layers = kAutoLayers;
         } else {
           c.layers = parse_count("lod.layers", v);
           if (c.layers == 0) bad_value("lod.layers", v, "expected 'global', 'auto' or a positive integer");
         }
       },
       [](const ExperimentConfig& c) {
         if (c.layers == kGlobalLayers) return std::string("global");
         if (c.layers == kAutoLayers) return std::string("auto");
         return std::to_string(c.layers);
       }},
      {"lod.layer_list",
       [](ExperimentConfig& c, const std::string& v) { c.layer_list = parse_count_list("lod.layer_list", v); },
       [](const ExperimentConfig& c) { return format_list(c.layer_list); }},
      {"scheme", [](ExperimentConfig& c, const std::string& v) { c.scheme = wrap("scheme", v, parse_scheme); },
       [](const ExperimentConfig& c) { return to_string(c.scheme); }},
      {"initial",
       [](ExperimentConfig& c, const std::string& v) { c.initial = wrap("initial", v, parse_initial_data); },
       [](const ExperimentConfig& c) { return to_string(c.initial); }},
      {"forcing",
       [](ExperimentConfig& c, const std::string& v) {
         c.example1_forcing = parse_bool_word("forcing", v, "example1", "none");
       },
       [](const ExperimentConfig& c) { return std::string(c.example1_forcing ? "example1" : "none"); }},
      {"reference.fine",
       [](ExperimentConfig& c, const std::string& v) { c.reference_n = parse_count("reference.fine", v); },
       [](const ExperimentConfig& c) { return std::to_string(c.reference_n); }},
      {"run.space",
       [](ExperimentConfig& c, const std::string& v) {
         c.run_space = parse_bool_word("run.space", v, "fine", "lod") ? RunSpace::fine : RunSpace::lod;
       },
       [](const ExperimentConfig& c) { return std::string(c.run_space == RunSpace::fine ? "fine" : "lod"); }},
      {"output.stride",
       [](ExperimentConfig& c, const std::string& v) { c.stride = parse_count("output.stride", v); },
       [](const ExperimentConfig& c) { return std::to_string(c.stride); }},
      {"output.samples",
       [](ExperimentConfig& c, const std::string& v) { c.samples = parse_count("output.samples", v); },
       [](const ExperimentConfig& c) { return std::to_string(c.samples); }},
      {"output.section",
       [](ExperimentConfig& c, const std::string& v) { c.section = parse_real("output.section", v); },
       [](const ExperimentConfig& c) { return format_real(c.section); }},
      {"output.dir", [](ExperimentConfig& c, const std::string& v) { c.output_dir = v; },
       [](const ExperimentConfig& c) { return c.output_dir.string(); }},
      {"cache.dir", [](ExperimentConfig& c, const std::string& v) { c.cache_dir = v; },
       [](const ExperimentConfig& c) { return c.cache_dir.string(); }},
  };
  return specs;
}

const std::map<std::string, ConfigEntries>& presets() {
  static const ConfigEntries example1 = {
      {"coefficient.family", "constant"}, {"coefficient.epsilon", "1"}, {"coefficient.scale", "1"},
      {"alpha", "1"}, {"tau", "1e-5"}, {"final_time", "0.5"}, {"mesh.coarse", "2,4,8"},
      {"mesh.fine", "256"}, {"lod.layers", "global"}, {"initial", "example1"}, {"forcing", "example1"},
      {"reference.fine", "0"}};
  static const ConfigEntries quasi = {
      {"coefficient.family", "quasi_periodic"}, {"coefficient.epsilon", "0.03125"}, {"coefficient.scale", "1"},
      {"alpha", "0.01"}, {"tau", "1e-4"}, {"final_time", "0.2"}, {"mesh.coarse", "2,4,8,16"},
      {"mesh.fine", "256"}, {"lod.layers", "global"}, {"initial", "bump"}, {"forcing", "none"},
      {"reference.fine", "0"}};
  static const auto with = [](ConfigEntries base, const ConfigEntries& extra) {
    for (const auto& kv : extra) {
      const auto it = std::find_if(base.begin(), base.end(), [&](const auto& b) { return b.first == kv.first; });
      if (it != base.end()) {
        it->second = kv.second;
      } else {
        base.push_back(kv);
      }
    }
    return base;
  };
  static const std::map<std::string, ConfigEntries> table = {
      {"example1", example1},
      {"example1-desk", with(example1, {{"tau", "1e-4"}, {"final_time", "0.1"}, {"mesh.fine", "128"}})},
      {"example1-low-damping", with(example1, {{"alpha", "0.01"}})},
      {"example1-low-damping-desk",
       with(example1, {{"alpha", "0.01"}, {"tau", "1e-4"}, {"final_time", "0.1"}, {"mesh.fine", "128"}})},
      {"quasi", quasi},
      {"quasi-desk", with(quasi, {{"final_time", "0.02"}})},
      {"locally", with(quasi, {{"coefficient.family", "locally_periodic"}, {"coefficient.epsilon", "0.015625"},
                               {"alpha", "0.1"}, {"tau", "5e-4"}, {"final_time", "0.05"},
                               {"mesh.fine", "512"}})},
      {"locally-desk",
       with(quasi, {{"coefficient.family", "locally_periodic"}, {"coefficient.epsilon", "0.015625"},
                    {"alpha", "0.1"}, {"tau", "5e-4"}, {"final_time", "0.01"}})},
      {"rough", with(quasi, {{"coefficient.family", "rough_int"}, {"mesh.fine", "512"}})},
      {"rough-desk", with(quasi, {{"coefficient.family", "rough_int"}, {"final_time", "0.02"}})},
      {"elliptic-desk",
       {{"coefficient.family", "constant"}, {"coefficient.epsilon", "1"}, {"coefficient.scale", "1"},
        {"mesh.coarse", "2,4,8,16"}, {"mesh.fine", "128"}, {"lod.layers", "global"}}},
      {"decay-desk",
       {{"coefficient.family", "rough_int"}, {"coefficient.epsilon", "1"}, {"coefficient.scale", "1"},
        {"mesh.coarse", "8"}, {"mesh.fine", "64"}, {"lod.layer_list", "1,2,3,4"}}},
  };
  return table;
}

}  // namespace

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::elliptic_convergence: return "elliptic_convergence";
    case Experiment::localization_decay: return "localization_decay";
    case Experiment::ll_convergence: return "ll_convergence";
    case Experiment::ll_run: return "ll_run";
    case Experiment::cross_section: return "cross_section";
  }
  return "unknown";
}

Experiment parse_experiment(const std::string& name) {
  std::string n = name;
  for (auto& ch : n) {
    if (ch == '-') ch = '_';
  }
  for (auto e : {Experiment::elliptic_convergence, Experiment::localization_decay, Experiment::ll_convergence,
                 Experiment::ll_run, Experiment::cross_section}) {
    if (to_string(e) == n) return e;
  }
  fail(ErrorKind::config, "unknown experiment '" + name + "'");
}

std::size_t ExperimentConfig::effective_fine_n() const {
  if (fine_n != 0) return fine_n;
  return coarse.empty() ? 0 : 16 * coarse.back();
}

std::filesystem::path ExperimentConfig::effective_cache_dir() const {
  return cache_dir.empty() ? output_dir / "cache" : cache_dir;
}

std::size_t ExperimentConfig::num_steps() const {
  const double n = std::round(final_time / tau);
  if (!(n >= 1.0) || std::abs(n * tau - final_time) > 1e-9 * final_time) {
    fail(ErrorKind::config, "key 'final_time': " + format_real(final_time) +
                                " is not a positive multiple of tau = " + format_real(tau));
  }
  return static_cast<std::size_t>(n);
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& s : key_specs()) k.push_back(s.key);
    return k;
  }();
  return keys;
}

ConfigEntries parse_config_text(const std::string& text, const std::string& origin) {
  ConfigEntries out;
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorKind::config, origin + ":" + std::to_string(lineno) + ": expected key=value, got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) fail(ErrorKind::config, origin + ":" + std::to_string(lineno) + ": empty key");
    out.emplace_back(key, trim(line.substr(eq + 1)));
  }
  return out;
}

ConfigEntries read_config_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorKind::config, "cannot read config file " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str(), path.string());
}

void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& s : key_specs()) {
    if (s.key == key) {
      s.set(cfg, value);
      return;
    }
  }
  fail(ErrorKind::config, "unknown key '" + key + "'");
}

void apply_entries(ExperimentConfig& cfg, const ConfigEntries& entries) {
  for (const auto& [k, v] : entries) set_config_value(cfg, k, v);
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [name, _] : presets()) out.push_back(name);
  return out;
}

const ConfigEntries& preset_entries(const std::string& name) {
  const auto it = presets().find(name);
  if (it == presets().end()) fail(ErrorKind::config, "unknown preset '" + name + "'");
  return it->second;
}

void apply_preset(ExperimentConfig& cfg, const std::string& name) { apply_entries(cfg, preset_entries(name)); }

void validate(const ExperimentConfig& cfg) {
  const auto reject = [](const std::string& key, const std::string& why) {
    fail(ErrorKind::config, "key '" + key + "': " + why);
  };
  if (!cfg.experiment_set) reject("experiment", "missing required key");
  if (cfg.output_dir.empty()) reject("output.dir", "missing required key");
  if (!(cfg.alpha > 0.0)) reject("alpha", "must be positive, got " + format_real(cfg.alpha));
  if (!(cfg.tau > 0.0)) reject("tau", "must be positive, got " + format_real(cfg.tau));
  if (!(cfg.final_time > 0.0)) reject("final_time", "must be positive, got " + format_real(cfg.final_time));
  if (!(cfg.kappa.epsilon > 0.0)) reject("coefficient.epsilon", "must be positive");
  if (!(cfg.kappa.scale > 0.0)) reject("coefficient.scale", "must be positive");
  if (cfg.coarse.empty()) reject("mesh.coarse", "must not be empty");
  const std::size_t fine_n = cfg.effective_fine_n();
  for (std::size_t i = 0; i < cfg.coarse.size(); ++i) {
    if (cfg.coarse[i] == 0) reject("mesh.coarse", "entries must be positive");
    if (i > 0 && cfg.coarse[i] <= cfg.coarse[i - 1]) {
      reject("mesh.coarse", "H must be strictly decreasing (coarse counts strictly increasing)");
    }
    if (fine_n % cfg.coarse[i] != 0) {
      reject("mesh.coarse", std::to_string(cfg.coarse[i]) + " does not divide mesh.fine = " +
                                std::to_string(fine_n));
    }
  }
  if (cfg.layer_list.empty()) reject("lod.layer_list", "must not be empty");
  if (cfg.effective_reference_n() % fine_n != 0) {
    reject("reference.fine", "must be a multiple of mesh.fine");
  }
  if (cfg.stride == 0) reject("output.stride", "must be positive");
  if (cfg.samples < 2) reject("output.samples", "must be at least 2");
  if (!(cfg.section >= 0.0 && cfg.section <= 1.0)) reject("output.section", "must lie in [0, 1]");
  if (cfg.experiment == Experiment::ll_convergence || cfg.experiment == Experiment::ll_run ||
      cfg.experiment == Experiment::cross_section) {
    (void)cfg.num_steps();
  }
  if (cfg.experiment == Experiment::ll_convergence || cfg.experiment == Experiment::elliptic_convergence) {
    if (cfg.coarse.size() < 2) reject("mesh.coarse", "a convergence study needs at least two coarse meshes");
  }
}

std::string to_text(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& s : key_specs()) out += s.key + "=" + s.get(cfg) + "\n";
  return out;
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  apply_entries(cfg, parse_config_text(text));
  return cfg;
}

ExperimentConfig resolve_config(const std::string& preset, const std::filesystem::path& file,
                                const ConfigEntries& overrides) {
  ExperimentConfig cfg;
  if (!preset.empty()) apply_preset(cfg, preset);
  if (!file.empty()) apply_entries(cfg, read_config_file(file));
  apply_entries(cfg, overrides);
  validate(cfg);
  return cfg;
}

}  // namespace lodll
