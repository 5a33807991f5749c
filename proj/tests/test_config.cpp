#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lodll/config.hpp"
#include "lodll/error.hpp"
#include "lodll/experiments.hpp"

using namespace lodll;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string config_error(const ConfigEntries& overrides) {
  try {
    resolve_config("", {}, overrides);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::config);
    return e.what();
  }
  return {};
}

ConfigEntries base(const std::string& experiment) {
  return {{"experiment", experiment}, {"output.dir", "/tmp/lodll-unused"}};
}

ExperimentConfig tiny(const std::string& experiment, const std::filesystem::path& out) {
  ConfigEntries e = {{"experiment", experiment},  {"output.dir", out.string()}, {"mesh.coarse", "2,4"},
                     {"mesh.fine", "16"},          {"tau", "0.01"},             {"final_time", "0.03"},
                     {"lod.layers", "global"},     {"output.samples", "9"},     {"lod.layer_list", "1,2"}};
  return resolve_config("", {}, e);
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("round trip") {
    ExperimentConfig c = resolve_config("rough-desk", {}, {{"experiment", "ll_run"}, {"output.dir", "/tmp/x y"},
                                                            {"alpha", "0.123456789012345678"}, {"scheme", "gao"}});
    const ExperimentConfig d = parse_config(to_text(c));
    CHECK(to_text(d) == to_text(c));
    CHECK(d.alpha == c.alpha);
    CHECK(d.kappa.family == CoefficientFamily::rough_int);
    CHECK(d.scheme == Scheme::gao);
    CHECK(d.output_dir == c.output_dir);
    for (const auto& name : preset_names()) {
      ExperimentConfig p;
      apply_preset(p, name);
      CHECK(to_text(parse_config(to_text(p))) == to_text(p));
    }
  }

  TEST_CASE("full-scale presets") {
    ExperimentConfig q;
    apply_preset(q, "quasi");
    CHECK(q.fine_n == 256);
    CHECK(q.tau == 1e-4);
    CHECK(q.final_time == 0.2);
    CHECK(q.alpha == 1e-2);
    CHECK(q.kappa.epsilon == 1.0 / 32);
    ExperimentConfig l;
    apply_preset(l, "locally");
    CHECK(l.fine_n == 512);
    CHECK(l.tau == 5e-4);
    CHECK(l.final_time == 5e-2);
    CHECK(l.alpha == 0.1);
    CHECK(l.kappa.family == CoefficientFamily::locally_periodic);
    CHECK(l.kappa.epsilon == 1.0 / 64);
    ExperimentConfig r;
    apply_preset(r, "rough");
    CHECK(r.final_time == 0.2);
    CHECK(r.alpha == 1e-2);
    CHECK(r.kappa.family == CoefficientFamily::rough_int);
    ExperimentConfig e;
    apply_preset(e, "example1");
    CHECK(e.tau == 1e-5);
    CHECK(e.final_time == 0.5);
    CHECK(e.alpha == 1.0);
    CHECK(e.example1_forcing);
    CHECK(e.layers == kGlobalLayers);
    CHECK_THROWS_AS(apply_preset(e, "granite"), Error);
  }

  TEST_CASE("defaults") {
    const ExperimentConfig c = resolve_config("", {}, base("ll_convergence"));
    CHECK(c.effective_fine_n() == 16 * c.coarse.back());
    CHECK(c.layers == kAutoLayers);
    CHECK(resolve_layers(c.layers, 8) == 6);
    CHECK(c.effective_cache_dir() == std::filesystem::path("/tmp/lodll-unused/cache"));
  }

  TEST_CASE("precedence") {
    const auto file = std::filesystem::temp_directory_path() / "lodll-test-precedence.cfg";
    std::ofstream(file) << "# comment\nalpha = 0.5\ntau=2e-4  # trailing\n";
    ConfigEntries o = base("ll_run");
    o.emplace_back("tau", "1e-4");
    const ExperimentConfig c = resolve_config("quasi-desk", file, o);
    CHECK(c.alpha == 0.5);
    CHECK(c.tau == 1e-4);
    CHECK(c.kappa.family == CoefficientFamily::quasi_periodic);
    std::filesystem::remove(file);
  }

  TEST_CASE("errors name the key") {
    auto with = [](ConfigEntries e, std::string k, std::string v) {
      e.emplace_back(std::move(k), std::move(v));
      return e;
    };
    CHECK(config_error(with(base("ll_run"), "alpha", "-1")).find("alpha") != std::string::npos);
    CHECK(config_error(with(base("ll_run"), "tau", "abc")).find("tau") != std::string::npos);
    CHECK(config_error(with(base("ll_run"), "mesh.coars", "2")).find("mesh.coars") != std::string::npos);
    CHECK(config_error(with(base("ll_run"), "mesh.coarse", "4,2")).find("mesh.coarse") != std::string::npos);
    CHECK(config_error(with(with(base("ll_run"), "mesh.coarse", "3"), "mesh.fine", "16")).find("mesh.coarse") !=
          std::string::npos);
    CHECK(config_error(with(base("ll_run"), "lod.layers", "0")).find("lod.layers") != std::string::npos);
    CHECK(config_error(with(base("ll_run"), "final_time", "0.00015")).find("final_time") != std::string::npos);
    CHECK(config_error(with(base("ll_convergence"), "mesh.coarse", "4")).find("mesh.coarse") != std::string::npos);
    CHECK(config_error({{"output.dir", "x"}}).find("experiment") != std::string::npos);
    CHECK(config_error({{"experiment", "ll_run"}}).find("output.dir") != std::string::npos);
    CHECK_THROWS_AS(parse_config_text("alpha 1"), Error);
    CHECK(parse_experiment("cross-section") == Experiment::cross_section);
  }

  TEST_CASE("CSV tables") {
    CHECK(format_number(3.0057e-04) == "3.0057e-04");
    CsvTable t{"t.csv", {"a", "b"}, {}};
    t.add_row({"1", "2"});
    CHECK_THROWS_AS(t.add_row({"1"}), Error);
    CHECK(t.render() == "a,b\n1,2\n");
  }

  TEST_CASE("experiment outputs are byte-deterministic") {
    const auto root = std::filesystem::temp_directory_path() / "lodll-test-outputs";
    std::filesystem::remove_all(root);
    for (const char* exp : {"elliptic_convergence", "localization_decay", "ll_convergence", "ll_run", "cross_section"}) {
      CAPTURE(exp);
      const ExperimentConfig a = tiny(exp, root / "a");
      const ExperimentConfig b = tiny(exp, root / "b");
      const auto fa = write_outputs(a, run_experiment(a));
      const auto fb = write_outputs(b, run_experiment(b));
      REQUIRE(fa.size() == fb.size());
      for (std::size_t i = 0; i < fa.size(); ++i) {
        CHECK(fa[i].filename() == fb[i].filename());
        if (fa[i].extension() == ".csv") CHECK(slurp(fa[i]) == slurp(fb[i]));
      }
    }
    const std::string table = slurp(root / "a" / "ll_convergence.csv");
    CHECK(table.rfind("H,l2_error,h1_error,modulus_deviation,rate_l2,rate_h1\n", 0) == 0);
    const std::string side = slurp(root / "a" / "ll_convergence.config");
    CHECK(to_text(parse_config(side)) == side);
    std::filesystem::remove_all(root);
  }
}
