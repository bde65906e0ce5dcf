// degentrace: command-line front end for the trace-formula checks.

#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "degentrace/acceptance.hpp"
#include "degentrace/config.hpp"
#include "degentrace/runner.hpp"

using namespace degentrace;

namespace {

// Named models usable with --model.
const std::map<std::string, json>& builtin_models() {
  static const std::map<std::string, json> m{
      {"osc2", {{"kind", "osc_power"}, {"n", 1}, {"power", 2}}},
      {"osc3", {{"kind", "osc_power"}, {"n", 1}, {"power", 3}}},
      {"osc2n2", {{"kind", "osc_power"}, {"n", 2}, {"power", 2}}},
      {"osc2max", {{"kind", "osc_power"}, {"n", 1}, {"power", 2}, {"sign", -1}}},
      {"osc2shift", {{"kind", "osc_power"}, {"n", 1}, {"power", 2}, {"p1_shift", 0.3}}},
      {"x4xi4",
       {{"kind", "poly"},
        {"symbol",
         {{"n", 1},
          {"Ec", 0.0},
          {"p1", 0.0},
          {"components",
           {{{"degree", 4}, {"terms", {{{"alpha", {4, 0}}, {"c", 1.0}}, {{"alpha", {0, 4}}, {"c", 1.0}}}}}}}}}}},
  };
  return m;
}

struct Common {
  std::string model = "osc2";
  std::string model_file;
  double T = 1.0;
  double shift = 0.0;
  std::string tf_kind = "fejer";
  double eps = 0.5;
  std::string csv;
  std::string json_out;
  std::string plot;
  int threads = 0;
};

json model_json(const Common& c) {
  if (!c.model_file.empty()) {
    std::ifstream in(c.model_file);
    if (!in) throw ConfigError("cannot read model file " + c.model_file);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw ConfigError("model file is not valid JSON: " + std::string(e.what()));
    }
    return j;
  }
  auto it = builtin_models().find(c.model);
  if (it == builtin_models().end()) throw ConfigError("unknown model \"" + c.model + "\"");
  return it->second;
}

json base_config(const std::string& command, const Common& c) {
  json j{{"command", command},
         {"model", model_json(c)},
         {"test_function", {{"kind", c.tf_kind}, {"T", c.T}, {"shift", c.shift}}},
         {"eps", c.eps},
         {"threads", c.threads}};
  j["output"] = {{"csv", c.csv}, {"json", c.json_out}, {"plot", c.plot}};
  return j;
}

// Prints artifacts that were not routed to files.
void emit(const ScenarioConfig& cfg, const Artifacts& a) {
  if (cfg.csv_path.empty()) std::cout << a.csv;
  if (cfg.json_path.empty()) std::cerr << a.summary.dump(2) << "\n";
}

int run_config(const json& j, const std::filesystem::path& base = {}) {
  const auto cfg = config_from_json(j, base);
  emit(cfg, run_scenario(cfg));
  return kExitOk;
}

void add_common(CLI::App* sub, Common& c, bool with_tf = true) {
  sub->add_option("--model", c.model, "built-in model: osc2, osc3, osc2n2, osc2max, osc2shift, x4xi4");
  sub->add_option("--model-file", c.model_file, "model JSON ({\"kind\":...})");
  sub->add_option("--eps", c.eps, "half-width of the energy window");
  if (with_tf) {
    sub->add_option("--T", c.T, "support radius of the test function transform");
    sub->add_option("--shift", c.shift, "evaluate with phi(t - shift)");
    sub->add_option("--phi", c.tf_kind, "test function: fejer or bump");
  }
  sub->add_option("--out", c.csv, "CSV output path (stdout when omitted)");
  sub->add_option("--json", c.json_out, "JSON summary path (stderr when omitted)");
  sub->add_option("--plot", c.plot, "gnuplot script path (needs --out)");
  sub->add_option("--threads", c.threads, "worker threads (0: DEGENTRACE_THREADS or all cores)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semiclassical trace checks at a totally degenerate critical level"};
  app.set_help_flag("--help", "print this help message and exit");
  app.require_subcommand(1);
  Common common;

  std::string config_path;
  auto* run = app.add_subcommand("run", "execute a scenario config");
  run->add_option("config", config_path, "config JSON")->required();

  std::vector<double> spec_h{1e-3};
  int fixed_n = 0;
  auto* spec = app.add_subcommand("spectrum", "eigenvalues in the window");
  add_common(spec, common, false);
  spec->add_option("--h,--hs", spec_h, "semiclassical parameter(s)");
  spec->add_option("--N", fixed_n, "fixed basis size (auto when omitted)");

  std::vector<double> gamma_h{1e-3};
  auto* gamma = app.add_subcommand("gamma", "spectral sum at the given h values");
  add_common(gamma, common);
  gamma->add_option("--h,--hs", gamma_h, "semiclassical parameter(s), decreasing");

  auto* predict = app.add_subcommand("predict", "leading coefficient and exponent");
  add_common(predict, common);

  double hmax = 1e-2, hmin = 1e-5;
  int points = 9;
  auto* fit = app.add_subcommand("fit", "trace run over a log h grid with power-law fit");
  add_common(fit, common);
  fit->add_option("--hmax", hmax, "largest h");
  fit->add_option("--hmin", hmin, "smallest h");
  fit->add_option("--points", points, "grid points");

  OscintSpec osc;
  std::string osc_sign = "plus";
  std::string osc_csv, osc_json, osc_plot;
  auto* oscint = app.add_subcommand("oscint-check", "expansion versus brute force for the reference amplitude");
  oscint->add_option("--k", osc.k, "phase exponent");
  oscint->add_option("--lmin", osc.lmin, "smallest lambda");
  oscint->add_option("--lmax", osc.lmax, "largest lambda");
  oscint->add_option("--points", osc.points, "lambda points");
  oscint->add_option("--terms", osc.terms, "truncation N");
  oscint->add_option("--sign", osc_sign, "plus or minus");
  oscint->add_flag("!--no-taper", osc.taper, "drop the -r^4 taper term");
  oscint->add_option("--out", osc_csv, "CSV output path");
  oscint->add_option("--json", osc_json, "JSON summary path");
  oscint->add_option("--plot", osc_plot, "gnuplot script path (needs --out)");

  FlowSpec flow;
  auto* flowc = app.add_subcommand("flow-check", "flow-jet and generating-function checks");
  add_common(flowc, common, false);
  flowc->add_option("--order", flow.order, "jet order of the generating function");
  flowc->add_option("--t", flow.t, "time at which jets are serialized");
  flowc->add_option("--t-grid", flow.t_grid, "times checked");

  auto* accept = app.add_subcommand("accept", "run the acceptance suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) {
      json j;
      std::ifstream in(config_path);
      if (!in) throw ConfigError("cannot read config " + config_path);
      try {
        in >> j;
      } catch (const json::exception& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
      }
      return run_config(j, std::filesystem::path(config_path).parent_path());
    }
    if (*spec) {
      json j = base_config("spectrum", common);
      j["h_grid"] = {{"values", spec_h}};
      if (fixed_n > 0) j["basis"] = {{"fixed", fixed_n}};
      return run_config(j);
    }
    if (*gamma) {
      json j = base_config("gamma", common);
      j["h_grid"] = {{"values", gamma_h}};
      return run_config(j);
    }
    if (*predict) return run_config(base_config("predict", common));
    if (*fit) {
      json j = base_config("fit", common);
      j["h_grid"] = {{"start", hmax}, {"stop", hmin}, {"points", points}, {"log", true}};
      return run_config(j);
    }
    if (*oscint) {
      json j{{"command", "oscint-check"},
             {"oscint",
              {{"k", osc.k},
               {"lmin", osc.lmin},
               {"lmax", osc.lmax},
               {"points", osc.points},
               {"terms", osc.terms},
               {"taper", osc.taper},
               {"sign", osc_sign}}},
             {"output", {{"csv", osc_csv}, {"json", osc_json}, {"plot", osc_plot}}}};
      return run_config(j);
    }
    if (*flowc) {
      json j = base_config("flow-check", common);
      j["flow"] = {{"order", flow.order}, {"t", flow.t}, {"t_grid", flow.t_grid}};
      return run_config(j);
    }
    if (*accept) {
      bool all = true;
      for (const auto& c : acceptance::all_criteria()) {
        const auto o = acceptance::run_timed(c);
        std::cout << acceptance::format(o) << std::endl;
        all = all && o.passed;
      }
      std::cout << (all ? "all criteria passed" : "some criteria FAILED") << std::endl;
      return all ? kExitOk : 1;
    }
  } catch (const HypothesisError& e) {
    std::cerr << "hypothesis violated (" << e.hypothesis() << "): " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return kExitInternal;
}
