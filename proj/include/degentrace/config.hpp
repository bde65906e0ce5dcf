#pragma once

// Scenario configuration files. Schema (all keys except "command" optional
// where a default is listed):
//
// {
//   "command": "spectrum" | "gamma" | "predict" | "fit" | "oscint-check" | "flow-check",
//   "model": {"kind": "osc_power", "n": 1, "power": 2, "sign": 1, "p1_shift": 0.0}
//          | {"kind": "poly", "symbol": {...symbol schema...}, "p1_shift": <symbol p1>},
//   "test_function": {"kind": "fejer" | "bump", "T": 1.0, "shift": 0.0, "quad_tol": 1e-12},
//   "eps": 0.5,
//   "h_grid": {"start": 1e-2, "stop": 1e-5, "points": 9, "log": true} | {"values": [...]},
//   "basis": "auto" | {"fixed": N},
//   "tolerances": {"quad": 1e-12},
//   "threads": 0,
//   "oscint": {"k": 4, "lmin": 1e3, "lmax": 1e5, "points": 3, "terms": 3, "taper": true, "sign": "plus"},
//   "flow": {"order": 6, "t_grid": [-2, -1, 0, 1, 2], "t": 1.0},
//   "output": {"csv": "out/run.csv", "json": "out/run.json", "plot": "out/run.gp"}
// }
//
// Relative output paths are resolved against the directory of the config file.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "degentrace/errors.hpp"
#include "degentrace/json_io.hpp"
#include "degentrace/oscint.hpp"
#include "degentrace/spectrum.hpp"
#include "degentrace/trace.hpp"

namespace degentrace {

struct TestFunctionSpec {
  TestKind kind = TestKind::Fejer;
  double T = 1.0;
  double shift = 0.0;
  double quad_tol = 1e-12;

  TestFunction build() const {
    TestFunction f = kind == TestKind::Fejer ? TestFunction::fejer(T) : TestFunction::bump(T, quad_tol);
    return shift == 0.0 ? f : f.shifted(shift);
  }
};

struct OscintSpec {
  int k = 4;
  double lmin = 1e3;
  double lmax = 1e5;
  int points = 3;
  int terms = 3;
  bool taper = true;
  PhaseSign sign = PhaseSign::Plus;
};

struct FlowSpec {
  int order = 6;
  std::vector<double> t_grid{-2.0, -1.0, 0.0, 1.0, 2.0};
  double t = 1.0;
};

struct ScenarioConfig {
  std::string command;
  std::optional<OperatorModel> model;
  TestFunctionSpec test_function;
  double eps = 0.5;
  std::vector<double> h_grid;
  SpectrumOptions basis;
  double quad_tol = 1e-12;
  int threads = 0;
  OscintSpec oscint;
  FlowSpec flow;
  std::string csv_path;
  std::string json_path;
  std::string plot_path;  // gnuplot script reading csv_path
};

namespace detail {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key \"") + key + "\": " + e.what());
  }
}

}  // namespace detail

inline OperatorModel model_from_json(const json& m) {
  const auto kind = detail::get_or<std::string>(m, "kind", "");
  if (kind == "osc_power") {
    const int n = detail::get_or(m, "n", 1);
    const int power = detail::get_or(m, "power", 2);
    const double sign = detail::get_or(m, "sign", 1.0);
    return osc_power_model(n, power, sign, detail::get_or(m, "p1_shift", 0.0));
  }
  if (kind == "poly") {
    if (!m.contains("symbol")) throw ConfigError("poly model needs a \"symbol\" entry");
    SymbolModel s = symbol_from_json(m.at("symbol"));
    const double shift = detail::get_or(m, "p1_shift", s.p1());
    return poly_symbol_model(std::move(s), shift);
  }
  throw ConfigError("model kind must be \"osc_power\" or \"poly\", got \"" + kind + "\"");
}

inline ScenarioConfig config_from_json(const json& j, const std::filesystem::path& base_dir = {}) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ScenarioConfig c;
  c.command = detail::get_or<std::string>(j, "command", "");
  static const std::vector<std::string> commands{"spectrum", "gamma", "predict", "fit", "oscint-check", "flow-check"};
  if (std::find(commands.begin(), commands.end(), c.command) == commands.end())
    throw ConfigError("unknown command \"" + c.command + "\"");
  if (j.contains("model")) c.model = model_from_json(j.at("model"));

  if (j.contains("test_function")) {
    const auto& t = j.at("test_function");
    const auto kind = detail::get_or<std::string>(t, "kind", "fejer");
    if (kind == "fejer") {
      c.test_function.kind = TestKind::Fejer;
    } else if (kind == "bump") {
      c.test_function.kind = TestKind::SmoothBump;
    } else {
      throw ConfigError("test_function kind must be \"fejer\" or \"bump\"");
    }
    c.test_function.T = detail::get_or(t, "T", 1.0);
    c.test_function.shift = detail::get_or(t, "shift", 0.0);
    c.test_function.quad_tol = detail::get_or(t, "quad_tol", 1e-12);
    if (!(c.test_function.T > 0)) throw ConfigError("test_function T must be positive");
  }
  c.eps = detail::get_or(j, "eps", 0.5);
  if (!(c.eps > 0)) throw ConfigError("eps must be positive");

  if (j.contains("h_grid")) {
    const auto& g = j.at("h_grid");
    if (g.contains("values")) {
      c.h_grid = g.at("values").get<std::vector<double>>();
    } else {
      const double start = detail::get_or(g, "start", 1e-2);
      const double stop = detail::get_or(g, "stop", 1e-5);
      const int points = detail::get_or(g, "points", 9);
      if (detail::get_or(g, "log", true)) {
        c.h_grid = log_grid(start, stop, points);
      } else {
        for (int i = 0; i < points; ++i) c.h_grid.push_back(start + (stop - start) * i / std::max(1, points - 1));
      }
    }
    for (double h : c.h_grid)
      if (!(h > 0)) throw ConfigError("h values must be positive");
  }

  if (j.contains("basis")) {
    const auto& b = j.at("basis");
    if (b.is_string()) {
      if (b.get<std::string>() != "auto") throw ConfigError("basis must be \"auto\" or {\"fixed\": N}");
    } else {
      c.basis.auto_N = false;
      c.basis.fixed_N = detail::get_or(b, "fixed", 0);
      if (c.basis.fixed_N < 2) throw ConfigError("fixed basis size must be at least 2");
    }
  }
  if (j.contains("tolerances")) c.quad_tol = detail::get_or(j.at("tolerances"), "quad", 1e-12);
  c.threads = detail::get_or(j, "threads", 0);

  if (j.contains("oscint")) {
    const auto& o = j.at("oscint");
    c.oscint.k = detail::get_or(o, "k", 4);
    c.oscint.lmin = detail::get_or(o, "lmin", 1e3);
    c.oscint.lmax = detail::get_or(o, "lmax", 1e5);
    c.oscint.points = detail::get_or(o, "points", 3);
    c.oscint.terms = detail::get_or(o, "terms", 3);
    c.oscint.taper = detail::get_or(o, "taper", true);
    const auto sign = detail::get_or<std::string>(o, "sign", "plus");
    if (sign != "plus" && sign != "minus") throw ConfigError("oscint sign must be \"plus\" or \"minus\"");
    c.oscint.sign = sign == "plus" ? PhaseSign::Plus : PhaseSign::Minus;
  }
  if (j.contains("flow")) {
    const auto& f = j.at("flow");
    c.flow.order = detail::get_or(f, "order", 6);
    c.flow.t_grid = detail::get_or(f, "t_grid", c.flow.t_grid);
    c.flow.t = detail::get_or(f, "t", 1.0);
  }
  if (j.contains("output")) {
    const auto& o = j.at("output");
    auto resolve = [&](const std::string& p) {
      if (p.empty()) return p;
      std::filesystem::path path(p);
      return (path.is_relative() && !base_dir.empty() ? base_dir / path : path).string();
    };
    c.csv_path = resolve(detail::get_or<std::string>(o, "csv", ""));
    c.json_path = resolve(detail::get_or<std::string>(o, "json", ""));
    c.plot_path = resolve(detail::get_or<std::string>(o, "plot", ""));
    if (!c.plot_path.empty() && c.csv_path.empty()) throw ConfigError("a plot script needs an output csv path");
  }

  const bool needs_model = c.command != "oscint-check";
  if (needs_model && !c.model) throw ConfigError("command \"" + c.command + "\" needs a \"model\" entry");
  const bool needs_grid = c.command == "spectrum" || c.command == "gamma" || c.command == "fit";
  if (needs_grid && c.h_grid.empty()) throw ConfigError("command \"" + c.command + "\" needs an \"h_grid\" entry");
  return c;
}

inline ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

}  // namespace degentrace
