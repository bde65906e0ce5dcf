#pragma once

// Executes scenario commands and renders their CSV and JSON artifacts.
// Numbers are printed with 17 significant digits so identical inputs give
// byte-identical files.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "degentrace/config.hpp"
#include "degentrace/errors.hpp"
#include "degentrace/flow.hpp"
#include "degentrace/json_io.hpp"
#include "degentrace/oscint.hpp"
#include "degentrace/spectrum.hpp"
#include "degentrace/trace.hpp"

namespace degentrace {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitConvergence = 3, kExitInternal = 4 };

// Maps an exception raised anywhere in the library onto the CLI exit code.
inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const HypothesisError*>(&e) ||
      dynamic_cast<const DomainError*>(&e))
    return kExitConfig;
  if (dynamic_cast<const ConvergenceError*>(&e) || dynamic_cast<const ResolutionError*>(&e)) return kExitConvergence;
  return kExitInternal;
}

inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Writes to a temporary sibling and renames it into place.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw ConfigError("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw ConfigError("cannot move output into place at " + path.string());
  }
}

struct Artifacts {
  std::string csv;
  json summary;
};

inline Artifacts run_spectrum_command(const ScenarioConfig& c) {
  std::ostringstream csv;
  csv << "h,index,eigenvalue,multiplicity\n";
  json runs = json::array();
  const double ec = c.model->critical_energy();
  for (double h : c.h_grid) {
    const auto spec = spectrum(*c.model, h, {ec - c.eps, ec + c.eps}, c.basis);
    for (std::size_t i = 0; i < spec.eigenvalues.size(); ++i)
      csv << fmt(h) << ',' << i << ',' << fmt(spec.eigenvalues[i]) << ',' << spec.multiplicities[i] << '\n';
    runs.push_back({{"h", h}, {"basis_N", spec.basis_N}, {"converged", spec.converged}, {"count", spec.count()},
                    {"window", {spec.window.lo, spec.window.hi}}});
  }
  return {csv.str(), {{"command", "spectrum"}, {"runs", runs}}};
}

inline Artifacts run_trace_command(const ScenarioConfig& c) {
  TraceOptions opt;
  opt.threads = c.threads;
  opt.tol = c.quad_tol;
  opt.spectrum = c.basis;
  const auto tf = c.test_function.build();
  const auto run = run_trace(*c.model, tf, c.eps, c.h_grid, opt);
  std::ostringstream csv;
  csv << "h,gamma,prediction,ratio,basis_N,converged\n";
  json failures = json::array();
  for (const auto& r : run.rows) {
    csv << fmt(r.h) << ',' << fmt(r.gamma) << ',' << fmt(r.prediction) << ',' << fmt(r.ratio) << ',' << r.basis_N << ','
        << (r.converged ? "true" : "false") << '\n';
    if (!r.error.empty()) failures.push_back({{"h", r.h}, {"error", r.error}});
  }
  json s{{"command", c.command},
         {"lambda0", run.prediction.lambda0},
         {"slope_expected", run.prediction.exponent},
         {"pairing", run.prediction.pairing},
         {"sphere_integral", run.prediction.sphere_integral},
         {"pairing_side", to_string(run.prediction.side)},
         {"prefactor_ratio_at_min_h", run.rows.back().ratio},
         {"eps", c.eps},
         {"failures", failures}};
  if (run.fit) {
    s["slope"] = run.fit->slope;
    s["intercept"] = run.fit->intercept;
    s["fit_residual"] = run.fit->residual;
  } else {
    s["slope"] = nullptr;
  }
  return {csv.str(), s};
}

inline Artifacts run_predict_command(const ScenarioConfig& c) {
  const auto p = lambda0_predict(c.model->symbol(), c.test_function.build(), c.quad_tol);
  std::ostringstream csv;
  csv << "lambda0,exponent,pairing,sphere_integral\n"
      << fmt(p.lambda0) << ',' << fmt(p.exponent) << ',' << fmt(p.pairing) << ',' << fmt(p.sphere_integral) << '\n';
  return {csv.str(),
          {{"command", "predict"},
           {"lambda0", p.lambda0},
           {"exponent", p.exponent},
           {"pairing", p.pairing},
           {"sphere_integral", p.sphere_integral},
           {"pairing_side", to_string(p.side)}}};
}

// Triangle t-profile times r^3, optionally tapered by -r^4, on r in [0, 1].
inline OscAmplitude reference_amplitude(int k, bool taper) {
  OscAmplitude a;
  a.k = k;
  a.r_max = 1.0;
  const auto tri = triangle_profile(1.0, 1.5);
  a.terms.push_back({3, tri});
  if (taper) {
    SampledProfile neg = tri;
    for (auto& v : neg.values) v = -v;
    a.terms.push_back({4, neg});
  }
  return a;
}

struct OscintCheck {
  std::vector<double> lambdas, brute, expansion, abs_err, local_order;
  FitResult fit;
  double expected_order = 0.0;
  ExpansionResult coefficients;
};

inline OscintCheck oscint_check(const OscintSpec& o) {
  const auto a = reference_amplitude(o.k, o.taper);
  OscintCheck r;
  r.coefficients = expansion(a, o.terms, o.sign);
  r.expected_order = -static_cast<double>(o.terms + 2) / o.k;
  r.lambdas = log_grid(o.lmin, o.lmax, o.points);
  std::vector<std::pair<double, double>> pts;
  for (double lam : r.lambdas) {
    const cplx b = brute_force(a, lam, o.sign);
    const cplx e = r.coefficients.eval(lam);
    r.brute.push_back(b.real());
    r.expansion.push_back(e.real());
    r.abs_err.push_back(std::abs(b - e));
    pts.emplace_back(lam, r.abs_err.back());
  }
  for (std::size_t i = 0; i < pts.size(); ++i)
    r.local_order.push_back(i == 0 ? std::nan("")
                                   : std::log(r.abs_err[i] / r.abs_err[i - 1]) / std::log(r.lambdas[i] / r.lambdas[i - 1]));
  if (pts.size() >= 2) r.fit = fit_exponent(pts);
  return r;
}

inline Artifacts run_oscint_command(const ScenarioConfig& c) {
  const auto r = oscint_check(c.oscint);
  std::ostringstream csv;
  csv << "lambda,brute,expansion,abs_err,fitted_order\n";
  for (std::size_t i = 0; i < r.lambdas.size(); ++i)
    csv << fmt(r.lambdas[i]) << ',' << fmt(r.brute[i]) << ',' << fmt(r.expansion[i]) << ',' << fmt(r.abs_err[i]) << ','
        << fmt(r.local_order[i]) << '\n';
  json cj = json::array();
  for (const auto& v : r.coefficients.coefficients) cj.push_back({v.real(), v.imag()});
  return {csv.str(),
          {{"command", "oscint-check"},
           {"k", c.oscint.k},
           {"terms", c.oscint.terms},
           {"sign", to_string(c.oscint.sign)},
           {"fitted_order", r.fit.slope},
           {"expected_order", r.expected_order},
           {"c_j", cj}}};
}

struct FlowCheck {
  bool degeneracy_ok = false;
  double first_jet_residual = 0.0;
  double group_law_residual = 0.0;
  double hj_residual = 0.0;
  double generating_residual = 0.0;
  double leading_residual = 0.0;
  PhaseStructureReport report;
  VectorJet flow;
  Jet S;
};

// Flow and generating-function checks over a t-grid. The flow jet degree is
// order - 1.
inline FlowCheck flow_check(const SymbolModel& s0, int order, const std::vector<double>& t_grid, double t_out) {
  const SymbolModel s = with_order(s0, order);
  const int m = order - 1;
  const int k = s.k();
  const auto series = flow_series(s, m);
  const VectorJet hk = hamiltonian_field(s, k).homogeneous(k - 1);
  FlowCheck fc;
  fc.degeneracy_ok = true;
  for (double t : t_grid) {
    const VectorJet phi = series.at(t);
    for (int j = 2; j <= std::min(k - 2, m); ++j)
      if (phi.homogeneous(j).max_abs() != 0.0) fc.degeneracy_ok = false;
    if (k - 1 <= m)
      for (std::size_t c = 0; c < phi.size(); ++c)
        fc.first_jet_residual =
            std::max(fc.first_jet_residual, (homogeneous_part(phi[c], k - 1) - hk[c].with_order(m) * t).max_abs());
    for (double u : {0.5, -0.25}) {
      const VectorJet lhs = series.at(t + u);
      const VectorJet rhs = jet_compose(phi, series.at(u));
      fc.group_law_residual = std::max(fc.group_law_residual, (lhs - rhs).max_abs());
    }
  }
  fc.report = phase_structure_check(s, order, t_grid);
  fc.hj_residual = fc.report.hj_residual;
  fc.generating_residual = fc.report.generating_residual;
  fc.leading_residual = fc.report.leading_residual;
  fc.flow = series.at(t_out);
  fc.S = generating_series(s, order).generating_function(t_out);
  return fc;
}

inline Artifacts run_flow_command(const ScenarioConfig& c) {
  const auto fc = flow_check(c.model->symbol(), c.flow.order, c.flow.t_grid, c.flow.t);
  json flow = json::array();
  for (const auto& comp : fc.flow) flow.push_back(jet_to_json(comp));
  json s{{"degeneracy_ok", fc.degeneracy_ok},
         {"first_jet_residual", fc.first_jet_residual},
         {"group_law_residual", fc.group_law_residual},
         {"hj_residual", fc.hj_residual},
         {"generating_residual", fc.generating_residual},
         {"leading_residual", fc.leading_residual},
         {"r_part_residual", fc.report.r_part_residual},
         {"g_low_degree_residual", fc.report.g_low_degree_residual},
         {"max_time_degree", fc.report.max_time_degree},
         {"t", c.flow.t},
         {"flow_jet", flow},
         {"generating_function", jet_to_json(fc.S)}};
  std::ostringstream csv;
  csv << "check,value\n"
      << "degeneracy_ok," << (fc.degeneracy_ok ? 1 : 0) << '\n'
      << "first_jet_residual," << fmt(fc.first_jet_residual) << '\n'
      << "group_law_residual," << fmt(fc.group_law_residual) << '\n'
      << "hj_residual," << fmt(fc.hj_residual) << '\n'
      << "generating_residual," << fmt(fc.generating_residual) << '\n';
  return {csv.str(), s};
}

inline Artifacts execute(const ScenarioConfig& c) {
  if (c.command == "spectrum") return run_spectrum_command(c);
  if (c.command == "gamma" || c.command == "fit") return run_trace_command(c);
  if (c.command == "predict") return run_predict_command(c);
  if (c.command == "oscint-check") return run_oscint_command(c);
  if (c.command == "flow-check") return run_flow_command(c);
  throw ConfigError("unknown command \"" + c.command + "\"");
}

// Gnuplot script for the CSV of a scenario. The data file is referenced
// relative to the script when both share a directory.
inline std::string gnuplot_script(const ScenarioConfig& c) {
  namespace fs = std::filesystem;
  const fs::path csv(c.csv_path), plot(c.plot_path);
  const std::string data = csv.parent_path() == plot.parent_path() ? csv.filename().string() : csv.string();
  std::ostringstream gp;
  gp << "set datafile separator ','\n"
     << "set key top right\n";
  if (c.command == "gamma" || c.command == "fit") {
    gp << "set logscale xy\nset xlabel 'h'\nset ylabel 'gamma'\n"
       << "plot '" << data << "' using 1:2 skip 1 with points title 'gamma', \\\n"
       << "     '" << data << "' using 1:3 skip 1 with lines title 'prediction'\n";
  } else if (c.command == "oscint-check") {
    gp << "set logscale xy\nset xlabel 'lambda'\nset ylabel '|brute - expansion|'\n"
       << "plot '" << data << "' using 1:4 skip 1 with linespoints title 'remainder'\n";
  } else if (c.command == "spectrum") {
    gp << "set xlabel 'index'\nset ylabel 'eigenvalue'\n"
       << "plot '" << data << "' using 2:3 skip 1 with points title 'levels'\n";
  } else {
    throw ConfigError("no plot is defined for command \"" + c.command + "\"");
  }
  return gp.str();
}

// Runs a scenario and writes its artifacts; returns the artifacts as well.
inline Artifacts run_scenario(const ScenarioConfig& c) {
  Artifacts a = execute(c);
  const std::string plot = c.plot_path.empty() ? std::string() : gnuplot_script(c);
  if (!c.csv_path.empty()) atomic_write(c.csv_path, a.csv);
  if (!c.json_path.empty()) atomic_write(c.json_path, a.summary.dump(2) + "\n");
  if (!plot.empty()) atomic_write(c.plot_path, plot);
  return a;
}

}  // namespace degentrace
