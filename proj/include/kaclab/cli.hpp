#pragma once

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kaclab/collision.hpp"
#include "kaclab/config.hpp"
#include "kaclab/error.hpp"
#include "kaclab/evolve.hpp"
#include "kaclab/gevrey.hpp"
#include "kaclab/io.hpp"
#include "kaclab/probes.hpp"
#include "kaclab/radial3d.hpp"
#include "kaclab/spectral.hpp"

namespace kaclab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitViolation = 4;

inline int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::ConfigError:
    case ErrorCode::ParseError:
    case ErrorCode::UnsupportedRegime:
    case ErrorCode::IoError: return kExitConfig;
    default: return kExitNumerical;
  }
}

/// Resolution order for the output directory: flag, config, KACLAB_OUT, ./kaclab-out.
inline std::filesystem::path resolve_out_dir(const std::string& flag, const RunConfig& cfg) {
  if (!flag.empty()) return flag;
  if (!cfg.out.empty()) return cfg.out;
  if (const char* env = std::getenv("KACLAB_OUT"); env && *env) return env;
  return "kaclab-out";
}

namespace detail {

using ojson = nlohmann::ordered_json;

/// The config as recorded in outputs: the output path is omitted so that runs differing only in where they write are byte-identical.
inline std::string recorded_config(RunConfig cfg) {
  cfg.out.clear();
  return emit_ini(cfg);
}

inline ojson grid_json(const GridSpec& g) { return {{"xi_max", g.xi_max}, {"n", g.n}, {"v_max", g.v_max}}; }

inline const char* kConvention = "fhat(xi) = integral of exp(-i v xi) f(v) dv; even data, xi >= 0";

inline std::string snapshot_name(size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snapshots/snapshot_%03zu", k);
  return buf;
}

inline void write_monitor(OutputDir& out, const std::string& name, const std::vector<double>& t,
                          const std::vector<double>& v) {
  out.write("monitors/" + name + ".csv", csv_columns({"t", "value"}, {t, v}));
}

struct Diagnostics {
  std::vector<GevreyFitPoint> fit;
  double c0 = 0.0;
  std::vector<AprioriReport> apriori;  // one per δ in the ladder
};

inline Diagnostics run_diagnostics(const Trajectory& tr, const RunConfig& cfg) {
  Diagnostics d;
  GevreyFitOptions opt;
  opt.floor = cfg.diagnostics.fit_floor;
  opt.top_exclusion = cfg.diagnostics.top_exclusion;
  d.fit = gevrey_fit(tr, cfg.diagnostics.s_prime, opt);
  d.c0 = cfg.diagnostics.c0_policy == "fixed" ? cfg.diagnostics.c0 : rate_constant(d.fit);
  for (double delta : cfg.diagnostics.deltas)
    d.apriori.push_back(apriori_tracker(tr, d.c0, cfg.diagnostics.s_prime, delta, cfg.kernel.s));
  return d;
}

inline ojson write_diagnostics(OutputDir& out, const Diagnostics& d, const RunConfig& cfg) {
  std::vector<double> t, c, res, lo, hi;
  for (const auto& p : d.fit) {
    t.push_back(p.t);
    c.push_back(p.c);
    res.push_back(p.residual);
    lo.push_back(p.window_lo);
    hi.push_back(p.window_hi);
  }
  out.write("gevrey_fit.csv", csv_columns({"t", "c_fit", "residual", "window_lo", "window_hi"}, {t, c, res, lo, hi}));
  ojson j;
  j["s_prime"] = cfg.diagnostics.s_prime;
  j["c0_policy"] = cfg.diagnostics.c0_policy;
  j["c0"] = json_number(d.c0);
  auto& fits = j["fit"] = ojson::array();
  for (const auto& p : d.fit)
    fits.push_back({{"t", p.t},
                    {"c", json_number(p.c)},
                    {"c_stderr", json_number(p.c_stderr)},
                    {"points", p.points},
                    {"saturated", p.saturated}});
  auto& ap = j["apriori"] = ojson::array();
  for (size_t k = 0; k < d.apriori.size(); ++k) {
    const auto& r = d.apriori[k];
    std::vector<double> tt, y, dy, rhs;
    for (const auto& p : r.points) {
      tt.push_back(p.t);
      y.push_back(p.y);
      dy.push_back(p.dy_dt);
      rhs.push_back(p.bound_rhs);
    }
    std::string name = "apriori/delta_" + std::to_string(k) + ".csv";
    out.write(name, csv_columns({"t", "y", "dy_dt", "bound_rhs"}, {tt, y, dy, rhs}));
    ap.push_back({{"delta", cfg.diagnostics.deltas[k]},
                  {"file", name},
                  {"C1", json_number(r.C1)},
                  {"C2", json_number(r.C2)},
                  {"exponent", json_number(r.exponent)},
                  {"t_star", json_number(r.t_star)},
                  {"within_bound", r.within_bound},
                  {"oscillations", r.oscillations}});
  }
  return j;
}

inline ojson report_json(const ProbeReport& r) {
  ojson j;
  j["id"] = r.id;
  j["passed"] = r.passed();
  j["samples"] = r.samples;
  j["violations"] = r.violations;
  auto& c = j["constants"] = ojson::object();
  for (const auto& [k, v] : r.constants) c[k] = json_number(v);
  j["worst_margin"] = json_number(r.worst_margin);
  j["sampling"] = r.sampling;
  j["tolerance"] = r.tolerance;
  return j;
}

/// Runs the probes and writes one report per id plus constants.json; returns the number of failing reports.
inline int run_probe_set(OutputDir& out, const RunConfig& cfg, const std::vector<std::string>& ids) {
  ProbeConfig pc = probe_config(cfg);
  ojson constants;
  int failing = 0;
  for (const auto& id : ids) {
    ProbeReport r = run_probe(id, pc);
    out.write_json("probes/" + id + ".json", report_json(r));
    auto& c = constants[id] = ojson::object();
    for (const auto& [k, v] : r.constants) c[k] = json_number(v);
    if (!r.passed()) ++failing;
  }
  out.write_json("probes/constants.json", constants);
  return failing;
}

inline SpectralState initial_state(const RunConfig& cfg) { return init_from_profile(initial_profile(cfg), cfg.grid); }

inline Trajectory simulate_config(const RunConfig& cfg) {
  SpectralState init = initial_state(cfg);
  QuadratureRule rule = QuadratureRule::make(cfg.kernel, cfg.quad_tol);
  return simulate(init, cfg.kernel, rule, cfg.integrator.T,
                  uniform_times(cfg.integrator.T, cfg.integrator.outputs), simulate_options(cfg));
}

inline void write_snapshots(OutputDir& out, const Trajectory& tr) {
  for (size_t k = 0; k < tr.snapshots.size(); ++k) {
    const auto& st = tr.snapshots[k];
    std::vector<double> xi(st.grid.n);
    for (int j = 0; j < st.grid.n; ++j) xi[j] = st.grid.xi(j);
    out.write(snapshot_name(k) + ".csv", csv_columns({"xi", "f_hat"}, {xi, st.values}));
    out.write_json(snapshot_name(k) + ".json",
                   ojson{{"grid", grid_json(st.grid)}, {"time", st.time}, {"convention", kConvention}});
  }
}

/// Reads the snapshots written by `simulate` back into a trajectory.
inline Trajectory load_snapshots(const std::filesystem::path& dir) {
  Trajectory tr;
  for (size_t k = 0;; ++k) {
    auto meta_path = dir / (snapshot_name(k) + ".json");
    if (!std::filesystem::exists(meta_path)) break;
    nlohmann::json meta;
    try {
      meta = nlohmann::json::parse(read_file(meta_path));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::ParseError, meta_path.string() + ": " + e.what());
    }
    SpectralState st;
    st.grid = GridSpec{meta.at("grid").at("xi_max").get<double>(), meta.at("grid").at("n").get<int>(),
                       meta.at("grid").at("v_max").get<double>()};
    st.time = meta.at("time").get<double>();
    auto csv_path = dir / (snapshot_name(k) + ".csv");
    auto tab = parse_csv(read_file(csv_path), csv_path.string());
    if (tab.header != std::vector<std::string>{"xi", "f_hat"})
      fail(ErrorCode::ParseError, csv_path.string() + ":1: expected header 'xi,f_hat'");
    if (static_cast<int>(tab.rows.size()) != st.grid.n)
      fail(ErrorCode::ParseError, csv_path.string() + ": row count does not match the grid");
    for (const auto& row : tab.rows) st.values.push_back(row[1]);
    record(tr, st, false);
  }
  if (tr.snapshots.empty()) fail(ErrorCode::IoError, "no snapshots found under '" + dir.string() + "'");
  return tr;
}

}  // namespace detail

/**
 * simulate: trajectory snapshots, monitor series, Gevrey diagnostics,
 * optional probe reports and a manifest. Returns the exit status.
 */
inline int run_simulate(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  validate(cfg);
  check_regime(cfg);
  auto ids = expand_probe_ids(cfg.probe.ids);
  Trajectory tr = detail::simulate_config(cfg);
  auto diag = detail::run_diagnostics(tr, cfg);

  OutputDir out(out_dir);
  const std::string config_text = detail::recorded_config(cfg);
  out.write("config.ini", config_text);
  detail::write_snapshots(out, tr);
  detail::write_monitor(out, "mass", tr.times, tr.mass);
  detail::write_monitor(out, "energy", tr.times, tr.energy);
  detail::write_monitor(out, "fourth_moment", tr.times, tr.fourth_moment);
  if (cfg.diagnostics.entropy) {
    detail::write_monitor(out, "entropy", tr.times, tr.entropy);
    detail::write_monitor(out, "entropy_clamped_fraction", tr.times, tr.entropy_clamped);
  }
  detail::ojson summary;
  summary["kernel"] = {{"family", to_string(cfg.kernel.family)}, {"s", cfg.kernel.s}};
  summary["grid"] = detail::grid_json(cfg.grid);
  summary["rhs_evaluations"] = tr.rhs_evaluations;
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); };
  double mass_drift = 0.0, energy_drift = 0.0;
  for (size_t k = 0; k < tr.times.size(); ++k) {
    mass_drift = std::max(mass_drift, rel(tr.mass[k], tr.mass.front()));
    energy_drift = std::max(energy_drift, rel(tr.energy[k], tr.energy.front()));
  }
  summary["mass_drift"] = mass_drift;
  summary["energy_drift"] = energy_drift;
  if (cfg.diagnostics.entropy) {
    bool monotone = true;
    for (double h : tr.entropy) monotone = monotone && h <= tr.entropy.front() + 1e-6;
    summary["entropy_below_initial"] = monotone;
  }
  try {
    MomentFit mf = moment_track(tr);
    summary["moment_fit"] = {{"lambda", json_number(mf.lambda)}, {"r_squared", json_number(mf.r_squared)}};
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateFit) throw;
    summary["moment_fit"] = nullptr;  // no relaxation to fit, e.g. equilibrium data
  }
  summary["gevrey"] = detail::write_diagnostics(out, diag, cfg);
  int failing = 0;
  if (!ids.empty()) {
    failing = detail::run_probe_set(out, cfg, ids);
    summary["probes_failing"] = failing;
  }
  out.write_json("summary.json", summary);
  out.write_manifest("simulate", config_text);
  return failing ? kExitViolation : kExitOk;
}

inline int run_probe(const RunConfig& cfg, const std::vector<std::string>& requested, const std::filesystem::path& out_dir) {
  if (requested.empty()) fail(ErrorCode::ConfigError, "no probe ids given (use ids or 'all')");
  RunConfig c = cfg;
  c.probe.ids = requested;
  validate(c);
  check_regime(c);
  OutputDir out(out_dir);
  const std::string config_text = detail::recorded_config(c);
  out.write("config.ini", config_text);
  int failing = detail::run_probe_set(out, c, expand_probe_ids(requested));
  out.write_manifest("probe", config_text);
  return failing ? kExitViolation : kExitOk;
}

/// Parses an "r,g" CSV; the radius must not decrease.
inline RadialProfile3D parse_radial_csv(const std::string& text, const std::string& source = "input") {
  auto tab = parse_csv(text, source);
  if (tab.header != std::vector<std::string>{"r", "g"}) fail(ErrorCode::ParseError, source + ":1: expected header 'r,g'");
  RadialProfile3D p;
  for (size_t i = 0; i < tab.rows.size(); ++i) {
    double r = tab.rows[i][0], g = tab.rows[i][1];
    if (i > 0 && r < p.r.back())
      fail(ErrorCode::ParseError, source + ":" + std::to_string(tab.lines[i]) + ": radius decreases");
    if (r < 0.0) fail(ErrorCode::ParseError, source + ":" + std::to_string(tab.lines[i]) + ": negative radius");
    p.r.push_back(r);
    p.g.push_back(g);
  }
  return p;
}

inline int run_reduce3d(const RunConfig& cfg, const std::string& input_flag, const std::filesystem::path& out_dir) {
  validate(cfg);
  std::string input = input_flag.empty() ? cfg.reduce3d.input : input_flag;
  if (input.empty()) fail(ErrorCode::ConfigError, "reduce3d.input: no radial profile CSV given");
  RadialProfile3D prof = parse_radial_csv(read_file(input), input);
  prof.validate();
  const auto& rc = cfg.reduce3d;
  PhysicalState f = project_to_kac(prof, rc.v_max, rc.points);
  Kernel3D b{rc.shape, rc.K, rc.s};
  KernelConversion conv = convert_kernel(b);

  OutputDir out(out_dir);
  RunConfig recorded = cfg;
  recorded.reduce3d.input = std::filesystem::path(input).filename().string();
  const std::string config_text = detail::recorded_config(recorded);
  out.write("config.ini", config_text);
  std::vector<double> u(f.m());
  for (int k = 0; k < f.m(); ++k) u[k] = f.v(k);
  out.write("projected.csv", csv_columns({"u", "f"}, {u, f.values}));

  detail::ojson rep;
  KacMoments mom = kac_moments(f);
  double m3 = prof.mass(), e3 = prof.energy3d();
  rep["moments"] = {{"mass3d", m3},
                    {"energy3d", e3},
                    {"mass1d", mom.mass},
                    {"energy1d", mom.energy},
                    {"mass_relative_error", std::abs(mom.mass - m3) / m3},
                    {"energy_relative_error", std::abs(mom.energy - e3 / 3.0) / std::max(e3 / 3.0, 1e-300)}};
  rep["kernel"] = {{"family", to_string(conv.spec.family)},
                   {"shape", to_string(conv.spec.shape3d)},
                   {"K", conv.spec.K3d},
                   {"s", conv.spec.s},
                   {"half_angle", conv.spec.half_angle},
                   {"measured_s", json_number(conv.measured_s)},
                   {"amplitude", conv.amplitude}};
  IntegrabilityModulus um = integrability_modulus(f);
  rep["integrability"] = {{"measure_quarter_mass", um.measure_quarter_mass},
                          {"radius_three_quarters", um.radius_three_quarters}};
  if (rc.consistency) {
    GridSpec g = cfg.grid;
    g.v_max = std::min(g.v_max, prof.radius());
    ConsistencyReport cr = rhs_consistency(prof, b, g, cfg.quad_tol);
    rep["consistency"] = {{"residual", cr.residual},
                          {"max_abs_difference", cr.max_abs_difference},
                          {"rhs_norm", cr.rhs_norm},
                          {"grid", detail::grid_json(g)}};
  }
  out.write_json("report.json", rep);
  out.write_manifest("reduce3d", config_text);
  return kExitOk;
}

/// diag gevrey: Gevrey fit and a-priori tracker, from saved snapshots when `input_dir` is set, else from a fresh run.
inline int run_diag_gevrey(const RunConfig& cfg, const std::string& input_dir, const std::filesystem::path& out_dir) {
  validate(cfg);
  Trajectory tr = input_dir.empty() ? detail::simulate_config(cfg) : detail::load_snapshots(input_dir);
  auto diag = detail::run_diagnostics(tr, cfg);
  OutputDir out(out_dir);
  const std::string config_text = detail::recorded_config(cfg);
  out.write("config.ini", config_text);
  out.write_json("gevrey.json", detail::write_diagnostics(out, diag, cfg));
  out.write_manifest("diag gevrey", config_text);
  return kExitOk;
}

/// Machine-readable error record on stderr and, when possible, in the output directory.
inline int report_error(const Error& e, const std::filesystem::path& out_dir) {
  int code = exit_code_for(e.code());
  nlohmann::ordered_json j{{"error", std::string(to_string(e.code()))}, {"message", e.what()}, {"exit_code", code}};
  std::cerr << j.dump() << std::endl;
  if (!out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (!ec) {
      std::ofstream f(out_dir / "error.json", std::ios::trunc);
      if (f) f << j.dump(2) << "\n";
    }
  }
  return code;
}

}  // namespace kaclab
