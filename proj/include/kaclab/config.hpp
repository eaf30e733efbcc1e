#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <nlohmann/json.hpp>

#include "kaclab/error.hpp"
#include "kaclab/evolve.hpp"
#include "kaclab/io.hpp"
#include "kaclab/kernel.hpp"
#include "kaclab/probes.hpp"
#include "kaclab/spectral.hpp"

namespace kaclab {

struct InitialConfig {
  std::string profile = "indicator";  // gaussian | indicator | two_bump
  double mass = 1.0;
  double temperature = 1.0;
  double half_width = 1.0;
  std::vector<double> centers{-1.5, 1.5};
  std::vector<double> widths{0.5, 0.5};
};

struct IntegratorConfig {
  Scheme scheme = Scheme::rk4;
  double dt = 0.02;
  double T = 1.0;
  int outputs = 11;
  double reltol = 1e-8;
  double abstol = 1e-12;
};

struct DiagnosticsConfig {
  double s_prime = 0.2;
  std::string c0_policy = "fitted";  // fitted | fixed
  double c0 = 1.0;                   // used when the policy is fixed
  std::vector<double> deltas{1e-1, 1e-2, 1e-3, 1e-6};
  bool entropy = true;
  double fit_floor = 1e-12;
  double top_exclusion = 0.1;
};

struct ProbeSection {
  std::vector<std::string> ids;  // empty: none requested; "all" expands to every registered probe
  int symbol_samples = 10000;
  int random_pairs = 20;
  GridSpec grid{16.0, 128, 10.0};
  std::vector<double> times{0.1, 0.2, 0.4};
  double horizon = 1.0;
  double poly_N = 2.0;
};

struct Reduce3dConfig {
  std::string input;
  Kernel3DShape shape = Kernel3DShape::exact_power;
  double K = 1.0;
  double s = 0.25;
  double v_max = 10.0;
  int points = 2001;
  bool consistency = true;
};

/// Every field has a default; parse → emit → parse is the identity.
struct RunConfig {
  std::uint64_t seed = 20240611;
  std::string out;
  KernelSpec kernel;
  double quad_tol = 1e-9;
  GridSpec grid{20.0, 256, 10.0};
  InitialConfig initial;
  IntegratorConfig integrator;
  DiagnosticsConfig diagnostics;
  ProbeSection probe;
  Reduce3dConfig reduce3d;
};

namespace detail {

enum class FieldKind { number, integer, boolean, text, number_list, text_list };

struct Field {
  std::string section, key;
  FieldKind kind;
  std::function<void(RunConfig&, const std::string&)> set;  // throws std::invalid_argument
  std::function<std::string(const RunConfig&)> get;
};

inline double to_num(const std::string& s) {
  double v;
  if (!parse_double(s, v)) throw std::invalid_argument("'" + s + "' is not a number");
  return v;
}

inline long long to_int(const std::string& s) {
  double v = to_num(s);
  if (v != std::floor(v) || std::abs(v) > 9.0e15) throw std::invalid_argument("'" + s + "' is not an integer");
  return static_cast<long long>(v);
}

inline bool to_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw std::invalid_argument("'" + s + "' is not a boolean");
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    size_t a = cur.find_first_not_of(" \t"), b = cur.find_last_not_of(" \t");
    if (a != std::string::npos) out.push_back(cur.substr(a, b - a + 1));
    cur.clear();
  };
  for (char ch : s) {
    if (ch == ',')
      flush();
    else
      cur += ch;
  }
  flush();
  return out;
}

inline std::vector<double> to_nums(const std::string& s) {
  std::vector<double> out;
  for (const auto& x : split_list(s)) out.push_back(to_num(x));
  return out;
}

inline std::string join_nums(const std::vector<double>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_double(v[i]);
  return out;
}

inline std::string join_texts(const std::vector<std::string>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
  return out;
}

#define KACLAB_NUM(sec, key, member)                                                                  \
  Field{sec, key, FieldKind::number, [](RunConfig& c, const std::string& v) { c.member = to_num(v); }, \
        [](const RunConfig& c) { return format_double(c.member); }}
#define KACLAB_INT(sec, key, member)                                                                           \
  Field{sec, key, FieldKind::integer,                                                                          \
        [](RunConfig& c, const std::string& v) { c.member = static_cast<decltype(c.member)>(to_int(v)); },     \
        [](const RunConfig& c) { return std::to_string(c.member); }}
#define KACLAB_BOOL(sec, key, member)                                                                     \
  Field{sec, key, FieldKind::boolean, [](RunConfig& c, const std::string& v) { c.member = to_bool(v); }, \
        [](const RunConfig& c) { return std::string(c.member ? "true" : "false"); }}
#define KACLAB_TEXT(sec, key, member)                                                            \
  Field{sec, key, FieldKind::text, [](RunConfig& c, const std::string& v) { c.member = v; }, \
        [](const RunConfig& c) { return c.member; }}
#define KACLAB_NUMS(sec, key, member)                                                                      \
  Field{sec, key, FieldKind::number_list, [](RunConfig& c, const std::string& v) { c.member = to_nums(v); }, \
        [](const RunConfig& c) { return join_nums(c.member); }}

inline const std::vector<Field>& config_fields() {
  static const std::vector<Field> fields = {
      Field{"run", "seed", FieldKind::integer,
            [](RunConfig& c, const std::string& v) {
              long long x = to_int(v);
              if (x < 0) throw std::invalid_argument("seed must be nonnegative");
              c.seed = static_cast<std::uint64_t>(x);
            },
            [](const RunConfig& c) { return std::to_string(c.seed); }},
      KACLAB_TEXT("run", "out", out),
      Field{"kernel", "family", FieldKind::text,
            [](RunConfig& c, const std::string& v) {
              try {
                c.kernel.family = kernel_family_from_string(v);
              } catch (const Error&) {
                throw std::invalid_argument("unknown kernel family '" + v + "'");
              }
            },
            [](const RunConfig& c) { return std::string(to_string(c.kernel.family)); }},
      KACLAB_NUM("kernel", "C0", kernel.C0),
      KACLAB_NUM("kernel", "s", kernel.s),
      KACLAB_NUM("kernel", "m", kernel.m),
      KACLAB_NUM("kernel", "theta_cut", kernel.theta_cut),
      KACLAB_NUM("kernel", "K3d", kernel.K3d),
      Field{"kernel", "shape3d", FieldKind::text,
            [](RunConfig& c, const std::string& v) {
              try {
                c.kernel.shape3d = kernel3d_shape_from_string(v);
              } catch (const Error&) {
                throw std::invalid_argument("unknown 3D kernel shape '" + v + "'");
              }
            },
            [](const RunConfig& c) { return std::string(to_string(c.kernel.shape3d)); }},
      KACLAB_BOOL("kernel", "half_angle", kernel.half_angle),
      KACLAB_NUM("kernel", "quad_tol", quad_tol),
      KACLAB_NUM("grid", "xi_max", grid.xi_max),
      KACLAB_INT("grid", "n", grid.n),
      KACLAB_NUM("grid", "v_max", grid.v_max),
      KACLAB_TEXT("initial", "profile", initial.profile),
      KACLAB_NUM("initial", "mass", initial.mass),
      KACLAB_NUM("initial", "temperature", initial.temperature),
      KACLAB_NUM("initial", "half_width", initial.half_width),
      KACLAB_NUMS("initial", "centers", initial.centers),
      KACLAB_NUMS("initial", "widths", initial.widths),
      Field{"integrator", "scheme", FieldKind::text,
            [](RunConfig& c, const std::string& v) {
              try {
                c.integrator.scheme = scheme_from_string(v);
              } catch (const Error&) {
                throw std::invalid_argument("unknown scheme '" + v + "'");
              }
            },
            [](const RunConfig& c) { return std::string(to_string(c.integrator.scheme)); }},
      KACLAB_NUM("integrator", "dt", integrator.dt),
      KACLAB_NUM("integrator", "T", integrator.T),
      KACLAB_INT("integrator", "outputs", integrator.outputs),
      KACLAB_NUM("integrator", "reltol", integrator.reltol),
      KACLAB_NUM("integrator", "abstol", integrator.abstol),
      KACLAB_NUM("diagnostics", "s_prime", diagnostics.s_prime),
      KACLAB_TEXT("diagnostics", "c0_policy", diagnostics.c0_policy),
      KACLAB_NUM("diagnostics", "c0", diagnostics.c0),
      KACLAB_NUMS("diagnostics", "deltas", diagnostics.deltas),
      KACLAB_BOOL("diagnostics", "entropy", diagnostics.entropy),
      KACLAB_NUM("diagnostics", "fit_floor", diagnostics.fit_floor),
      KACLAB_NUM("diagnostics", "top_exclusion", diagnostics.top_exclusion),
      Field{"probe", "ids", FieldKind::text_list,
            [](RunConfig& c, const std::string& v) { c.probe.ids = split_list(v); },
            [](const RunConfig& c) { return join_texts(c.probe.ids); }},
      KACLAB_INT("probe", "symbol_samples", probe.symbol_samples),
      KACLAB_INT("probe", "random_pairs", probe.random_pairs),
      KACLAB_NUM("probe", "xi_max", probe.grid.xi_max),
      KACLAB_INT("probe", "n", probe.grid.n),
      KACLAB_NUM("probe", "v_max", probe.grid.v_max),
      KACLAB_NUMS("probe", "times", probe.times),
      KACLAB_NUM("probe", "horizon", probe.horizon),
      KACLAB_NUM("probe", "poly_N", probe.poly_N),
      KACLAB_TEXT("reduce3d", "input", reduce3d.input),
      Field{"reduce3d", "shape", FieldKind::text,
            [](RunConfig& c, const std::string& v) {
              try {
                c.reduce3d.shape = kernel3d_shape_from_string(v);
              } catch (const Error&) {
                throw std::invalid_argument("unknown 3D kernel shape '" + v + "'");
              }
            },
            [](const RunConfig& c) { return std::string(to_string(c.reduce3d.shape)); }},
      KACLAB_NUM("reduce3d", "K", reduce3d.K),
      KACLAB_NUM("reduce3d", "s", reduce3d.s),
      KACLAB_NUM("reduce3d", "v_max", reduce3d.v_max),
      KACLAB_INT("reduce3d", "points", reduce3d.points),
      KACLAB_BOOL("reduce3d", "consistency", reduce3d.consistency),
  };
  return fields;
}

#undef KACLAB_NUM
#undef KACLAB_INT
#undef KACLAB_BOOL
#undef KACLAB_TEXT
#undef KACLAB_NUMS

/// Flat "section.key" → text view of a config file.
using FlatConfig = std::vector<std::pair<std::string, std::string>>;

inline RunConfig apply_flat(const FlatConfig& flat, RunConfig base = {}) {
  std::vector<std::string> errors;
  std::map<std::string, const Field*> index;
  for (const auto& f : config_fields()) index[f.section + "." + f.key] = &f;
  for (const auto& [k, v] : flat) {
    auto it = index.find(k);
    if (it == index.end()) {
      errors.push_back(k + ": unknown field");
      continue;
    }
    try {
      it->second->set(base, v);
    } catch (const std::invalid_argument& e) {
      errors.push_back(k + ": " + e.what());
    }
  }
  if (!errors.empty()) {
    std::string msg;
    for (size_t i = 0; i < errors.size(); ++i) msg += (i ? "; " : "") + errors[i];
    fail(ErrorCode::ConfigError, msg);
  }
  return base;
}

}  // namespace detail

/// Semantic checks; the error message lists every offending field.
inline void validate(const RunConfig& c) {
  std::vector<std::string> e;
  auto need = [&](bool ok, const std::string& field, const std::string& what) {
    if (!ok) e.push_back(field + ": " + what);
  };
  need(c.kernel.s > 0.0 && c.kernel.s < 1.0, "kernel.s", "must lie in (0,1)");
  need(c.kernel.C0 > 0.0, "kernel.C0", "must be positive");
  need(c.kernel.m > 0.0, "kernel.m", "must be positive");
  need(c.kernel.theta_cut > 0.0 && c.kernel.theta_cut <= kHalfPi, "kernel.theta_cut", "must lie in (0, pi/2]");
  need(c.kernel.K3d >= 0.0, "kernel.K3d", "must be nonnegative");
  need(c.quad_tol > 0.0 && c.quad_tol < 1e-2, "kernel.quad_tol", "must lie in (0, 1e-2)");
  need(c.grid.xi_max > 0.0, "grid.xi_max", "must be positive");
  need(c.grid.n >= 16, "grid.n", "must be at least 16");
  need(c.grid.v_max > 0.0, "grid.v_max", "must be positive");
  need(c.initial.profile == "gaussian" || c.initial.profile == "indicator" || c.initial.profile == "two_bump",
       "initial.profile", "must be gaussian, indicator or two_bump");
  need(c.initial.mass > 0.0, "initial.mass", "must be positive");
  need(c.initial.temperature > 0.0, "initial.temperature", "must be positive");
  need(c.initial.half_width > 0.0, "initial.half_width", "must be positive");
  need(!c.initial.centers.empty() && c.initial.centers.size() == c.initial.widths.size(), "initial.centers",
       "must be nonempty and match initial.widths in length");
  for (double w : c.initial.widths) need(w > 0.0, "initial.widths", "entries must be positive");
  need(c.integrator.dt > 0.0, "integrator.dt", "must be positive");
  need(c.integrator.T > 0.0, "integrator.T", "must be positive");
  need(c.integrator.outputs >= 2, "integrator.outputs", "must be at least 2");
  need(c.integrator.reltol > 0.0, "integrator.reltol", "must be positive");
  need(c.integrator.abstol > 0.0, "integrator.abstol", "must be positive");
  need(c.diagnostics.s_prime > 0.0 && c.diagnostics.s_prime < 1.0, "diagnostics.s_prime", "must lie in (0,1)");
  need(c.diagnostics.c0_policy == "fitted" || c.diagnostics.c0_policy == "fixed", "diagnostics.c0_policy",
       "must be fitted or fixed");
  need(c.diagnostics.c0 > 0.0, "diagnostics.c0", "must be positive");
  need(!c.diagnostics.deltas.empty(), "diagnostics.deltas", "must be nonempty");
  for (double d : c.diagnostics.deltas) need(d > 0.0 && d <= 1.0, "diagnostics.deltas", "entries must lie in (0,1]");
  need(c.diagnostics.fit_floor > 0.0, "diagnostics.fit_floor", "must be positive");
  need(c.diagnostics.top_exclusion >= 0.0 && c.diagnostics.top_exclusion < 1.0, "diagnostics.top_exclusion",
       "must lie in [0,1)");
  for (const auto& id : c.probe.ids) need(id == "all" || is_probe_id(id), "probe.ids", "unknown probe id '" + id + "'");
  need(c.probe.symbol_samples >= 1, "probe.symbol_samples", "must be positive");
  need(c.probe.random_pairs >= 1, "probe.random_pairs", "must be positive");
  need(c.probe.grid.n >= 16, "probe.n", "must be at least 16");
  need(c.probe.grid.xi_max > 0.0, "probe.xi_max", "must be positive");
  need(c.probe.grid.v_max > 0.0, "probe.v_max", "must be positive");
  need(!c.probe.times.empty(), "probe.times", "must be nonempty");
  for (double t : c.probe.times) need(t >= 0.0, "probe.times", "entries must be nonnegative");
  need(c.probe.horizon > 0.0, "probe.horizon", "must be positive");
  need(c.probe.poly_N > 0.0, "probe.poly_N", "must be positive");
  need(c.reduce3d.K >= 0.0, "reduce3d.K", "must be nonnegative");
  need(c.reduce3d.s > 0.0 && c.reduce3d.s < 1.0, "reduce3d.s", "must lie in (0,1)");
  need(c.reduce3d.v_max > 0.0, "reduce3d.v_max", "must be positive");
  need(c.reduce3d.points >= 3 && c.reduce3d.points % 2 == 1, "reduce3d.points", "must be odd and at least 3");
  if (!e.empty()) {
    std::string msg;
    for (size_t i = 0; i < e.size(); ++i) msg += (i ? "; " : "") + e[i];
    fail(ErrorCode::ConfigError, msg);
  }
}

/// Probe ids with "all" expanded, in registry order, without duplicates.
inline std::vector<std::string> expand_probe_ids(const std::vector<std::string>& ids) {
  std::vector<std::string> out;
  auto add = [&](const std::string& id) {
    if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
  };
  for (const auto& id : ids) {
    if (id == "all")
      for (const auto& x : probe_ids()) add(x);
    else
      add(id);
  }
  return out;
}

/// Commutator probes are only defined for s < 1/2.
inline void check_regime(const RunConfig& c) {
  for (const auto& id : expand_probe_ids(c.probe.ids))
    if ((id == "commutator" || id == "commutator_weighted") && !(c.kernel.s < 0.5))
      fail(ErrorCode::UnsupportedRegime,
           "probe '" + id + "' requires kernel.s < 1/2, got " + format_double(c.kernel.s));
}

inline RunConfig parse_ini(const std::string& text, const RunConfig& base = {}) {
  boost::property_tree::ptree pt;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    fail(ErrorCode::ParseError, "line " + std::to_string(e.line()) + ": " + e.message());
  }
  detail::FlatConfig flat;
  for (const auto& [sec, node] : pt) {
    if (node.empty()) {
      flat.push_back({sec, node.data()});  // top-level key outside any section
      continue;
    }
    for (const auto& [key, val] : node) flat.push_back({sec + "." + key, val.data()});
  }
  return detail::apply_flat(flat, base);
}

inline RunConfig parse_json(const std::string& text, const RunConfig& base = {}) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::ParseError, e.what());
  }
  if (!j.is_object()) fail(ErrorCode::ParseError, "top-level JSON value must be an object");
  detail::FlatConfig flat;
  auto scalar = [](const nlohmann::json& v) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) return format_double(v.get<double>());
    fail(ErrorCode::ParseError, "unsupported JSON value " + v.dump());
  };
  for (const auto& [sec, node] : j.items()) {
    if (!node.is_object()) fail(ErrorCode::ParseError, "section '" + sec + "' must be an object");
    for (const auto& [key, v] : node.items()) {
      std::string text_value;
      if (v.is_array()) {
        for (size_t i = 0; i < v.size(); ++i) text_value += (i ? "," : "") + scalar(v[i]);
      } else {
        text_value = scalar(v);
      }
      flat.push_back({sec + "." + key, text_value});
    }
  }
  return detail::apply_flat(flat, base);
}

/// INI unless the first non-blank character opens a JSON object.
inline RunConfig parse_config(const std::string& text, const RunConfig& base = {}) {
  size_t p = text.find_first_not_of(" \t\r\n");
  if (p != std::string::npos && text[p] == '{') return parse_json(text, base);
  return parse_ini(text, base);
}

inline RunConfig load_config(const std::filesystem::path& path, const RunConfig& base = {}) {
  return parse_config(read_file(path), base);
}

inline std::string emit_ini(const RunConfig& c) {
  std::string out, section;
  for (const auto& f : detail::config_fields()) {
    if (f.section != section) {
      out += (section.empty() ? "" : "\n") + std::string("[") + f.section + "]\n";
      section = f.section;
    }
    out += f.key + " = " + f.get(c) + "\n";
  }
  return out;
}

inline nlohmann::ordered_json emit_json(const RunConfig& c) {
  using detail::FieldKind;
  nlohmann::ordered_json j;
  for (const auto& f : detail::config_fields()) {
    std::string v = f.get(c);
    auto& slot = j[f.section][f.key];
    switch (f.kind) {
      case FieldKind::number: {
        double x = detail::to_num(v);
        slot = x;
        break;
      }
      case FieldKind::integer: slot = std::stoull(v); break;
      case FieldKind::boolean: slot = v == "true"; break;
      case FieldKind::text: slot = v; break;
      case FieldKind::number_list: slot = detail::to_nums(v); break;
      case FieldKind::text_list: slot = detail::split_list(v); break;
    }
  }
  return j;
}

// --------------------------------------------------------------- presets

inline std::vector<std::string> preset_names() { return {"maxwellian-sanity", "indicator-gevrey"}; }

inline RunConfig preset(const std::string& name) {
  RunConfig c;
  if (name == "maxwellian-sanity") {
    c.initial.profile = "gaussian";
    c.integrator.T = 1.0;
    c.integrator.outputs = 11;
    return c;
  }
  if (name == "indicator-gevrey") {
    c.initial.profile = "indicator";
    c.kernel.s = 0.25;
    c.diagnostics.s_prime = 0.2;
    c.integrator.T = 0.5;
    c.integrator.outputs = 11;
    return c;
  }
  fail(ErrorCode::ConfigError, "unknown preset '" + name + "'");
}

// ------------------------------------------------------------ conversions

inline Profile initial_profile(const RunConfig& c) {
  const auto& i = c.initial;
  if (i.profile == "gaussian") return Gaussian{i.mass, i.temperature, 0.0};
  if (i.profile == "indicator") return Indicator{i.mass, i.half_width};
  if (i.profile == "two_bump") return TwoBump{i.mass, i.centers, i.widths};
  fail(ErrorCode::ConfigError, "initial.profile: unknown profile '" + i.profile + "'");
}

inline SimulateOptions simulate_options(const RunConfig& c) {
  SimulateOptions o;
  o.scheme = c.integrator.scheme;
  o.dt = c.integrator.dt;
  o.adaptive.reltol = c.integrator.reltol;
  o.adaptive.abstol = c.integrator.abstol;
  o.record_entropy = c.diagnostics.entropy;
  return o;
}

inline ProbeConfig probe_config(const RunConfig& c) {
  ProbeConfig p;
  p.kernel = c.kernel;
  p.tol = c.quad_tol;
  p.seed = c.seed;
  p.grid = c.probe.grid;
  p.symbol_samples = c.probe.symbol_samples;
  p.random_pairs = c.probe.random_pairs;
  p.s_prime = c.diagnostics.s_prime;
  p.c0 = c.diagnostics.c0;
  p.horizon = c.probe.horizon;
  p.deltas = c.diagnostics.deltas;
  p.times = c.probe.times;
  p.poly_N = c.probe.poly_N;
  return p;
}

}  // namespace kaclab
