#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "kaclab/collision.hpp"
#include "kaclab/error.hpp"
#include "kaclab/spectral.hpp"

namespace kaclab {

enum class Scheme { rk4, rk23_adaptive };

inline std::string_view to_string(Scheme s) { return s == Scheme::rk4 ? "rk4" : "rk23_adaptive"; }

inline Scheme scheme_from_string(std::string_view s) {
  if (s == "rk4") return Scheme::rk4;
  if (s == "rk23_adaptive" || s == "rk23") return Scheme::rk23_adaptive;
  fail(ErrorCode::ConfigError, "unknown integrator scheme '" + std::string(s) + "'");
}

struct AdaptiveOptions {
  double reltol = 1e-8;
  double abstol = 1e-12;
  int max_halvings = 20;
  double initial_dt = 0.0;  // 0 picks dt from the RHS scale
};

struct Trajectory {
  std::vector<SpectralState> snapshots;
  std::vector<double> times;
  std::vector<double> mass, energy, entropy, entropy_clamped, fourth_moment;
  std::vector<bool> entropy_reliable;
  int rhs_evaluations = 0;
};

namespace detail {

inline std::vector<double> axpy(const std::vector<double>& y, double a, const std::vector<double>& k) {
  std::vector<double> out(y.size());
  for (size_t i = 0; i < y.size(); ++i) out[i] = y[i] + a * k[i];
  return out;
}

struct RhsCounter {
  const KernelSpec& spec;
  const QuadratureRule& rule;
  GridSpec grid;
  int calls = 0;
  std::vector<double> operator()(const std::vector<double>& y) {
    ++calls;
    SpectralState st;
    st.grid = grid;
    st.values = y;
    return bobylev_rhs(st, spec, rule).values;
  }
};

inline std::vector<double> rk4_step(RhsCounter& f, const std::vector<double>& y, double dt) {
  auto k1 = f(y);
  auto k2 = f(axpy(y, 0.5 * dt, k1));
  auto k3 = f(axpy(y, 0.5 * dt, k2));
  auto k4 = f(axpy(y, dt, k3));
  std::vector<double> out(y.size());
  for (size_t i = 0; i < y.size(); ++i) out[i] = y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

/**
 * Bogacki–Shampine 3(2) pair with FSAL, advancing y from t to t_end.
 * `dt` carries the proposed step across calls.
 */
inline std::vector<double> rk23_advance(RhsCounter& f, std::vector<double> y, double t, double t_end, double& dt,
                                        const AdaptiveOptions& opt, std::vector<double>& k1, double& t_reached) {
  if (k1.empty()) k1 = f(y);
  if (dt <= 0.0) {
    double scale = 0.0, rate = 0.0;
    for (size_t i = 0; i < y.size(); ++i) {
      scale = std::max(scale, std::abs(y[i]));
      rate = std::max(rate, std::abs(k1[i]));
    }
    dt = rate > 0.0 ? 0.01 * std::max(scale, 1e-3) / rate : t_end - t;
  }
  int consecutive = 0;
  while (t < t_end) {
    double h = std::min(dt, t_end - t);
    bool last = h >= t_end - t;
    auto k2 = f(axpy(y, 0.5 * h, k1));
    auto k3 = f(axpy(y, 0.75 * h, k2));
    std::vector<double> ynew(y.size());
    for (size_t i = 0; i < y.size(); ++i) ynew[i] = y[i] + h * (2.0 / 9.0 * k1[i] + 1.0 / 3.0 * k2[i] + 4.0 / 9.0 * k3[i]);
    auto k4 = f(ynew);
    double err = 0.0;
    for (size_t i = 0; i < y.size(); ++i) {
      double e = h * (-5.0 / 72.0 * k1[i] + 1.0 / 12.0 * k2[i] + 1.0 / 9.0 * k3[i] - 1.0 / 8.0 * k4[i]);
      double sc = opt.abstol + opt.reltol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err = std::max(err, std::abs(e) / sc);
    }
    if (err <= 1.0) {
      t = last ? t_end : t + h;
      y = std::move(ynew);
      k1 = std::move(k4);
      consecutive = 0;
      double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -1.0 / 3.0), 0.2, 5.0);
      if (!last || fac < 1.0) dt = h * fac;
    } else {
      if (++consecutive > opt.max_halvings)
        fail(ErrorCode::StiffnessError, "step rejected more than " + std::to_string(opt.max_halvings) +
                                            " times at t=" + std::to_string(t));
      dt = h * std::max(0.2, 0.9 * std::pow(err, -1.0 / 3.0));
      dt = std::min(dt, 0.5 * h);
    }
  }
  t_reached = t;
  return y;
}

}  // namespace detail

/// One step of df̂/dt = bobylev_rhs over [t, t + dt].
inline SpectralState step(const SpectralState& st, double dt, const KernelSpec& spec, const QuadratureRule& rule,
                          Scheme scheme, const AdaptiveOptions& opt = {}) {
  if (!(dt >= 0.0) || !std::isfinite(dt)) fail(ErrorCode::DomainError, "dt must be >= 0");
  if (dt == 0.0) return st;
  detail::RhsCounter f{spec, rule, st.grid};
  SpectralState out = st;
  out.time = st.time + dt;
  if (scheme == Scheme::rk4) {
    out.values = detail::rk4_step(f, st.values, dt);
  } else {
    double h = opt.initial_dt > 0.0 ? opt.initial_dt : 0.0;
    std::vector<double> k1;
    double reached = 0.0;
    out.values = detail::rk23_advance(f, st.values, 0.0, dt, h, opt, k1, reached);
  }
  return out;
}

struct SimulateOptions {
  Scheme scheme = Scheme::rk4;
  double dt = 0.02;  // fixed step for rk4; initial step hint for rk23
  AdaptiveOptions adaptive;
  bool record_entropy = true;
};

inline std::vector<double> uniform_times(double T, int count) {
  if (count < 2) fail(ErrorCode::DomainError, "need at least two output times");
  std::vector<double> t(count);
  for (int i = 0; i < count; ++i) t[i] = T * i / (count - 1);
  t.back() = T;
  return t;
}

inline void record(Trajectory& tr, const SpectralState& st, bool with_entropy) {
  tr.snapshots.push_back(st);
  tr.times.push_back(st.time);
  tr.mass.push_back(st.values[0]);
  tr.energy.push_back(energy(st));
  tr.fourth_moment.push_back(fourth_moment(st));
  if (with_entropy) {
    EntropyResult e = entropy(st);
    tr.entropy.push_back(e.value);
    tr.entropy_clamped.push_back(e.clamped_negative_fraction);
    tr.entropy_reliable.push_back(e.reliable);
  }
}

/**
 * Integrates to T and records snapshots and monitors at each output time.
 * rk4 takes fixed steps of opt.dt, shortened to land on output times.
 */
inline Trajectory simulate(const SpectralState& init, const KernelSpec& spec, const QuadratureRule& rule, double T,
                           std::vector<double> output_times, const SimulateOptions& opt = {}) {
  if (!(T > 0.0)) fail(ErrorCode::DomainError, "horizon T must be positive");
  init.validate_density();
  std::sort(output_times.begin(), output_times.end());
  for (size_t i = 0; i < output_times.size(); ++i) {
    if (output_times[i] < 0.0 || output_times[i] > T * (1.0 + 1e-12))
      fail(ErrorCode::DomainError, "output time outside [0, T]");
    if (i > 0 && output_times[i] <= output_times[i - 1]) fail(ErrorCode::DomainError, "output times must be distinct");
  }
  if (opt.scheme == Scheme::rk4 && !(opt.dt > 0.0)) fail(ErrorCode::DomainError, "rk4 needs dt > 0");
  Trajectory tr;
  detail::RhsCounter f{spec, rule, init.grid};
  SpectralState cur = init;
  cur.time = 0.0;
  double t = 0.0;
  double h = opt.scheme == Scheme::rk23_adaptive ? opt.dt : 0.0;
  std::vector<double> k1;
  for (double target : output_times) {
    try {
      if (opt.scheme == Scheme::rk4) {
        // Number of equal steps that keeps each step at most dt.
        double span = target - t;
        if (span > 0.0) {
          long steps = static_cast<long>(std::ceil(span / opt.dt - 1e-9));
          double hh = span / steps;
          for (long q = 0; q < steps; ++q) cur.values = detail::rk4_step(f, cur.values, hh);
        }
        t = target;
      } else if (target > t) {
        double reached = t;
        cur.values = detail::rk23_advance(f, cur.values, t, target, h, opt.adaptive, k1, reached);
        t = target;
      }
    } catch (const Error& e) {
      fail(e.code(), std::string(e.what()) + " (while advancing from t=" + std::to_string(t) + ")");
    }
    cur.time = t;
    record(tr, cur, opt.record_entropy);
  }
  tr.rhs_evaluations = f.calls;
  return tr;
}

struct MomentFit {
  double lambda = 0.0;      // fitted relaxation rate (slope is −lambda)
  double intercept = 0.0;   // log|M4(0) − 3M2²/M0| from the fit
  double r_squared = 0.0;
  double asymptote = 0.0;   // 3 M2² / M0, the Gaussian value of M4
};

/**
 * Least-squares fit of log|M4(t) − 3M2²/M0| against t. For mass M0 the
 * moment law reads dM4/dt = λ₄(3M2² − M0 M4), so the fitted rate is λ₄·M0.
 */
inline MomentFit moment_track(const Trajectory& tr) {
  const size_t K = tr.times.size();
  if (K < 5) fail(ErrorCode::DegenerateFit, "moment fit needs at least 5 output times");
  double m0 = tr.mass.front(), m2 = tr.energy.front();
  double asym = 3.0 * m2 * m2 / m0;
  std::vector<double> x, y;
  for (size_t i = 0; i < K; ++i) {
    double d = tr.fourth_moment[i] - asym;
    if (std::abs(d) <= 1e-4 * asym) {
      if (i == 0) fail(ErrorCode::DegenerateFit, "fourth moment already at its Gaussian value");
      break;
    }
    x.push_back(tr.times[i]);
    y.push_back(std::log(std::abs(d)));
  }
  if (x.size() < 5) fail(ErrorCode::DegenerateFit, "fewer than 5 usable points in the moment series");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double den = n * sxx - sx * sx;
  if (den == 0.0) fail(ErrorCode::DegenerateFit, "output times coincide");
  double slope = (n * sxy - sx * sy) / den;
  double icpt = (sy - slope * sx) / n;
  double ybar = sy / n, ss_tot = 0, ss_res = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    double r = y[i] - (icpt + slope * x[i]);
    ss_res += r * r;
    ss_tot += (y[i] - ybar) * (y[i] - ybar);
  }
  MomentFit out;
  out.lambda = -slope;
  out.intercept = icpt;
  out.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
  out.asymptote = asym;
  return out;
}

}  // namespace kaclab
