#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "kaclab/error.hpp"
#include "kaclab/evolve.hpp"
#include "kaclab/spectral.hpp"

namespace kaclab {

inline constexpr double kMaxExponent = 700.0;

/**
 * Exponential mollifier G_δ(t, ξ) = e^{φ}/(1 + δ e^{φ}), φ = c0 t ⟨ξ⟩^{2s'}.
 * Evaluated as 1/(e^{−φ} + δ) so that large φ saturates at 1/δ instead of
 * overflowing.
 */
struct GevreyMultiplier {
  double c0 = 1.0;
  double t = 0.0;
  double s_prime = 0.2;
  double delta = 1e-3;

  void validate() const {
    if (!(c0 >= 0.0) || !std::isfinite(c0)) fail(ErrorCode::DomainError, "c0 must be >= 0");
    if (!(t >= 0.0) || !std::isfinite(t)) fail(ErrorCode::DomainError, "multiplier time must be >= 0");
    if (!(s_prime > 0.0 && s_prime < 1.0)) fail(ErrorCode::DomainError, "s' must lie in (0, 1)");
    if (!(delta > 0.0 && delta <= 1.0)) fail(ErrorCode::DomainError, "delta must lie in (0, 1]");
  }

  double phi(double xi) const { return c0 * t * std::pow(1.0 + xi * xi, s_prime); }

  double log_symbol(double xi) const {
    double p = phi(xi);
    if (p > kMaxExponent) fail(ErrorCode::Overflow, "log-symbol exponent above 700");
    return -std::log(std::exp(-p) + delta);
  }

  double symbol(double xi) const {
    double p = phi(xi);
    if (p > kMaxExponent) fail(ErrorCode::Overflow, "log-symbol exponent above 700");
    return 1.0 / (std::exp(-p) + delta);
  }

  /// 1/(1 + δ e^{φ}), the factor shared by all derivative formulas.
  double damping(double xi) const { return 1.0 / (1.0 + delta * std::exp(phi(xi))); }

  double d_t(double xi) const { return c0 * std::pow(1.0 + xi * xi, s_prime) * symbol(xi) * damping(xi); }

  double d_xi(double xi) const {
    return 2.0 * s_prime * c0 * t * std::pow(1.0 + xi * xi, s_prime - 1.0) * xi * symbol(xi) * damping(xi);
  }

  double d_xi2(double xi) const {
    const double q = 1.0 + xi * xi;
    const double a = 2.0 * s_prime * c0 * t * std::pow(q, s_prime - 1.0) * xi;
    const double e = delta * std::exp(phi(xi));
    const double g = symbol(xi);
    const double first = a * a * g * (1.0 - e) / ((1.0 + e) * (1.0 + e));
    const double second = 2.0 * s_prime * c0 * t *
                          (std::pow(q, s_prime - 1.0) + 2.0 * (s_prime - 1.0) * xi * xi * std::pow(q, s_prime - 2.0)) *
                          g / (1.0 + e);
    return first + second;
  }

  /// The δ → 0 limit e^{φ}.
  double limit(double xi) const {
    double p = phi(xi);
    if (p > kMaxExponent) fail(ErrorCode::Overflow, "log-symbol exponent above 700");
    return std::exp(p);
  }
};

/**
 * Polynomial mollifier M_δ(t, ξ) = ⟨ξ⟩^{tN−1}(1 + δξ²)^{−N0} with the damping
 * order tied to the horizon by 2N0 = T0·N + 4.
 */
struct PolyMultiplier {
  double N = 1.0;
  double T0 = 1.0;
  double t = 0.0;
  double delta = 1e-3;

  double N0() const { return 0.5 * (T0 * N + 4.0); }

  void validate() const {
    if (!(N > 0.0) || !(T0 > 0.0)) fail(ErrorCode::DomainError, "N and T0 must be positive");
    if (!(t >= 0.0 && t <= T0)) fail(ErrorCode::DomainError, "t must lie in [0, T0]");
    if (!(delta > 0.0 && delta < 1.0)) fail(ErrorCode::DomainError, "delta must lie in (0, 1)");
  }

  double log_symbol(double xi) const {
    return 0.5 * (t * N - 1.0) * std::log1p(xi * xi) - N0() * std::log1p(delta * xi * xi);
  }
  double symbol(double xi) const {
    double l = log_symbol(xi);
    if (l > kMaxExponent) fail(ErrorCode::Overflow, "log-symbol exponent above 700");
    return std::exp(l);
  }
  double d_t(double xi) const { return N * 0.5 * std::log1p(xi * xi) * symbol(xi); }
  double d_xi(double xi) const {
    return symbol(xi) * ((t * N - 1.0) * xi / (1.0 + xi * xi) - 2.0 * N0() * delta * xi / (1.0 + delta * xi * xi));
  }
};

using Multiplier = std::variant<GevreyMultiplier, PolyMultiplier>;

inline double multiplier_symbol(const Multiplier& m, double xi) {
  return std::visit([xi](const auto& x) { return x.symbol(xi); }, m);
}

inline SpectralState apply_multiplier(const SpectralState& st, const Multiplier& m) {
  std::visit([](const auto& x) { x.validate(); }, m);
  if (st.values.size() != static_cast<size_t>(st.grid.n)) fail(ErrorCode::DomainError, "state size does not match grid");
  SpectralState out = st;
  for (int j = 0; j < st.grid.n; ++j) out.values[j] *= multiplier_symbol(m, st.grid.xi(j));
  return out;
}

// ------------------------------------------------------------ smoothing fit

struct GevreyFitOptions {
  double floor = 1e-12;
  double top_exclusion = 0.1;       // fraction of [0, Ξ] dropped at the top
  double envelope_width = kPi;      // RMS window in ξ
  int min_points = 8;
};

struct GevreyFitPoint {
  double t = 0.0;
  double c = 0.0;          // fitted rate
  double intercept = 0.0;
  double residual = 0.0;   // RMS misfit of the linear model
  double c_stderr = 0.0;   // standard error of the fitted rate
  double window_lo = 0.0;  // frequency range used
  double window_hi = 0.0;
  int points = 0;
  bool saturated = false;  // envelope fell below the floor inside the nominal window
};

namespace detail {

/// RMS of |f̂| over a window of the given width centred at each node, with even reflection at 0.
inline std::vector<double> rms_envelope(const SpectralState& st, double width) {
  const int n = st.grid.n;
  const double h = st.grid.dxi();
  const int half = std::max(1, static_cast<int>(std::lround(0.5 * width / h)));
  std::vector<double> sq(n), out(n);
  for (int j = 0; j < n; ++j) sq[j] = st.values[j] * st.values[j];
  for (int j = 0; j < n; ++j) {
    int lo = j - half, hi = std::min(n - 1, j + half);
    double s = 0.0;
    for (int i = lo; i <= hi; ++i) s += sq[std::abs(i)];
    out[j] = std::sqrt(s / (hi - lo + 1));
  }
  return out;
}

struct LineFit {
  double slope = 0.0, intercept = 0.0, rms = 0.0, slope_stderr = 0.0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  double mx = sx / n, my = sy / n, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) fail(ErrorCode::DegenerateFit, "fit abscissae coincide");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    double r = y[i] - f.intercept - f.slope * x[i];
    ss += r * r;
  }
  f.rms = std::sqrt(ss / n);
  f.slope_stderr = n > 2 ? std::sqrt(ss / (n - 2) / sxx) : 0.0;
  return f;
}

}  // namespace detail

/**
 * Smoothing rate c(t) from −log(E(t, ξ)/E(0, ξ)) ≈ a + c⟨ξ⟩^{2s'}, where E
 * is the windowed RMS envelope of |f̂|. Measuring against the initial
 * envelope removes the datum's own algebraic decay and the zeros of its
 * transform, so c(0) = 0 and c(t) isolates the growth of the exponential
 * weight. Frequencies enter while both envelopes exceed the floor, below
 * (1 − top_exclusion)·Ξ.
 */
inline std::vector<GevreyFitPoint> gevrey_fit(const Trajectory& tr, double s_prime, const GevreyFitOptions& opt = {}) {
  if (tr.snapshots.empty()) fail(ErrorCode::DomainError, "trajectory has no snapshots");
  if (!(s_prime > 0.0 && s_prime < 1.0)) fail(ErrorCode::DomainError, "s' must lie in (0, 1)");
  const SpectralState& ref = tr.snapshots.front();
  const GridSpec& g = ref.grid;
  const auto e0 = detail::rms_envelope(ref, opt.envelope_width);
  const double cap = (1.0 - opt.top_exclusion) * g.xi_max;
  std::vector<GevreyFitPoint> out;
  for (const SpectralState& st : tr.snapshots) {
    if (!(st.grid == g)) fail(ErrorCode::DomainError, "snapshots live on different grids");
    const auto e = detail::rms_envelope(st, opt.envelope_width);
    std::vector<double> x, y;
    GevreyFitPoint p;
    p.t = st.time;
    for (int j = 0; j < g.n && g.xi(j) <= cap; ++j) {
      if (e[j] <= opt.floor || e0[j] <= opt.floor) {
        p.saturated = true;
        break;
      }
      x.push_back(std::pow(1.0 + g.xi(j) * g.xi(j), s_prime));
      y.push_back(-std::log(e[j] / e0[j]));
      if (x.size() == 1) p.window_lo = g.xi(j);
      p.window_hi = g.xi(j);
    }
    p.points = static_cast<int>(x.size());
    if (p.points < opt.min_points)
      fail(ErrorCode::WindowTooSmall, "only " + std::to_string(p.points) + " frequencies above the floor at t=" +
                                          std::to_string(st.time));
    auto f = detail::fit_line(x, y);
    p.c = f.slope;
    p.intercept = f.intercept;
    p.residual = f.rms;
    p.c_stderr = f.slope_stderr;
    out.push_back(p);
  }
  return out;
}

/// Largest c0 with c(t) >= c0·t at every fitted time t > 0; 0 when none is positive.
inline double rate_constant(const std::vector<GevreyFitPoint>& fit) {
  double c0 = std::numeric_limits<double>::infinity();
  for (const auto& p : fit)
    if (p.t > 0.0) c0 = std::min(c0, p.c / p.t);
  return std::isfinite(c0) ? std::max(c0, 0.0) : 0.0;
}

// ----------------------------------------------------- a-priori estimate

struct AprioriPoint {
  double t = 0.0;
  double y = 0.0;          // ‖G_δ f(t)‖_{L²₁}
  double dy_dt = 0.0;      // finite-difference derivative
  double bound_rhs = 0.0;  // C1·y + C2·y^p with the fitted constants
  double ode_bound = 0.0;  // explicit solution of y' = C1 y + C2 y^p from y(0); inf past T*
};

struct AprioriReport {
  std::vector<AprioriPoint> points;
  double C1 = 0.0, C2 = 0.0;
  double exponent = 0.0;   // p = s'/(s − s') + 1
  double t_star = 0.0;     // blow-up time of the comparison ODE (inf if none)
  bool within_bound = true;
  int oscillations = 0;    // sign changes of dy/dt above the difference noise
};

namespace detail {

/// Derivative of samples on a possibly nonuniform time grid: three-point
/// second-order formulas, one-sided at the ends.
inline std::vector<double> time_derivative(const std::vector<double>& t, const std::vector<double>& y) {
  const size_t K = t.size();
  std::vector<double> d(K, 0.0);
  if (K < 2) return d;
  if (K == 2) {
    d[0] = d[1] = (y[1] - y[0]) / (t[1] - t[0]);
    return d;
  }
  auto three = [&](size_t a, size_t b, size_t c, size_t at) {
    // derivative at t[at] of the parabola through the three points
    double ta = t[a], tb = t[b], tc = t[c], x = t[at];
    double la = ((x - tb) + (x - tc)) / ((ta - tb) * (ta - tc));
    double lb = ((x - ta) + (x - tc)) / ((tb - ta) * (tb - tc));
    double lc = ((x - ta) + (x - tb)) / ((tc - ta) * (tc - tb));
    return la * y[a] + lb * y[b] + lc * y[c];
  };
  d[0] = three(0, 1, 2, 0);
  for (size_t k = 1; k + 1 < K; ++k) d[k] = three(k - 1, k, k + 1, k);
  d[K - 1] = three(K - 3, K - 2, K - 1, K - 1);
  return d;
}

/**
 * Smallest (C1, C2) >= 0 in the sense of the total bound Σ(C1 y_k + C2 y_k^p)
 * subject to d_k <= C1 y_k + C2 y_k^p. Two unknowns, so the vertices of the
 * feasible polygon are enumerated directly.
 */
inline std::pair<double, double> fit_comparison_constants(const std::vector<double>& y, const std::vector<double>& yp,
                                                          const std::vector<double>& d) {
  const size_t K = y.size();
  bool any = false;
  for (double v : d) any = any || v > 0.0;
  if (!any) return {0.0, 0.0};
  double sy = 0.0, syp = 0.0;
  for (size_t k = 0; k < K; ++k) {
    sy += y[k];
    syp += yp[k];
  }
  auto feasible = [&](double a, double b) {
    if (a < 0.0 || b < 0.0 || !std::isfinite(a) || !std::isfinite(b)) return false;
    for (size_t k = 0; k < K; ++k)
      if (d[k] > (a * y[k] + b * yp[k]) * (1.0 + 1e-12) + 1e-300) return false;
    return true;
  };
  double best = std::numeric_limits<double>::infinity();
  std::pair<double, double> arg{0.0, 0.0};
  auto consider = [&](double a, double b) {
    if (!feasible(a, b)) return;
    double obj = a * sy + b * syp;
    if (obj < best) {
      best = obj;
      arg = {a, b};
    }
  };
  double a_only = 0.0, b_only = 0.0;
  for (size_t k = 0; k < K; ++k) {
    a_only = std::max(a_only, d[k] / y[k]);
    b_only = std::max(b_only, d[k] / yp[k]);
  }
  consider(a_only, 0.0);
  consider(0.0, b_only);
  for (size_t i = 0; i < K; ++i)
    for (size_t j = i + 1; j < K; ++j) {
      double det = y[i] * yp[j] - y[j] * yp[i];
      if (det == 0.0) continue;
      consider((d[i] * yp[j] - d[j] * yp[i]) / det, (y[i] * d[j] - y[j] * d[i]) / det);
    }
  for (size_t k = 0; k < K; ++k) {
    if (d[k] <= 0.0) continue;
    consider(d[k] / y[k], 0.0);
    consider(0.0, d[k] / yp[k]);
  }
  return arg;
}

}  // namespace detail

/**
 * Tracks y(t) = ‖G_δ(t) f(t)‖_{L²₁} along a trajectory and fits the
 * comparison inequality y' <= C1 y + C2 y^p, p = s'/(s − s') + 1. The fitted
 * constants carry a 5% guard. With q = p − 1 the comparison ODE integrates to
 *   y(t)^{−q} = (y0^{−q} + C2/C1) e^{−q C1 t} − C2/C1,
 * which blows up at T* = log(1 + C1/(C2 y0^q))/(q C1).
 */
inline AprioriReport apriori_tracker(const Trajectory& tr, double c0, double s_prime, double delta, double s) {
  if (!(s_prime > 0.0 && s_prime < s)) fail(ErrorCode::DomainError, "need 0 < s' < s");
  const size_t K = tr.snapshots.size();
  if (K < 3) fail(ErrorCode::InsufficientSamples, "a-priori tracker needs at least 3 snapshots");
  AprioriReport rep;
  rep.exponent = s_prime / (s - s_prime) + 1.0;
  const double q = rep.exponent - 1.0;
  std::vector<double> t(K), y(K), yp(K);
  for (size_t k = 0; k < K; ++k) {
    const SpectralState& st = tr.snapshots[k];
    GevreyMultiplier G{c0, st.time, s_prime, delta};
    t[k] = st.time;
    y[k] = norm_l2_weighted1(apply_multiplier(st, G));
    yp[k] = std::pow(y[k], rep.exponent);
  }
  for (size_t k = 1; k < K; ++k)
    if (!(t[k] > t[k - 1])) fail(ErrorCode::DomainError, "snapshot times must increase");
  auto d = detail::time_derivative(t, y);
  double ymax = 0.0;
  for (double v : y) ymax = std::max(ymax, std::abs(v));
  // Growth below this rate is indistinguishable from differencing round-off.
  const double noise = 1e-9 * ymax / std::max(t.back() - t.front(), 1e-300);
  std::vector<double> d_fit(K);
  for (size_t k = 0; k < K; ++k) d_fit[k] = d[k] - noise;
  auto [a, b] = detail::fit_comparison_constants(y, yp, d_fit);
  rep.C1 = 1.05 * a;
  rep.C2 = 1.05 * b;

  const double y0 = y[0];
  if (rep.C2 == 0.0) {
    rep.t_star = std::numeric_limits<double>::infinity();
  } else if (rep.C1 == 0.0) {
    rep.t_star = 1.0 / (q * rep.C2 * std::pow(y0, q));
  } else {
    rep.t_star = std::log1p(rep.C1 / (rep.C2 * std::pow(y0, q))) / (q * rep.C1);
  }
  auto ode = [&](double tt) {
    double dt = tt - t[0];
    if (dt >= rep.t_star) return std::numeric_limits<double>::infinity();
    if (rep.C2 == 0.0) return y0 * std::exp(rep.C1 * dt);
    double z0 = std::pow(y0, -q);
    double z = rep.C1 == 0.0 ? z0 - q * rep.C2 * dt
                             : (z0 + rep.C2 / rep.C1) * std::exp(-q * rep.C1 * dt) - rep.C2 / rep.C1;
    return z > 0.0 ? std::pow(z, -1.0 / q) : std::numeric_limits<double>::infinity();
  };

  int last_sign = 0;
  for (size_t k = 0; k < K; ++k) {
    AprioriPoint p;
    p.t = t[k];
    p.y = y[k];
    p.dy_dt = d[k];
    p.bound_rhs = rep.C1 * y[k] + rep.C2 * yp[k];
    p.ode_bound = ode(t[k]);
    if (p.y > p.ode_bound * (1.0 + 1e-9)) rep.within_bound = false;
    rep.points.push_back(p);
    int sg = d[k] > noise ? 1 : (d[k] < -noise ? -1 : 0);
    if (sg != 0) {
      if (last_sign != 0 && sg != last_sign) ++rep.oscillations;
      last_sign = sg;
    }
  }
  return rep;
}

}  // namespace kaclab
