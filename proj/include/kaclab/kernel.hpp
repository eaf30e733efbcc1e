#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <limits>
#include <numbers>
#include <queue>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "kaclab/error.hpp"

namespace kaclab {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kHalfPi = std::numbers::pi / 2;

enum class KernelFamily { power_law, debye_yukawa, truncated_power_law, reduced_3d };

// Shapes of a 3D angular kernel b(cos θ) on θ ∈ (0, π/2].
//   exact_power: sinθ·b(cosθ) = K θ^{-1-2s}
//   sine_power:  sinθ·b(cosθ) = K cosθ / sin^{1+2s}θ
//   cutoff:      b ≡ K
enum class Kernel3DShape { exact_power, sine_power, cutoff };

inline std::string_view to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::power_law: return "power_law";
    case KernelFamily::debye_yukawa: return "debye_yukawa";
    case KernelFamily::truncated_power_law: return "truncated_power_law";
    case KernelFamily::reduced_3d: return "reduced_3d";
  }
  return "?";
}

inline KernelFamily kernel_family_from_string(std::string_view s) {
  if (s == "power_law") return KernelFamily::power_law;
  if (s == "debye_yukawa") return KernelFamily::debye_yukawa;
  if (s == "truncated_power_law" || s == "truncated") return KernelFamily::truncated_power_law;
  if (s == "reduced_3d") return KernelFamily::reduced_3d;
  fail(ErrorCode::ConfigError, "unknown kernel family '" + std::string(s) + "'");
}

inline std::string_view to_string(Kernel3DShape s) {
  switch (s) {
    case Kernel3DShape::exact_power: return "exact_power";
    case Kernel3DShape::sine_power: return "sine_power";
    case Kernel3DShape::cutoff: return "cutoff";
  }
  return "?";
}

inline Kernel3DShape kernel3d_shape_from_string(std::string_view s) {
  if (s == "exact_power") return Kernel3DShape::exact_power;
  if (s == "sine_power") return Kernel3DShape::sine_power;
  if (s == "cutoff") return Kernel3DShape::cutoff;
  fail(ErrorCode::ConfigError, "unknown 3D kernel shape '" + std::string(s) + "'");
}

/**
 * Angular cross-section β(θ) on [-π/2, π/2].
 *
 * The reduced_3d family is what convert_kernel emits for a radial 3D kernel:
 * β(θ) = π|sinθ|·b(cosθ) with b described by (shape3d, K3d, s), and
 * half_angle = true so that Bobylev sampling uses θ/2.
 */
struct KernelSpec {
  KernelFamily family = KernelFamily::power_law;
  double C0 = 1.0;
  double s = 0.25;
  double m = 1.0;
  double theta_cut = kHalfPi;
  double K3d = 0.0;
  Kernel3DShape shape3d = Kernel3DShape::exact_power;
  bool half_angle = false;

  void validate() const {
    if (!(s > 0.0 && s < 1.0)) fail(ErrorCode::DomainError, "kernel exponent s must lie in (0,1)");
    if (family == KernelFamily::reduced_3d) {
      if (!(K3d >= 0.0) || !std::isfinite(K3d)) fail(ErrorCode::DomainError, "K3d must be finite and >= 0");
      return;
    }
    if (!(C0 > 0.0) || !std::isfinite(C0)) fail(ErrorCode::DomainError, "C0 must be positive");
    if (family == KernelFamily::debye_yukawa && !(m > 0.0)) fail(ErrorCode::DomainError, "m must be positive");
    if (family == KernelFamily::truncated_power_law && !(theta_cut > 0.0 && theta_cut <= kHalfPi))
      fail(ErrorCode::DomainError, "theta_cut must lie in (0, pi/2]");
  }

  /// True when ∫β diverges at θ = 0 (a genuine grazing singularity).
  bool singular() const {
    switch (family) {
      case KernelFamily::power_law:
      case KernelFamily::debye_yukawa: return true;
      case KernelFamily::truncated_power_law: return false;
      case KernelFamily::reduced_3d: return shape3d != Kernel3DShape::cutoff && K3d > 0.0;
    }
    return true;
  }
};

namespace detail {

// β on (0, π/2] without range checks; a = |θ|.
inline double beta_positive(const KernelSpec& k, double a) {
  switch (k.family) {
    case KernelFamily::power_law:
      return k.C0 * std::cos(a) / std::pow(std::sin(a), 1.0 + 2.0 * k.s);
    case KernelFamily::truncated_power_law:
      if (a < k.theta_cut) return 0.0;
      return k.C0 * std::cos(a) / std::pow(std::sin(a), 1.0 + 2.0 * k.s);
    case KernelFamily::debye_yukawa: {
      // (log 1/|θ|)^m is taken as its positive part, so β vanishes for |θ| >= 1.
      if (a >= 1.0) return 0.0;
      return k.C0 * std::cos(a) / std::sin(a) * std::pow(-std::log(a), k.m);
    }
    case KernelFamily::reduced_3d:
      switch (k.shape3d) {
        case Kernel3DShape::exact_power: return kPi * k.K3d * std::pow(a, -1.0 - 2.0 * k.s);
        case Kernel3DShape::sine_power:
          return kPi * k.K3d * std::cos(a) / std::pow(std::sin(a), 1.0 + 2.0 * k.s);
        case Kernel3DShape::cutoff: return kPi * k.K3d * std::sin(a);
      }
  }
  return 0.0;
}

}  // namespace detail

inline double eval_beta(const KernelSpec& spec, double theta) {
  if (std::isnan(theta) || std::abs(theta) > kHalfPi) fail(ErrorCode::DomainError, "theta outside [-pi/2, pi/2]");
  if (theta == 0.0) fail(ErrorCode::SingularPoint, "beta is singular at theta = 0");
  double a = std::abs(theta);
  // cos(π/2) is 6e-17 in floating point; the family formulas vanish there exactly.
  if (a == kHalfPi && spec.family != KernelFamily::reduced_3d) return 0.0;
  return detail::beta_positive(spec, a);
}

/**
 * Upper bound for ∫_0^a β(θ) θ^p dθ with p ∈ {1, 2}, used to certify the
 * discarded inner interval of the graded mesh. Returns +inf when the integral
 * diverges.
 */
inline double tail_bound(const KernelSpec& k, double a, int p) {
  if (a <= 0.0) return 0.0;
  const double s2 = 2.0 * k.s;
  auto power_tail = [&](double amp, double geometric) {
    if (p <= s2) return std::numeric_limits<double>::infinity();
    return amp * geometric * std::pow(a, p - s2) / (p - s2);
  };
  // sinθ >= 2θ/π on [0, π/2].
  const double sine_factor = std::pow(kHalfPi, 1.0 + s2);
  switch (k.family) {
    case KernelFamily::power_law: return power_tail(k.C0, sine_factor);
    case KernelFamily::truncated_power_law:
      if (a <= k.theta_cut) return 0.0;
      return power_tail(k.C0, sine_factor);
    case KernelFamily::debye_yukawa: {
      // β <= (π/2) θ^{-1} log(1/θ)^m ; ∫_0^a θ^{p-1} log(1/θ)^m = Γ(m+1, p L) / p^{m+1}, L = log(1/a).
      double aa = std::min(a, 1.0);
      double L = -std::log(aa);
      double g = boost::math::tgamma(k.m + 1.0, p * L);
      return kHalfPi * g / std::pow(static_cast<double>(p), k.m + 1.0);
    }
    case KernelFamily::reduced_3d:
      switch (k.shape3d) {
        case Kernel3DShape::exact_power: return power_tail(kPi * k.K3d, 1.0);
        case Kernel3DShape::sine_power: return power_tail(kPi * k.K3d, sine_factor);
        case Kernel3DShape::cutoff: return kPi * k.K3d * std::pow(a, p + 2.0) / (p + 2.0);
      }
  }
  return std::numeric_limits<double>::infinity();
}

/**
 * Leading term of ∫_0^a β(θ) θ^p dθ for kernels with a pure power singularity,
 * amp·a^{p−2s}/(p−2s). The neglected factor is 1 + O(θ²) with coefficient
 * below 1/3, so a² bounds the relative error. NaN where no such form exists.
 */
inline double tail_leading(const KernelSpec& k, double a, int p) {
  const double e = p - 2.0 * k.s;
  if (!(e > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  switch (k.family) {
    case KernelFamily::power_law:
    case KernelFamily::truncated_power_law: return k.C0 * std::pow(a, e) / e;
    case KernelFamily::reduced_3d:
      if (k.shape3d == Kernel3DShape::cutoff) break;
      return kPi * k.K3d * std::pow(a, e) / e;
    case KernelFamily::debye_yukawa: break;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

// Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15).
namespace gk15 {
inline constexpr std::array<double, 8> xgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> wgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> wg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
}  // namespace gk15

/// One panel [lo, hi] with its 15 Kronrod nodes and β-weighted weights.
struct Panel {
  double lo = 0.0, hi = 0.0;
  std::array<double, 15> theta{};
  std::array<double, 15> wk{};  // Kronrod weight * β(θ) * half-length
  std::array<double, 15> wg{};  // Gauss weight * β(θ) * half-length (zero at Kronrod-only nodes)
  std::array<double, 15> wabs{};  // Kronrod weight * half-length, for the QUADPACK error heuristic
};

inline Panel make_panel(const KernelSpec& k, double lo, double hi) {
  Panel p;
  p.lo = lo;
  p.hi = hi;
  const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
  for (int i = 0; i < 15; ++i) {
    int idx = i <= 7 ? i : 14 - i;
    double th = c + (i < 7 ? -h : h) * gk15::xgk[idx];
    double b = detail::beta_positive(k, th);
    p.theta[i] = th;
    p.wk[i] = gk15::wgk[idx] * h * b;
    p.wabs[i] = gk15::wgk[idx] * h;
    // Gauss nodes sit at the odd Kronrod indices (the centre is index 7).
    p.wg[i] = idx % 2 == 1 ? gk15::wg[idx / 2] * h * b : 0.0;
  }
  return p;
}

/**
 * Graded panel mesh on (theta_min, π/2]: level k covers
 * [π/2·2^{-k-1}, π/2·2^{-k}], split into panels_per_level equal panels.
 * Levels are built lazily up to the depth a given integrand needs; the
 * β-weighted node tables are computed once per rule.
 */
struct QuadratureRule {
  double tol = 1e-9;
  double theta_min = 1e-40;
  int panels_per_level = 1;
  int max_subdivisions = 4000;
  int min_levels = 4;
  KernelSpec spec;
  std::vector<std::vector<Panel>> levels;  // levels[k] = panels of level k, ordered from high θ to low θ

  static QuadratureRule make(const KernelSpec& k, double tol, double theta_min = 1e-40, int panels_per_level = 1) {
    k.validate();
    if (!(tol > 0.0)) fail(ErrorCode::DomainError, "quadrature tol must be positive");
    if (!(theta_min > 0.0 && theta_min < kHalfPi)) fail(ErrorCode::DomainError, "theta_min out of range");
    if (panels_per_level < 1) fail(ErrorCode::DomainError, "panels_per_level must be >= 1");
    QuadratureRule r;
    r.tol = tol;
    r.theta_min = theta_min;
    r.panels_per_level = panels_per_level;
    r.spec = k;
    int depth = static_cast<int>(std::ceil(std::log2(kHalfPi / theta_min)));
    for (int lev = 0; lev < depth; ++lev) {
      double hi = kHalfPi * std::ldexp(1.0, -lev);
      double lo = hi / 2.0;
      std::vector<double> cuts;
      for (int q = 0; q <= panels_per_level; ++q) cuts.push_back(hi - (hi - lo) * q / panels_per_level);
      if (k.family == KernelFamily::truncated_power_law && k.theta_cut < hi && k.theta_cut > lo) {
        cuts.push_back(k.theta_cut);
        std::sort(cuts.begin(), cuts.end(), std::greater<>());
      }
      std::vector<Panel> panels;
      for (size_t q = 0; q + 1 < cuts.size(); ++q) panels.push_back(make_panel(k, cuts[q + 1], cuts[q]));
      r.levels.push_back(std::move(panels));
      // Below the truncation angle β vanishes, so deeper levels carry nothing.
      if (k.family == KernelFamily::truncated_power_law && lo <= k.theta_cut) break;
    }
    return r;
  }
};

struct PanelResult {
  double value = 0.0;
  double error = 0.0;
  double max_ratio = 0.0;  // max |h(θ)| / θ^p over the nodes
  double inner_ratio = 0.0;  // h(θ)/θ^p at the smallest node
};

// A batch integrand fills out[i] = h(theta[i]) for i < count.
template <class F>
concept BatchIntegrand = requires(F f, const double* t, double* o, int n) { f(t, o, n); };
template <class F>
concept ScalarIntegrand = requires(F f, double t) {
  { f(t) } -> std::convertible_to<double>;
};

namespace detail {

template <class F>
void eval_batch(F& f, const double* t, double* out, int n) {
  if constexpr (BatchIntegrand<F>) f(t, out, n);
  else
    for (int i = 0; i < n; ++i) out[i] = f(t[i]);
}

template <class F>
PanelResult run_panel(const Panel& p, F& f, int order) {
  std::array<double, 15> h;
  eval_batch(f, p.theta.data(), h.data(), 15);
  double rk = 0.0, rg = 0.0, rabs = 0.0;
  PanelResult res;
  std::array<double, 15> fw;
  double sum_plain_w = 0.0;
  for (int i = 0; i < 15; ++i) {
    if (!std::isfinite(h[i])) fail(ErrorCode::AccuracyNotReached, "non-finite integrand value");
    rk += p.wk[i] * h[i];
    rg += p.wg[i] * h[i];
    fw[i] = p.wk[i] * h[i];
    rabs += std::abs(fw[i]);
    sum_plain_w += p.wabs[i];
    res.max_ratio = std::max(res.max_ratio, std::abs(h[i]) / std::pow(p.theta[i], order));
  }
  res.inner_ratio = h[0] / std::pow(p.theta[0], order);
  // QUADPACK error heuristic on the β-weighted integrand.
  double mean = rk / sum_plain_w;
  double resasc = 0.0;
  for (int i = 0; i < 15; ++i) {
    double g = p.wabs[i] > 0.0 ? fw[i] / p.wabs[i] : 0.0;
    resasc += p.wabs[i] * std::abs(g - mean);
  }
  double err = std::abs(rk - rg);
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (rabs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(50.0 * eps * rabs, err);
  res.value = rk;
  res.error = err;
  return res;
}

}  // namespace detail

/**
 * ∫_0^{π/2} β(θ) h(θ) dθ for an integrand with |h(θ)| <= M θ^order near 0.
 *
 * Levels of the graded mesh are added until the tail bound
 * M·∫_0^a β θ^order, with M the largest |h|/θ^order seen on the innermost
 * level, drops below tol/2; the remaining budget drives global bisection of
 * the panel with the largest error estimate.
 *
 * When 2s is close to the order the bound decays too slowly to close before
 * theta_min. For power-law kernels the tail [0, a] is then added as
 * ρ·tail_leading(a), with ρ = h/θ^order at the innermost node; its error is
 * charged as (|ρ − ρ_prev| + |ρ|a²)·tail_bound(a), ρ_prev being the same
 * ratio one level up.
 */
template <class F>
double integrate_half(const QuadratureRule& rule, F&& h, int order = 2, double* error_out = nullptr,
                      double tol = 0.0) {
  const KernelSpec& k = rule.spec;
  if (!(tol > 0.0)) tol = rule.tol;
  struct Item {
    double lo, hi, value, error;
  };
  std::vector<Item> items;
  items.reserve(64);
  double tail = std::numeric_limits<double>::infinity();
  double tail_value = 0.0;
  double rho_prev = std::numeric_limits<double>::quiet_NaN();
  bool closed = false;
  const int nlev = static_cast<int>(rule.levels.size());
  for (int lev = 0; lev < nlev; ++lev) {
    double ratio = 0.0, rho = 0.0;
    for (const Panel& p : rule.levels[lev]) {
      PanelResult r = detail::run_panel(p, h, order);
      items.push_back({p.lo, p.hi, r.value, r.error});
      ratio = std::max(ratio, r.max_ratio);
      rho = r.inner_ratio;
    }
    double a = rule.levels[lev].back().lo;
    double tb = tail_bound(k, a, order);
    if (tb == 0.0) {
      tail = 0.0;
      closed = true;
      break;
    }
    tail = ratio * tb;
    if (lev + 1 >= rule.min_levels && tail <= tol / 2) {
      closed = true;
      break;
    }
    double lead = tail_leading(k, a, order);
    if (lev + 1 >= rule.min_levels && std::isfinite(lead) && std::isfinite(rho_prev)) {
      double err = (std::abs(rho - rho_prev) + std::abs(rho) * a * a) * tb;
      if (err <= tol / 2) {
        tail = err;
        tail_value = rho * lead;
        closed = true;
        break;
      }
    }
    rho_prev = rho;
  }
  if (!closed)
    fail(ErrorCode::AccuracyNotReached, "tail bound " + std::to_string(tail) + " above tol at theta_min");

  auto cmp = [&](size_t a, size_t b) {
    if (items[a].error != items[b].error) return items[a].error < items[b].error;
    return a > b;
  };
  std::priority_queue<size_t, std::vector<size_t>, decltype(cmp)> heap(cmp);
  double total_err = 0.0;
  for (size_t i = 0; i < items.size(); ++i) {
    heap.push(i);
    total_err += items[i].error;
  }
  const double budget = tol / 2;
  int splits = 0;
  while (total_err > budget) {
    if (splits >= rule.max_subdivisions)
      fail(ErrorCode::AccuracyNotReached, "error estimate " + std::to_string(total_err) + " after maximum refinement");
    size_t w = heap.top();
    heap.pop();
    Item it = items[w];
    double mid = 0.5 * (it.lo + it.hi);
    Panel a = make_panel(k, it.lo, mid), b = make_panel(k, mid, it.hi);
    PanelResult ra = detail::run_panel(a, h, order), rb = detail::run_panel(b, h, order);
    total_err += ra.error + rb.error - it.error;
    items[w] = {it.lo, mid, ra.value, ra.error};
    items.push_back({mid, it.hi, rb.value, rb.error});
    heap.push(w);
    heap.push(items.size() - 1);
    ++splits;
    // Recompute the running sum now and then to keep round-off from drifting.
    if (splits % 64 == 0) {
      total_err = 0.0;
      for (const Item& x : items) total_err += x.error;
    }
  }
  std::sort(items.begin(), items.end(), [](const Item& x, const Item& y) { return x.lo < y.lo; });
  double sum = 0.0;
  for (const Item& x : items) sum += x.value;
  if (error_out) *error_out = total_err + tail;
  return sum + tail_value;
}

/// ∫_{-π/2}^{π/2} β(θ) h(θ) dθ for an even integrand h.
template <class F>
double integrate_singular(const QuadratureRule& rule, F&& h, int order = 2, double tol = 0.0) {
  return 2.0 * integrate_half(rule, std::forward<F>(h), order, nullptr, tol);
}

enum class MomentKind { abs_theta, theta_sq, relax4 };

inline double kernel_moment(const KernelSpec& spec, MomentKind kind, double tol = 1e-10) {
  spec.validate();
  if (kind == MomentKind::abs_theta && spec.singular() && spec.s >= 0.5)
    fail(ErrorCode::DivergentMoment, "abs_theta moment requires s < 1/2");
  QuadratureRule rule = QuadratureRule::make(spec, tol / 2);
  switch (kind) {
    case MomentKind::abs_theta: return integrate_singular(rule, [](double t) { return t; }, 1);
    case MomentKind::theta_sq: return integrate_singular(rule, [](double t) { return t * t; });
    case MomentKind::relax4:
      return integrate_singular(rule, [](double t) {
        double s = std::sin(t), c = std::cos(t);
        return 2.0 * s * s * c * c;
      });
  }
  return 0.0;
}

}  // namespace kaclab
