#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <string_view>
#include <string>
#include <utility>
#include <vector>

#include "kaclab/collision.hpp"
#include "kaclab/error.hpp"
#include "kaclab/gevrey.hpp"
#include "kaclab/kernel.hpp"
#include "kaclab/parallel.hpp"
#include "kaclab/spectral.hpp"

namespace kaclab {

/**
 * Outcome of one inequality scan. Fitted constants are the smallest values
 * that make every sample pass, enlarged by a 5% guard (lower-bound constants
 * are shrunk by the same factor). Explicit constants are checked as stated.
 */
struct ProbeReport {
  std::string id;
  long samples = 0;
  long violations = 0;
  std::vector<std::pair<std::string, double>> constants;
  double worst_margin = std::numeric_limits<double>::infinity();  // min relative slack over samples
  std::string sampling;
  double tolerance = 0.0;

  bool passed() const { return violations == 0; }
  double constant(const std::string& name) const {
    for (const auto& [k, v] : constants)
      if (k == name) return v;
    fail(ErrorCode::DomainError, "report '" + id + "' has no constant '" + name + "'");
  }
};

struct ProbeConfig {
  KernelSpec kernel;
  double tol = 1e-9;
  std::uint64_t seed = 20240611;
  GridSpec grid{16.0, 128, 10.0};
  int symbol_samples = 10000;
  int random_pairs = 20;
  double s_prime = 0.2;
  double c0 = 1.0;
  double horizon = 1.0;  // t range for symbol samples
  std::vector<double> deltas{1e-1, 1e-2, 1e-3, 1e-6};
  std::vector<double> times{0.1, 0.2, 0.4};
  double poly_N = 2.0;
  double rel_tol = 1e-9;  // slack for explicit constants
};

inline constexpr double kGuard = 1.05;

namespace detail {

/// Uniform doubles from the raw 64-bit stream; independent of library distribution code.
class SampleRng {
 public:
  explicit SampleRng(std::uint64_t seed) : g_(seed) {}
  double uniform() { return static_cast<double>(g_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  double log_uniform(double a, double b) { return std::exp(uniform(std::log(a), std::log(b))); }

 private:
  std::mt19937_64 g_;
};

inline std::uint64_t probe_seed(std::uint64_t base, std::string_view id) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (char ch : id) {
    h ^= static_cast<unsigned char>(ch);
    h *= 1099511628211ull;
  }
  return base ^ h;
}

class ExplicitBound {
 public:
  ExplicitBound(double rel, double abs) : rel_(rel), abs_(abs) {}
  void add(double lhs, double rhs) {
    ++n_;
    if (!std::isfinite(lhs) || !std::isfinite(rhs)) {
      ++bad_;
      return;
    }
    double scale = std::max(std::abs(rhs), abs_);
    worst_ = std::min(worst_, (rhs - lhs) / scale);
    if (lhs > rhs + rel_ * std::abs(rhs) + abs_) ++bad_;
  }
  long samples() const { return n_; }
  long violations() const { return bad_; }
  double worst() const { return worst_; }

 private:
  double rel_, abs_;
  long n_ = 0, bad_ = 0;
  double worst_ = std::numeric_limits<double>::infinity();
};

/// lhs <= C·base with C fitted as the largest ratio times the guard.
class FittedBound {
 public:
  explicit FittedBound(double abs = 1e-13) : abs_(abs) {}
  void add(double lhs, double base) {
    ++n_;
    if (!std::isfinite(lhs) || !std::isfinite(base)) {
      ++bad_;
      return;
    }
    if (base <= 0.0) {
      if (std::abs(lhs) > abs_) ++bad_;
      return;
    }
    ratio_ = std::max(ratio_, std::abs(lhs) / base);
  }
  double constant() const { return kGuard * ratio_; }
  long samples() const { return n_; }
  long violations() const { return bad_; }
  double worst() const { return ratio_ > 0.0 ? 1.0 - 1.0 / kGuard : 1.0; }

 private:
  double abs_;
  long n_ = 0, bad_ = 0;
  double ratio_ = 0.0;
};

inline SpectralState state_from(const GridSpec& g, const std::function<double(double)>& fhat) {
  SpectralState st;
  st.grid = g;
  st.values.resize(g.n);
  for (int j = 0; j < g.n; ++j) st.values[j] = fhat(g.xi(j));
  return st;
}

}  // namespace detail

struct NamedState {
  std::string name;
  SpectralState state;
};

// -------------------------------------------------------- sample families

/// Densities: Maxwellians at three temperatures, indicators at three widths, a two-bump profile.
inline std::vector<NamedState> density_family(const GridSpec& g) {
  std::vector<NamedState> out;
  for (double T : {0.5, 1.0, 2.0}) out.push_back({"maxwellian(T=" + std::to_string(T).substr(0, 3) + ")", init_from_profile(Gaussian{1.0, T}, g)});
  for (double a : {0.5, 1.0, 2.0})
    out.push_back({"indicator(a=" + std::to_string(a).substr(0, 3) + ")", init_from_profile(Indicator{1.0, a}, g)});
  out.push_back({"two_bump", init_from_profile(TwoBump{}, g)});
  return out;
}

/// Test functions: a flat window, two Hermite-like shapes and cosine packets at dyadic frequencies.
inline std::vector<NamedState> test_family(const GridSpec& g) {
  std::vector<NamedState> out;
  out.push_back({"flat_window", init_from_profile(Gaussian{1.0, 9.0}, g)});
  // ξ²e^{−ξ²/2} and ξ⁴e^{−ξ²/2}/3 are the transforms of (1 − v²) and (v⁴ − 6v² + 3)/3 times the Gaussian.
  out.push_back({"hermite2", detail::state_from(g, [](double x) { return x * x * std::exp(-0.5 * x * x); })});
  out.push_back({"hermite4", detail::state_from(g, [](double x) { return x * x * x * x * std::exp(-0.5 * x * x) / 3.0; })});
  for (double k : {1.0, 2.0, 4.0, 8.0})
    out.push_back({"packet(k=" + std::to_string(static_cast<int>(k)) + ")", init_from_profile(Packet{1.0, k, 1.0}, g)});
  return out;
}

/// Random even signed function: three packets with random frequency, width and amplitude.
inline SpectralState random_even(detail::SampleRng& rng, const GridSpec& g) {
  std::vector<Packet> parts;
  for (int i = 0; i < 3; ++i) parts.push_back({rng.uniform(-1.0, 1.0), rng.uniform(0.0, 6.0), rng.uniform(0.6, 1.5)});
  return detail::state_from(g, [parts](double x) {
    double s = 0.0;
    for (const auto& p : parts) s += profile_transform(p, x);
    return s;
  });
}

/// Random density of unit mass: a Maxwellian mixed with an indicator.
inline SpectralState random_density(detail::SampleRng& rng, const GridSpec& g) {
  double w = rng.uniform(0.1, 0.9);
  Gaussian a{w, rng.uniform(0.3, 3.0)};
  Indicator b{1.0 - w, rng.uniform(0.3, 2.0)};
  return detail::state_from(g, [a, b](double x) { return profile_transform(a, x) + profile_transform(b, x); });
}

// --------------------------------------------------------- symbol probes

/// Derivative bounds for G_δ: ∂_t and ∂_ξ with their explicit constants, ∂²_ξ with a fitted one.
inline ProbeReport probe_symbol_bounds(const ProbeConfig& cfg) {
  ProbeReport r;
  r.id = "symbol_bounds";
  detail::SampleRng rng(detail::probe_seed(cfg.seed, r.id));
  detail::ExplicitBound dt(cfg.rel_tol, 1e-300), dx(cfg.rel_tol, 1e-300);
  detail::FittedBound d2;
  const double sp = cfg.s_prime;
  for (int i = 0; i < cfg.symbol_samples; ++i) {
    GevreyMultiplier G{cfg.c0, rng.uniform(0.0, cfg.horizon), sp, rng.log_uniform(1e-8, 1.0)};
    double xi = rng.log_uniform(1e-3, 1e3);
    double jp = detail::japanese(xi), g = G.symbol(xi);
    dt.add(std::abs(G.d_t(xi)), cfg.c0 * std::pow(jp, 2 * sp) * g);
    dx.add(std::abs(G.d_xi(xi)), 2 * sp * cfg.c0 * G.t * std::pow(jp, 2 * sp - 1) * g);
    d2.add(std::abs(G.d_xi2(xi)), std::pow(jp, 2 * (2 * sp - 1)) * g);
  }
  r.samples = dt.samples();
  r.violations = dt.violations() + dx.violations() + d2.violations();
  r.constants = {{"C_dxi2", d2.constant()}};
  r.worst_margin = std::min({dt.worst(), dx.worst(), d2.worst()});
  r.sampling = "delta log-uniform in [1e-8,1), t uniform in [0,T], xi log-uniform in [1e-3,1e3]";
  r.tolerance = cfg.rel_tol;
  return r;
}

/// G_δ(ξ) <= 3 G_δ(ξ cosθ) G_δ(ξ sinθ).
inline ProbeReport probe_submultiplicative(const ProbeConfig& cfg) {
  ProbeReport r;
  r.id = "submultiplicative";
  detail::SampleRng rng(detail::probe_seed(cfg.seed, r.id));
  detail::ExplicitBound b(cfg.rel_tol, 1e-300);
  double worst_ratio = 0.0;
  for (int i = 0; i < cfg.symbol_samples; ++i) {
    GevreyMultiplier G{cfg.c0, rng.uniform(0.0, cfg.horizon), cfg.s_prime, rng.log_uniform(1e-8, 1.0)};
    double xi = rng.log_uniform(1e-3, 1e3), th = rng.uniform(-kHalfPi, kHalfPi);
    double lhs = G.symbol(xi), rhs = G.symbol(xi * std::cos(th)) * G.symbol(xi * std::sin(th));
    b.add(lhs, 3.0 * rhs);
    worst_ratio = std::max(worst_ratio, lhs / rhs);
  }
  r.samples = b.samples();
  r.violations = b.violations();
  r.constants = {{"C", 3.0}, {"max_ratio", worst_ratio}};
  r.worst_margin = b.worst();
  r.sampling = "theta uniform in [-pi/2,pi/2], delta log-uniform in [1e-8,1), xi log-uniform in [1e-3,1e3]";
  r.tolerance = cfg.rel_tol;
  return r;
}

/**
 * |G(ξ) − G(ξcosθ)| <= C sin²(θ/2)⟨ξ⟩^{2s'} G(ξcosθ)G(ξsinθ) and the ∂_ξ
 * version with ⟨ξ⟩^{(4s'−1)⁺}. Angles below 1e-3 are not sampled since the
 * differences there are at rounding level.
 */
inline ProbeReport probe_difference_bounds(const ProbeConfig& cfg) {
  ProbeReport r;
  r.id = "difference_bounds";
  detail::SampleRng rng(detail::probe_seed(cfg.seed, r.id));
  detail::FittedBound b0, b1;
  const double sp = cfg.s_prime;
  const double e1 = std::max(4 * sp - 1, 0.0);
  for (int i = 0; i < cfg.symbol_samples; ++i) {
    GevreyMultiplier G{cfg.c0, rng.uniform(0.0, cfg.horizon), sp, rng.log_uniform(1e-8, 1.0)};
    double xi = rng.log_uniform(1e-3, 1e3);
    double th = rng.uniform(1e-3, kHalfPi) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
    double c = std::cos(th), sh = std::sin(0.5 * th);
    double prod = G.symbol(xi * c) * G.symbol(xi * std::sin(th)) * sh * sh;
    double jp = detail::japanese(xi);
    b0.add(std::abs(G.symbol(xi) - G.symbol(xi * c)), std::pow(jp, 2 * sp) * prod);
    b1.add(std::abs(G.d_xi(xi) - G.d_xi(xi * c)), std::pow(jp, e1) * prod);
  }
  r.samples = b0.samples();
  r.violations = b0.violations() + b1.violations();
  r.constants = {{"C_difference", b0.constant()}, {"C_derivative_difference", b1.constant()}};
  r.worst_margin = std::min(b0.worst(), b1.worst());
  r.sampling = "|theta| uniform in [1e-3,pi/2], delta log-uniform in [1e-8,1), xi log-uniform in [1e-3,1e3]";
  r.tolerance = 0.0;
  return r;
}

/// Bounds for the polynomial mollifier on |θ| <= π/4.
inline ProbeReport probe_poly_bounds(const ProbeConfig& cfg) {
  ProbeReport r;
  r.id = "poly_bounds";
  detail::SampleRng rng(detail::probe_seed(cfg.seed, r.id));
  detail::ExplicitBound bt(cfg.rel_tol, 1e-300);
  detail::FittedBound comp, diff, ddiff;
  const double T0 = cfg.horizon, N = cfg.poly_N;
  for (int i = 0; i < cfg.symbol_samples; ++i) {
    PolyMultiplier M{N, T0, rng.uniform(0.0, T0), rng.log_uniform(1e-8, 0.999)};
    double xi = rng.log_uniform(1e-3, 1e3);
    double th = rng.uniform(1e-3, kHalfPi / 2) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
    double c = std::cos(th), sh = std::sin(0.5 * th);
    double mc = M.symbol(xi * c);
    bt.add(std::abs(M.d_t(xi)), N * 0.5 * std::log1p(xi * xi) * M.symbol(xi));  // holds with equality
    comp.add(M.symbol(xi), mc);
    diff.add(std::abs(M.symbol(xi) - mc), sh * sh * mc);
    ddiff.add(std::abs(M.d_xi(xi) - M.d_xi(xi * c)), sh * sh * mc / detail::japanese(xi));
  }
  r.samples = bt.samples();
  r.violations = bt.violations() + comp.violations() + diff.violations() + ddiff.violations();
  r.constants = {{"C_compression", comp.constant()}, {"C_difference", diff.constant()},
                 {"C_derivative_difference", ddiff.constant()}};
  r.worst_margin = std::min({bt.worst(), comp.worst(), diff.worst(), ddiff.worst()});
  r.sampling = "|theta| uniform in [1e-3,pi/4], t uniform in [0,T0], delta log-uniform in [1e-8,1), xi log-uniform in [1e-3,1e3]";
  r.tolerance = cfg.rel_tol;
  return r;
}

// ------------------------------------------------------- function probes

/// λ values 10^{-4}, 10^{-3.8}, ..., 10^{4}.
inline std::vector<double> default_lambda_grid() {
  std::vector<double> out;
  for (int k = 0; k <= 40; ++k) out.push_back(std::pow(10.0, -4.0 + 0.2 * k));
  return out;
}

/// ‖u‖²_{H^{s'}} <= λ‖u‖²_{H^s} + λ^{−s'/(s−s')}‖u‖²_{L²}; an exact inequality, so no constant is fitted.
inline ProbeReport probe_interpolation(const std::vector<SpectralState>& us, const std::vector<double>& lambdas,
                                       double s, double sp, double rel_tol = 1e-9) {
  ProbeReport r;
  r.id = "interpolation";
  if (!(sp > 0.0 && sp < s)) fail(ErrorCode::DomainError, "interpolation needs 0 < s' < s");
  for (double lam : lambdas)
    if (!(lam > 0.0)) fail(ErrorCode::DomainError, "interpolation needs lambda > 0");
  detail::ExplicitBound b(rel_tol, 1e-300);
  double max_ratio = 0.0;
  for (const auto& u : us) {
    double hsp = std::pow(spectral_l2(u.values, u.grid, sp), 2);
    double hs = std::pow(spectral_l2(u.values, u.grid, s), 2);
    double l2 = std::pow(spectral_l2(u.values, u.grid, 0.0), 2);
    for (double lam : lambdas) {
      double rhs = lam * hs + std::pow(lam, -sp / (s - sp)) * l2;
      b.add(hsp, rhs);
      if (rhs > 0.0) max_ratio = std::max(max_ratio, hsp / rhs);
    }
  }
  r.samples = b.samples();
  r.violations = b.violations();
  r.constants = {{"max_ratio", max_ratio}};
  r.worst_margin = b.worst();
  r.tolerance = rel_tol;
  return r;
}

inline ProbeReport probe_interpolation(const ProbeConfig& cfg) {
  detail::SampleRng rng(detail::probe_seed(cfg.seed, "interpolation"));
  std::vector<SpectralState> us;
  for (const auto& x : test_family(cfg.grid)) us.push_back(x.state);
  for (const auto& x : density_family(cfg.grid)) us.push_back(x.state);
  for (int i = 0; i < cfg.random_pairs; ++i) us.push_back(random_even(rng, cfg.grid));
  auto r = probe_interpolation(us, default_lambda_grid(), cfg.kernel.s, cfg.s_prime, cfg.rel_tol);
  r.sampling = "test and density families plus " + std::to_string(cfg.random_pairs) +
               " random even functions, lambda in 10^[-4,4] step 10^0.2";
  return r;
}

/**
 * −(K(f,g),g) >= c‖g‖²_{H^s} − C‖f‖_{L¹}‖g‖²_{L²}. Writing the form as
 * P − C_canc‖f‖‖g‖² with P the nonnegative quadratic part, the fit takes
 * c_f = min_g P/(‖g‖²_{H^s} − ‖f‖‖g‖²) per density f and C = c_f + C_canc.
 */
inline ProbeReport probe_coercivity(const std::vector<NamedState>& fs, const std::vector<NamedState>& gs,
                                    const KernelSpec& spec, const QuadratureRule& rule) {
  ProbeReport r;
  r.id = "coercivity";
  spec.validate();
  if (!(spec.s < 1.0)) fail(ErrorCode::UnsupportedRegime, "coercivity probe needs s < 1");
  if (gs.size() < 5) fail(ErrorCode::InsufficientSamples, "coercivity probe needs at least 5 test functions");
  if (fs.empty()) fail(ErrorCode::InsufficientSamples, "coercivity probe needs at least one density");
  const double canc = cancellation_constant(spec, rule.tol);
  const size_t nf = fs.size(), ng = gs.size();
  std::vector<double> Q(nf * ng), H(nf * ng), N(nf * ng), F1(nf);
  parallel_for(static_cast<int>(nf * ng), [&](int idx) {
    const auto& f = fs[idx / ng].state;
    const auto& g = gs[idx % ng].state;
    Q[idx] = -weak_pairing(f, g, g, spec, rule);
    H[idx] = std::pow(norm_hs(g, spec.s), 2);
    N[idx] = std::pow(norm_l2(g), 2);
  });
  for (size_t i = 0; i < nf; ++i) F1[i] = norm_l1k(fs[i].state, 0.0);
  r.constants.push_back({"C_cancellation", canc});
  double worst = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < nf; ++i) {
    double c = std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < ng; ++j) {
      size_t k = i * ng + j;
      double P = Q[k] + canc * F1[i] * N[k];
      double den = H[k] - F1[i] * N[k];
      if (P < -rule.tol) ++r.violations;  // the quadratic part must be nonnegative
      if (den > 0.0) c = std::min(c, P / den);
    }
    c /= kGuard;
    if (!(c > 0.0)) ++r.violations;
    double C = c + canc;
    for (size_t j = 0; j < ng; ++j) {
      size_t k = i * ng + j;
      double rhs = c * H[k] - C * F1[i] * N[k];
      worst = std::min(worst, (Q[k] - rhs) / std::max(std::abs(Q[k]), 1e-300));
      if (Q[k] < rhs - rule.tol) ++r.violations;
    }
    r.constants.push_back({"c[" + fs[i].name + "]", c});
    r.constants.push_back({"C[" + fs[i].name + "]", C});
  }
  r.samples = static_cast<long>(nf * ng);
  r.worst_margin = worst;
  r.tolerance = rule.tol;
  return r;
}

inline ProbeReport probe_coercivity(const ProbeConfig& cfg) {
  auto r = probe_coercivity(density_family(cfg.grid), test_family(cfg.grid), cfg.kernel,
                            QuadratureRule::make(cfg.kernel, cfg.tol));
  r.sampling = "densities {maxwellian T=0.5,1,2; indicator a=0.5,1,2; two_bump} x tests {flat window, hermite2, "
               "hermite4, packets k=1,2,4,8}";
  return r;
}

/// One sample of a commutator bound: the measured left side and the norm product it is compared with.
struct BoundSample {
  double lhs = 0.0;
  double base = 0.0;
};

namespace detail {

inline void check_commutator_regime(const KernelSpec& k) {
  k.validate();
  if (!(k.s < 0.5)) fail(ErrorCode::UnsupportedRegime, "commutator bounds are stated for s < 1/2");
}

/**
 * Transform-side integrand of the v-weighted commutator, odd in ξ:
 *   D(ξ) = ∫β { sinθ f̂'(ξs) G(ξ) ĝ(ξc)
 *              + f̂(ξs) [ĝ(ξc)(G'(ξ) − G'(ξc)) + ĝ'(ξc)(c G(ξ) − G(ξc))] } dθ,
 * so that ((vG)K(f,g) − K(f,(vG)g), h) = (1/π)∫_0^Ξ D p dξ for h with ĥ = i p.
 */
inline std::vector<double> weighted_commutator_transform(const Interpolant& F, const Interpolant& Gi,
                                                         const GevreyMultiplier& G, const QuadratureRule& rule) {
  const GridSpec& grid = F.grid();
  std::vector<double> out(grid.n, 0.0);
  const bool half = rule.spec.half_angle;
  for (int j = 1; j < grid.n; ++j) {
    const double xi = grid.xi(j);
    const double Gx = G.symbol(xi), dGx = G.d_xi(xi);
    auto integrand = [&](double th) {
      const double a = half ? 0.5 * th : th;
      const double s = std::sin(a), c = std::cos(a);
      const double xs = xi * s, xc = xi * c;
      const double g = Gi(xc), dg = Gi.derivative(xc);
      return s * F.derivative(xs) * Gx * g + F(xs) * (g * (dGx - G.d_xi(xc)) + dg * (c * Gx - G.symbol(xc)));
    };
    out[j] = integrate_singular(rule, integrand);
  }
  return out;
}

inline double pairing_on_grid(const std::vector<double>& a, const std::vector<double>& b, const GridSpec& grid) {
  std::vector<double> y(grid.n);
  for (int j = 0; j < grid.n; ++j) y[j] = a[j] * b[j];
  return trapezoid(y, grid.dxi()) / kPi;
}

}  // namespace detail

/// |(G_δ K(f,g), h) − (K(f, G_δ g), h)| against ‖G_δ f‖_{L²₁}‖G_δ g‖_{H^{s'}}‖h‖_{H^{s'}}, one entry per h.
inline std::vector<BoundSample> commutator_samples(const SpectralState& f, const SpectralState& g,
                                                   const std::vector<SpectralState>& hs, const GevreyMultiplier& G,
                                                   const KernelSpec& spec, const QuadratureRule& rule) {
  detail::check_commutator_regime(spec);
  G.validate();
  const GridSpec& grid = f.grid;
  SpectralState Gg = apply_multiplier(g, G);
  Interpolant F(f);
  auto K = collision_transform(F, Interpolant(g), rule);
  auto KG = collision_transform(F, Interpolant(Gg), rule);
  std::vector<double> diff(grid.n);
  for (int j = 0; j < grid.n; ++j) diff[j] = G.symbol(grid.xi(j)) * K[j] - KG[j];
  double scale = norm_l2_weighted1(apply_multiplier(f, G)) * spectral_l2(Gg.values, grid, G.s_prime);
  std::vector<BoundSample> out;
  for (const auto& h : hs)
    out.push_back({std::abs(detail::pairing_on_grid(diff, h.values, grid)), scale * spectral_l2(h.values, grid, G.s_prime)});
  return out;
}

/**
 * |((vG_δ)K(f,g), h) − (K(f,(vG_δ)g), h)| against
 * (‖f‖_{L¹₁} + ‖G_δ f‖_{L²₁})‖G_δ g‖_{H^{s'}_1}‖h‖_{H^{s'}} for odd h = v·h₀,
 * one entry per even h₀ (the pairing vanishes for even h).
 */
inline std::vector<BoundSample> weighted_commutator_samples(const SpectralState& f, const SpectralState& g,
                                                            const std::vector<SpectralState>& h0s,
                                                            const GevreyMultiplier& G, const KernelSpec& spec,
                                                            const QuadratureRule& rule) {
  detail::check_commutator_regime(spec);
  G.validate();
  const GridSpec& grid = f.grid;
  auto D = detail::weighted_commutator_transform(Interpolant(f), Interpolant(g), G, rule);
  double scale = (norm_l1k(f, 1.0) + norm_l2_weighted1(apply_multiplier(f, G))) *
                 norm_hs(apply_multiplier(g, G), G.s_prime, 1.0);
  std::vector<BoundSample> out;
  for (const auto& h0 : h0s) {
    Interpolant Hi(h0);
    std::vector<double> p(grid.n);  // ĥ = i·ĥ₀'
    for (int j = 0; j < grid.n; ++j) p[j] = Hi.derivative(grid.xi(j));
    out.push_back({std::abs(detail::pairing_on_grid(D, p, grid)), scale * spectral_l2(p, grid, G.s_prime)});
  }
  return out;
}

using CommutatorSampler = std::vector<BoundSample> (*)(const SpectralState&, const SpectralState&,
                                                       const std::vector<SpectralState>&, const GevreyMultiplier&,
                                                       const KernelSpec&, const QuadratureRule&);

/// Single-multiplier scan: one fitted C over the h family.
inline ProbeReport probe_commutator(const SpectralState& f, const SpectralState& g, const std::vector<SpectralState>& hs,
                                    const GevreyMultiplier& G, const KernelSpec& spec, const QuadratureRule& rule,
                                    bool weighted = false) {
  ProbeReport r;
  r.id = weighted ? "commutator_weighted" : "commutator";
  auto samples = weighted ? weighted_commutator_samples(f, g, hs, G, spec, rule) : commutator_samples(f, g, hs, G, spec, rule);
  detail::FittedBound b(rule.tol);
  for (const auto& x : samples) b.add(x.lhs, x.base);
  r.samples = b.samples();
  r.violations = b.violations();
  r.constants = {{"C", b.constant()}};
  r.worst_margin = b.worst();
  r.tolerance = rule.tol;
  return r;
}

namespace detail {

/// Sweep over f × g × t × δ with one fitted C; jobs are indexed so reduction order is fixed.
inline ProbeReport commutator_sweep(const ProbeConfig& cfg, bool weighted) {
  ProbeReport r;
  r.id = weighted ? "commutator_weighted" : "commutator";
  check_commutator_regime(cfg.kernel);
  SampleRng rng(probe_seed(cfg.seed, r.id));
  const GridSpec& grid = cfg.grid;
  std::vector<NamedState> fs{{"maxwellian", init_from_profile(Gaussian{}, grid)},
                             {"indicator", init_from_profile(Indicator{}, grid)},
                             {"two_bump", init_from_profile(TwoBump{}, grid)}};
  std::vector<NamedState> gs = fs;
  gs.push_back({"packet(k=2)", init_from_profile(Packet{1.0, 2.0, 1.0}, grid)});
  std::vector<SpectralState> hs;
  for (int i = 0; i < 2; ++i) hs.push_back(random_even(rng, grid));
  QuadratureRule rule = QuadratureRule::make(cfg.kernel, cfg.tol);
  const size_t nf = fs.size(), ng = gs.size(), nt = cfg.times.size(), nd = cfg.deltas.size();
  const size_t total = nf * ng * nt * nd;
  std::vector<std::vector<BoundSample>> out(total);
  parallel_for(static_cast<int>(total), [&](int idx) {
    size_t q = idx;
    size_t id = q % nd;
    q /= nd;
    size_t it = q % nt;
    q /= nt;
    GevreyMultiplier G{cfg.c0, cfg.times[it], cfg.s_prime, cfg.deltas[id]};
    const auto& f = fs[q / ng].state;
    const auto& g = gs[q % ng].state;
    out[idx] = weighted ? weighted_commutator_samples(f, g, hs, G, cfg.kernel, rule)
                        : commutator_samples(f, g, hs, G, cfg.kernel, rule);
  });
  FittedBound b(cfg.tol);
  for (const auto& v : out)
    for (const auto& x : v) b.add(x.lhs, x.base);
  r.samples = b.samples();
  r.violations = b.violations();
  r.constants = {{"C", b.constant()}};
  r.worst_margin = b.worst();
  r.sampling = std::string("f in {maxwellian, indicator, two_bump}, g adds packet(k=2), ") +
               (weighted ? "2 odd h = v*h0 with random even h0" : "2 random even h") +
               ", t in {0.1,0.2,0.4}, delta in {1e-1,1e-2,1e-3,1e-6}";
  r.tolerance = cfg.tol;
  return r;
}

}  // namespace detail

inline ProbeReport probe_commutator(const ProbeConfig& cfg) { return detail::commutator_sweep(cfg, false); }
inline ProbeReport probe_commutator_weighted(const ProbeConfig& cfg) { return detail::commutator_sweep(cfg, true); }

/// ‖K(f,g)‖_{H^m_ℓ} <= C‖f‖_{L¹_{ℓ⁺+2s}}‖g‖_{H^{m+2s}_{(ℓ+2s)⁺}} for one (m, ℓ) with m ∈ {−2,−1,0}, ℓ ∈ {0,2}.
inline ProbeReport probe_upper_bound(const std::vector<std::pair<SpectralState, SpectralState>>& pairs, int m,
                                     double ell, const KernelSpec& spec, const QuadratureRule& rule) {
  if (m < -2 || m > 0) fail(ErrorCode::DomainError, "upper bound probe needs m in {-2,-1,0}");
  if (ell != 0.0 && ell != 2.0) fail(ErrorCode::DomainError, "upper bound probe needs l in {0,2}");
  spec.validate();
  ProbeReport r;
  r.id = "upper_bound";
  const double s = spec.s;
  std::vector<BoundSample> out(pairs.size());
  parallel_for(static_cast<int>(pairs.size()), [&](int i) {
    const auto& [f, g] = pairs[i];
    SpectralState K;
    K.grid = f.grid;
    K.values = collision_transform(Interpolant(f), Interpolant(g), rule);
    out[i] = {norm_hs(K, m, ell), norm_l1k(f, std::max(ell, 0.0) + 2 * s) * norm_hs(g, m + 2 * s, std::max(ell + 2 * s, 0.0))};
  });
  detail::FittedBound b(1e-10);
  for (const auto& x : out) b.add(x.lhs, x.base);
  r.samples = b.samples();
  r.violations = b.violations();
  r.constants = {{"C(m=" + std::to_string(m) + ",l=" + std::to_string(static_cast<int>(ell)) + ")", b.constant()}};
  r.worst_margin = b.worst();
  r.tolerance = 1e-10;
  return r;
}

inline ProbeReport probe_upper_bound(const ProbeConfig& cfg) {
  detail::SampleRng rng(detail::probe_seed(cfg.seed, "upper_bound"));
  std::vector<std::pair<SpectralState, SpectralState>> pairs;
  {
    auto M = init_from_profile(Gaussian{}, cfg.grid);
    pairs.emplace_back(M, M);
  }
  for (const auto& f : density_family(cfg.grid))
    for (const auto& g : test_family(cfg.grid)) pairs.emplace_back(f.state, g.state);
  for (int i = 0; i < cfg.random_pairs; ++i) {
    auto f = random_density(rng, cfg.grid);
    auto g = random_even(rng, cfg.grid);
    pairs.emplace_back(std::move(f), std::move(g));
  }
  QuadratureRule rule = QuadratureRule::make(cfg.kernel, cfg.tol);
  ProbeReport r;
  r.id = "upper_bound";
  r.tolerance = 1e-10;
  for (double ell : {0.0, 2.0})
    for (int m : {-2, -1, 0}) {
      auto part = probe_upper_bound(pairs, m, ell, cfg.kernel, rule);
      r.samples += part.samples;
      r.violations += part.violations;
      r.worst_margin = std::min(r.worst_margin, part.worst_margin);
      r.constants.push_back(part.constants.front());
    }
  r.sampling = "maxwellian self-pair, density family x test family, plus " + std::to_string(cfg.random_pairs) +
               " random (density, even function) pairs, (m, l) in {-2,-1,0} x {0,2}";
  return r;
}

// ------------------------------------------------------------- registry

using ProbeFn = ProbeReport (*)(const ProbeConfig&);

inline const std::vector<std::pair<std::string, ProbeFn>>& probe_registry() {
  static const std::vector<std::pair<std::string, ProbeFn>> reg = {
      {"symbol_bounds", probe_symbol_bounds},
      {"submultiplicative", probe_submultiplicative},
      {"difference_bounds", probe_difference_bounds},
      {"poly_bounds", probe_poly_bounds},
      {"coercivity", static_cast<ProbeFn>(probe_coercivity)},
      {"commutator", static_cast<ProbeFn>(probe_commutator)},
      {"commutator_weighted", probe_commutator_weighted},
      {"upper_bound", static_cast<ProbeFn>(probe_upper_bound)},
      {"interpolation", static_cast<ProbeFn>(probe_interpolation)},
  };
  return reg;
}

inline std::vector<std::string> probe_ids() {
  std::vector<std::string> ids;
  for (const auto& [k, v] : probe_registry()) ids.push_back(k);
  return ids;
}

inline bool is_probe_id(const std::string& id) {
  for (const auto& [k, v] : probe_registry())
    if (k == id) return true;
  return false;
}

inline ProbeReport run_probe(const std::string& id, const ProbeConfig& cfg) {
  for (const auto& [k, fn] : probe_registry())
    if (k == id) return fn(cfg);
  fail(ErrorCode::ConfigError, "unknown probe id '" + id + "'");
}

}  // namespace kaclab
