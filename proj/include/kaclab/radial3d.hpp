#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "kaclab/collision.hpp"
#include "kaclab/error.hpp"
#include "kaclab/kernel.hpp"
#include "kaclab/parallel.hpp"
#include "kaclab/spectral.hpp"

namespace kaclab {

/**
 * Radially symmetric 3D density g(|v|) sampled at 0 = r_0 <= r_1 <= ... <= r_M = R.
 * A repeated radius marks a jump: values on either side belong to different
 * smooth pieces and no interpolation stencil crosses it. Beyond R the profile
 * is taken to be zero.
 */
struct RadialProfile3D {
  std::vector<double> r;
  std::vector<double> g;

  double radius() const { return r.empty() ? 0.0 : r.back(); }
  void validate() const;
  double mass() const;
  double energy3d() const;
};

namespace detail {

// 4-point Gauss-Legendre on [-1, 1]; exact for degree 7.
inline constexpr std::array<double, 4> gl4_x = {-0.861136311594052575223946488893, -0.339981043584856264802665759103,
                                                0.339981043584856264802665759103, 0.861136311594052575223946488893};
inline constexpr std::array<double, 4> gl4_w = {0.347854845137453857373063949222, 0.652145154862546142626936050778,
                                                0.652145154862546142626936050778, 0.347854845137453857373063949222};

/// Piecewise-cubic reconstruction of a radial profile; stencils stay inside jump-free pieces.
class RadialInterpolant {
 public:
  explicit RadialInterpolant(const RadialProfile3D& p) : r_(p.r), g_(p.g) {
    const int n = static_cast<int>(r_.size());
    piece_lo_.assign(n, 0);
    piece_hi_.assign(n, n - 1);
    int start = 0;
    for (int i = 1; i <= n; ++i) {
      if (i == n || r_[i] == r_[i - 1]) {
        for (int k = start; k < i; ++k) {
          piece_lo_[k] = start;
          piece_hi_[k] = i - 1;
        }
        start = i;
      }
    }
  }

  int intervals() const { return static_cast<int>(r_.size()) - 1; }
  bool degenerate(int i) const { return r_[i + 1] == r_[i]; }
  double lo(int i) const { return r_[i]; }
  double hi(int i) const { return r_[i + 1]; }

  /// g on interval i (r_i <= x <= r_{i+1}).
  double on_interval(int i, double x) const {
    const int a = piece_lo_[i], b = piece_hi_[i];
    int k0 = std::clamp(i - 1, a, std::max(a, b - 3));
    int k1 = std::min(k0 + 3, b);
    double sum = 0.0;
    for (int k = k0; k <= k1; ++k) {
      double w = 1.0;
      for (int m = k0; m <= k1; ++m)
        if (m != k) w *= (x - r_[m]) / (r_[k] - r_[m]);
      sum += w * g_[k];
    }
    return sum;
  }

  /// ∫_a^b g(r) w(r) dr over the part of [a, b] inside interval i.
  template <class W>
  double integrate_interval(int i, double a, double b, W&& w) const {
    a = std::max(a, r_[i]);
    b = std::min(b, r_[i + 1]);
    if (!(b > a)) return 0.0;
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (int q = 0; q < 4; ++q) {
      double x = c + h * gl4_x[q];
      s += gl4_w[q] * on_interval(i, x) * w(x);
    }
    return s * h;
  }

  template <class W>
  double integrate(double a, W&& w) const {
    double s = 0.0;
    for (int i = 0; i < intervals(); ++i)
      if (!degenerate(i) && r_[i + 1] > a) s += integrate_interval(i, a, r_[i + 1], w);
    return s;
  }

 private:
  std::vector<double> r_, g_;
  std::vector<int> piece_lo_, piece_hi_;
};

}  // namespace detail

inline void RadialProfile3D::validate() const {
  if (r.size() != g.size()) fail(ErrorCode::DomainError, "radial profile: r and g differ in length");
  if (r.size() < 4) fail(ErrorCode::DomainError, "radial profile needs at least 4 samples");
  if (r.front() != 0.0) fail(ErrorCode::DomainError, "radial profile must start at r = 0");
  for (size_t i = 1; i < r.size(); ++i) {
    if (!(r[i] >= r[i - 1])) fail(ErrorCode::DomainError, "radial grid must be nondecreasing");
    if (i >= 2 && r[i] == r[i - 1] && r[i - 1] == r[i - 2])
      fail(ErrorCode::DomainError, "a radius may appear at most twice");
  }
  if (!(r.back() > 0.0)) fail(ErrorCode::DomainError, "radial profile has zero extent");
  for (double x : g)
    if (!(x >= 0.0) || !std::isfinite(x)) fail(ErrorCode::DomainError, "radial profile must be finite and nonnegative");
  if (!(mass() > 0.0)) fail(ErrorCode::DomainError, "radial profile has zero mass");
}

inline double RadialProfile3D::mass() const {
  return 4.0 * kPi * detail::RadialInterpolant(*this).integrate(0.0, [](double x) { return x * x; });
}

inline double RadialProfile3D::energy3d() const {
  return 4.0 * kPi * detail::RadialInterpolant(*this).integrate(0.0, [](double x) { return x * x * x * x; });
}

/// Samples g on a uniform radial grid of `count` points over [0, R].
template <class F>
RadialProfile3D sample_radial(F&& g, double R, int count) {
  if (count < 4 || !(R > 0.0)) fail(ErrorCode::DomainError, "radial sampling needs R > 0 and at least 4 points");
  RadialProfile3D p;
  for (int i = 0; i < count; ++i) {
    double x = R * i / (count - 1);
    p.r.push_back(x);
    p.g.push_back(g(x));
  }
  return p;
}

/**
 * f(u) = ∬ g(v₁, v₂, u) dv₁dv₂ = 2π∫_{|u|}^R g(r) r dr on the grid
 * u_k = −v_max + k·Δu. The samples are symmetric by construction.
 */
inline PhysicalState project_to_kac(const RadialProfile3D& prof, double v_max, int m) {
  prof.validate();
  if (m < 3 || m % 2 == 0) fail(ErrorCode::DomainError, "physical grid needs an odd point count >= 3");
  if (!(v_max > 0.0)) fail(ErrorCode::DomainError, "v_max must be positive");
  if (prof.radius() < v_max) fail(ErrorCode::DomainError, "radial profile ends before the requested v_max");
  detail::RadialInterpolant gi(prof);
  const int n = gi.intervals();
  auto weight = [](double x) { return 2.0 * kPi * x; };
  // tail[i] = 2π∫_{r_i}^R g r dr
  std::vector<double> tail(n + 1, 0.0);
  for (int i = n - 1; i >= 0; --i)
    tail[i] = tail[i + 1] + (gi.degenerate(i) ? 0.0 : gi.integrate_interval(i, gi.lo(i), gi.hi(i), weight));
  PhysicalState ph;
  ph.v_max = v_max;
  ph.values.assign(m, 0.0);
  const int c = (m - 1) / 2;
  const double du = v_max / c;
  int i = 0;
  for (int k = 0; k <= c; ++k) {
    double u = k == c ? v_max : k * du;
    while (i < n - 1 && (gi.hi(i) <= u || gi.degenerate(i))) ++i;
    double val = tail[i + 1] + (gi.degenerate(i) ? 0.0 : gi.integrate_interval(i, u, gi.hi(i), weight));
    ph.values[c + k] = val;
    ph.values[c - k] = val;
  }
  return ph;
}

struct KacMoments {
  double mass = 0.0;
  double energy = 0.0;  // ∫f u² du
};

/// Composite Simpson moments of a physical state (trapezoid on the last panel when the interval count is odd).
inline KacMoments kac_moments(const PhysicalState& ph) {
  const int m = ph.m();
  if (m < 3) fail(ErrorCode::DomainError, "moments need at least 3 samples");
  const double h = ph.dv();
  KacMoments out;
  auto add = [&](int k, double w) {
    double v = ph.v(k);
    out.mass += w * ph.values[k];
    out.energy += w * ph.values[k] * v * v;
  };
  const int intervals = m - 1;
  const int simpson = intervals - intervals % 2;
  for (int k = 0; k < simpson; k += 2) {
    add(k, h / 3.0);
    add(k + 1, 4.0 * h / 3.0);
    add(k + 2, h / 3.0);
  }
  if (simpson < intervals) {
    add(m - 2, 0.5 * h);
    add(m - 1, 0.5 * h);
  }
  return out;
}

// ---------------------------------------------------------------- kernels

/**
 * Angular cross-section of the 3D Maxwellian Boltzmann operator, θ ∈ (0, π/2].
 * Shapes: exact_power has sinθ·b = Kθ^{−1−2a}; sine_power has
 * sinθ·b = K cosθ sin^{−1−2a}θ; cutoff has b = K. The tail exponent a equals
 * the declared s unless `tail_exponent` overrides it, which models data whose
 * true singularity disagrees with its declaration.
 */
struct Kernel3D {
  Kernel3DShape shape = Kernel3DShape::exact_power;
  double K = 1.0;
  double s = 0.25;
  double tail_exponent = std::numeric_limits<double>::quiet_NaN();

  double exponent() const { return std::isnan(tail_exponent) ? s : tail_exponent; }

  void validate() const {
    if (!(K >= 0.0) || !std::isfinite(K)) fail(ErrorCode::DomainError, "3D kernel amplitude must be finite and >= 0");
    if (!(s > 0.0 && s < 1.0)) fail(ErrorCode::DomainError, "3D kernel exponent s must lie in (0,1)");
    if (!(exponent() > 0.0 && exponent() < 1.0)) fail(ErrorCode::DomainError, "tail exponent must lie in (0,1)");
  }

  /// b(cosθ) for θ ∈ (0, π/2].
  double b(double theta) const {
    const double a = exponent();
    switch (shape) {
      case Kernel3DShape::exact_power: return K * std::pow(theta, -1.0 - 2.0 * a) / std::sin(theta);
      case Kernel3DShape::sine_power: return K * std::cos(theta) / std::pow(std::sin(theta), 2.0 + 2.0 * a);
      case Kernel3DShape::cutoff: return K;
    }
    return 0.0;
  }

  /// Reduced Kac cross-section π|sinθ|·b(cosθ).
  double reduced_beta(double theta) const {
    double a = std::abs(theta);
    return kPi * std::sin(a) * b(a);
  }
};

struct KernelConversion {
  KernelSpec spec;
  double measured_s = std::numeric_limits<double>::quiet_NaN();  // NaN for bounded kernels
  double amplitude = 0.0;  // β(θ)θ^{1+2s} as θ → 0
};

/**
 * Kac kernel of the radial reduction. Integrating the σ-sphere over the
 * azimuth gives 2π∫_0^{π/2} b(cosθ) sinθ dθ, that is β(θ) = π|sinθ|b(cosθ)
 * on [−π/2, π/2], with Bobylev arguments taken at θ/2. For singular shapes
 * the exponent is measured by a log-log fit of β on θ ∈ [1e-6, 1e-3].
 */
inline KernelConversion convert_kernel(const Kernel3D& b) {
  b.validate();
  KernelConversion out;
  out.spec.family = KernelFamily::reduced_3d;
  out.spec.shape3d = b.shape;
  out.spec.K3d = b.K;
  out.spec.s = b.s;
  out.spec.half_angle = true;
  if (b.shape == Kernel3DShape::cutoff || b.K == 0.0) return out;
  const int n = 25;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    double th = std::pow(10.0, -6.0 + 3.0 * i / (n - 1));
    double x = std::log(th), y = std::log(b.reduced_beta(th));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  out.measured_s = 0.5 * (-slope - 1.0);
  if (std::abs(out.measured_s - b.s) > 0.05 * b.s)
    fail(ErrorCode::KernelMismatch, "declared s = " + std::to_string(b.s) + " but the tail fit gives " +
                                        std::to_string(out.measured_s));
  out.amplitude = b.reduced_beta(1e-6) * std::pow(1e-6, 1.0 + 2.0 * b.s);
  return out;
}

// --------------------------------------------------------------- 3D route

/**
 * Axis values of the 3D transform, ĝ(ρ) = 4π∫ g(r) r² sin(ρr)/(ρr) dr, tabulated
 * on [0, ρ_max] at 16 points per unit grid spacing and read back with a
 * 12-point local Lagrange rule.
 */
class AxisTransform3D {
 public:
  AxisTransform3D(const RadialProfile3D& prof, double rho_max, double spacing) {
    detail::RadialInterpolant gi(prof);
    for (int i = 0; i < gi.intervals(); ++i) {
      if (gi.degenerate(i)) continue;
      const double c = 0.5 * (gi.lo(i) + gi.hi(i)), h = 0.5 * (gi.hi(i) - gi.lo(i));
      for (int q = 0; q < 4; ++q) {
        double x = c + h * detail::gl4_x[q];
        nodes_.push_back(x);
        weights_.push_back(4.0 * kPi * detail::gl4_w[q] * h * gi.on_interval(i, x) * x * x);
      }
    }
    h_ = spacing / 16.0;
    const int count = static_cast<int>(std::ceil(rho_max / h_)) + kStencil;
    table_.assign(count, 0.0);
    parallel_for(count, [&](int k) { table_[k] = direct(k * h_); });
  }

  double direct(double rho) const { return derivatives(rho)[0]; }

  /// ĝ and its first three derivatives at ρ by direct summation.
  std::array<double, 4> derivatives(double rho) const {
    std::array<double, 4> d{};
    for (size_t k = 0; k < nodes_.size(); ++k) {
      const double x = nodes_[k], z = rho * x;
      double S, S1, S2, S3;
      if (std::abs(z) < 1e-2) {
        const double z2 = z * z;
        S = 1.0 - z2 / 6.0 * (1.0 - z2 / 20.0);
        S1 = -z / 3.0 * (1.0 - z2 / 10.0 * (1.0 - z2 / 28.0));
        S2 = -1.0 / 3.0 + z2 / 10.0 * (1.0 - z2 / 16.8);
        S3 = z / 5.0 * (1.0 - z2 / 8.4);
      } else {
        S = std::sin(z) / z;
        S1 = (std::cos(z) - S) / z;
        S2 = -S - 2.0 * S1 / z;
        S3 = -S1 - 2.0 * S2 / z + 2.0 * S1 / (z * z);
      }
      const double w = weights_[k];
      d[0] += w * S;
      d[1] += w * x * S1;
      d[2] += w * x * x * S2;
      d[3] += w * x * x * x * S3;
    }
    return d;
  }

  /// ĝ^{(2k)}(0) for k = 1, 2, 3.
  std::array<double, 3> even_derivatives_at_origin() const {
    std::array<double, 3> d{};
    for (size_t k = 0; k < nodes_.size(); ++k) {
      const double x2 = nodes_[k] * nodes_[k];
      d[0] -= weights_[k] * x2 / 3.0;
      d[1] += weights_[k] * x2 * x2 / 5.0;
      d[2] -= weights_[k] * x2 * x2 * x2 / 7.0;
    }
    return d;
  }

  double operator()(double rho) const {
    rho = std::abs(rho);
    const int n = static_cast<int>(table_.size());
    int base = static_cast<int>(std::floor(rho / h_)) - kStencil / 2 + 1;
    // Reflection about 0 uses evenness; the table is padded at the top.
    double sum = 0.0;
    for (int k = 0; k < kStencil; ++k) {
      int idx = base + k;
      double w = 1.0;
      for (int m = 0; m < kStencil; ++m)
        if (m != k) w *= (rho - (base + m) * h_) / ((k - m) * h_);
      int ii = std::abs(idx);
      if (ii >= n) fail(ErrorCode::DomainError, "axis transform evaluated beyond its table");
      sum += w * table_[ii];
    }
    return sum;
  }

 private:
  static constexpr int kStencil = 12;
  std::vector<double> nodes_, weights_, table_;
  double h_ = 0.0;
};

/**
 * 3D collision transform on the frequency axis:
 *   R(ρ) = 2π∫_0^{π/2} b(cosθ) sinθ [ĝ(ρ sin(θ/2)) ĝ(ρ cos(θ/2)) − ĝ(0) ĝ(ρ)] dθ,
 * evaluated at the nodes of `grid`.
 */
inline std::vector<double> axis_rhs_3d(const AxisTransform3D& G, const Kernel3D& b, const GridSpec& grid,
                                       double tol = 1e-10) {
  KernelSpec spec = convert_kernel(b).spec;
  std::vector<double> out(grid.n, 0.0);
  if (b.K == 0.0) return out;
  QuadratureRule rule = QuadratureRule::make(spec, tol);
  const double g0 = G(0.0);
  parallel_for(grid.n, [&](int j) {
    const double rho = grid.xi(j);
    if (rho == 0.0) return;
    const double gr = G(rho);
    const auto dr = G.derivatives(rho);
    const auto d0 = G.even_derivatives_at_origin();
    // Near θ = 0 both differences come from Taylor expansions; table values
    // alone carry rounding noise that the singular weight would amplify.
    auto bracket = [&](double th) {
      const double a = 0.5 * std::abs(th);
      const double x = rho * std::sin(a);
      const double sq = std::sin(0.5 * a);
      const double dc = -2.0 * rho * sq * sq;  // ρ cos(θ/2) − ρ
      double Ds, Dc;
      if (x < 1e-2) {
        const double x2 = x * x;
        Ds = x2 * (d0[0] / 2.0 + x2 * (d0[1] / 24.0 + x2 * d0[2] / 720.0));
      } else {
        Ds = G(x) - g0;
      }
      if (-dc < 1e-3)
        Dc = dc * (dr[1] + dc * (dr[2] / 2.0 + dc * dr[3] / 6.0));
      else
        Dc = G(rho + dc) - gr;
      return Ds * (gr + Dc) + g0 * Dc;
    };
    // Brackets scale like ĝ(0)², so the tolerance is taken relative to it.
    out[j] = integrate_singular(rule, bracket, 2, tol * g0 * g0 * std::clamp(std::pow(rho, 4), 1e-8, 1.0));
  });
  return out;
}

struct ConsistencyReport {
  double residual = 0.0;  // max|R1 − R3| / max(‖R3‖∞, mass²)
  double max_abs_difference = 0.0;
  double rhs_norm = 0.0;
  std::vector<double> rhs_kac, rhs_3d;
};

/**
 * Compares the Kac collision transform of the projected density under the
 * converted kernel with the 3D transform evaluated on the axis. The two
 * routes share only the angular quadrature engine.
 */
inline ConsistencyReport rhs_consistency(const RadialProfile3D& prof, const Kernel3D& b, const GridSpec& grid,
                                         double tol = 1e-10) {
  prof.validate();
  grid.validate();
  KernelSpec spec = convert_kernel(b).spec;
  PhysicalState ph = project_to_kac(prof, grid.v_max, default_physical_points(grid));
  SpectralState fhat = to_spectral(ph, grid);
  ConsistencyReport rep;
  rep.rhs_kac.assign(grid.n, 0.0);
  if (b.K != 0.0) rep.rhs_kac = bobylev_rhs(fhat, spec, QuadratureRule::make(spec, tol)).values;
  AxisTransform3D G(prof, grid.xi_max, grid.dxi());
  rep.rhs_3d = axis_rhs_3d(G, b, grid, tol);
  const double mass = prof.mass();
  for (int j = 0; j < grid.n; ++j) {
    rep.max_abs_difference = std::max(rep.max_abs_difference, std::abs(rep.rhs_kac[j] - rep.rhs_3d[j]));
    rep.rhs_norm = std::max(rep.rhs_norm, std::abs(rep.rhs_3d[j]));
  }
  rep.residual = rep.max_abs_difference / std::max(rep.rhs_norm, mass * mass);
  return rep;
}

// ------------------------------------------------------------------- lift

struct LiftConstant {
  double tau_star = 0.0;  // maximizer of τ e^{−(c0/2)⟨τ⟩^{2s'}}
  double sup = 0.0;
  double C_lift = 0.0;    // sup/√(2π)
};

/**
 * ‖e^{(c0/2)⟨D⟩^{2s'}}g‖_{L²(ℝ³)} <= C_lift ‖e^{c0⟨D⟩^{2s'}}f‖_{L²(ℝ)} with
 * C_lift = sup_τ τ e^{−(c0/2)⟨τ⟩^{2s'}} / √(2π). The factor 1/√(2π) collects
 * the Plancherel constants of ℝ³ (radial shell 4πτ²) and ℝ.
 */
inline LiftConstant lift_constant(double c0, double s_prime) {
  if (!(c0 > 0.0)) fail(ErrorCode::DomainError, "lift needs c0 > 0");
  if (!(s_prime > 0.0 && s_prime < 1.0)) fail(ErrorCode::DomainError, "lift needs s' in (0,1)");
  // Stationarity: c0 s' τ²⟨τ⟩^{2s'−2} = 1, increasing in τ.
  auto h = [&](double t) { return c0 * s_prime * t * t * std::pow(1.0 + t * t, s_prime - 1.0) - 1.0; };
  double hi = 1.0;
  while (h(hi) < 0.0) hi *= 2.0;
  boost::uintmax_t iters = 200;
  auto br = boost::math::tools::toms748_solve(h, 0.0, hi, boost::math::tools::eps_tolerance<double>(52), iters);
  LiftConstant out;
  out.tau_star = 0.5 * (br.first + br.second);
  out.sup = out.tau_star * std::exp(-0.5 * c0 * std::pow(1.0 + out.tau_star * out.tau_star, s_prime));
  out.C_lift = out.sup / std::sqrt(2.0 * kPi);
  return out;
}

inline double lift_gevrey_bound(double f_gevrey_norm, double c0, double s_prime) {
  if (!std::isfinite(f_gevrey_norm) || f_gevrey_norm < 0.0)
    fail(ErrorCode::DomainError, "Gevrey norm must be finite and nonnegative");
  return lift_constant(c0, s_prime).C_lift * f_gevrey_norm;
}

}  // namespace kaclab
