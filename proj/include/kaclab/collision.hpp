#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "kaclab/cosine_series.hpp"
#include "kaclab/error.hpp"
#include "kaclab/kernel.hpp"
#include "kaclab/parallel.hpp"
#include "kaclab/spectral.hpp"

namespace kaclab {

/// Rotation of the velocity pair (v, v*) by the scattering angle θ.
struct CollisionGeometry {
  double theta = 0.0;
  double v = 0.0, v_star = 0.0;

  double v_prime() const { return v * std::cos(theta) - v_star * std::sin(theta); }
  double v_star_prime() const { return v * std::sin(theta) + v_star * std::cos(theta); }
};

namespace detail {

inline void check_rule(const KernelSpec& spec, const QuadratureRule& rule) {
  const KernelSpec& r = rule.spec;
  if (r.family != spec.family || r.s != spec.s || r.C0 != spec.C0 || r.m != spec.m || r.theta_cut != spec.theta_cut ||
      r.K3d != spec.K3d || r.shape3d != spec.shape3d || r.half_angle != spec.half_angle)
    fail(ErrorCode::DomainError, "quadrature rule was built for a different kernel");
}

/**
 * θ ↦ f̂(ξ_j sinθ)ĝ(ξ_j cosθ) − f̂(0)ĝ(ξ_j), written as
 * [f̂(ξ sinθ) − f̂(0)]·ĝ(ξ cosθ) + f̂(0)·[ĝ(ξ cosθ) − ĝ(ξ_j)] so that both
 * brackets are formed without cancellation and the result is O(θ²) down to
 * any θ. Half-angle sampling replaces θ by θ/2.
 */
struct Bracket {
  const Interpolant& F;
  const Interpolant& G;
  int j;
  bool half;

  void operator()(const double* th, double* out, int cnt) const {
    const double xi = G.grid().xi(j);
    const double gj = G.node(j);
    const double f0 = F.at_origin();
    for (int i = 0; i < cnt; ++i) {
      const double a = half ? 0.5 * th[i] : th[i];
      const double sh = std::sin(0.5 * a);
      const double A = F.minus_origin(xi * std::sin(a));
      const double D = G.node_difference(j, 2.0 * xi * sh * sh);
      out[i] = A * (gj + D) + f0 * D;
    }
  }
};

}  // namespace detail

/**
 * Samples of the transform of K(f, g) on the grid:
 *   R(ξ_j) = ∫ β(θ) [f̂(ξ_j sinθ) ĝ(ξ_j cosθ) − f̂(0) ĝ(ξ_j)] dθ,
 * with R(0) = 0 exactly. Indices are independent, so the result does not
 * depend on the thread count.
 *
 * Moments are read off the small-ξ samples through finite differences that
 * divide by ξ² and ξ⁴, so the quadrature tolerance at node j is scaled by
 * min(1, ξ_j⁴).
 */
inline std::vector<double> collision_transform(const Interpolant& F, const Interpolant& G, const QuadratureRule& rule) {
  if (!(F.grid() == G.grid())) fail(ErrorCode::DomainError, "states live on different grids");
  const int n = G.grid().n;
  std::vector<double> out(n, 0.0);
  const bool half = rule.spec.half_angle;
  parallel_for(n - 1, [&](int idx) {
    const int j = idx + 1;
    const double x = G.grid().xi(j);
    const double tol = rule.tol * std::clamp(x * x * x * x, 1e-8, 1.0);
    out[j] = integrate_singular(rule, detail::Bracket{F, G, j, half}, 2, tol);
  });
  return out;
}

inline SpectralState bobylev_rhs(const SpectralState& st, const KernelSpec& spec, const QuadratureRule& rule) {
  detail::check_rule(spec, rule);
  Interpolant P(st);
  SpectralState d;
  d.grid = st.grid;
  d.time = st.time;
  d.values = collision_transform(P, P, rule);
  return d;
}

/// (K(f, g), h)_{L²} = (1/π) ∫_0^Ξ K̂(f,g)(ξ) ĥ(ξ) dξ under the fixed convention.
inline double weak_pairing(const SpectralState& f, const SpectralState& g, const SpectralState& h,
                           const KernelSpec& spec, const QuadratureRule& rule) {
  detail::check_rule(spec, rule);
  if (!(f.grid == g.grid) || !(g.grid == h.grid)) fail(ErrorCode::DomainError, "states live on different grids");
  Interpolant F(f), G(g);
  std::vector<double> R = collision_transform(F, G, rule);
  std::vector<double> y(R.size());
  for (size_t j = 0; j < R.size(); ++j) y[j] = R[j] * h.values[j];
  return detail::trapezoid(y, f.grid.dxi()) / kPi;
}

// ------------------------------------------------ physical-space oracles

/// Physical grid for brute-force triple integrals: v ∈ [-L, L], m odd points.
struct BruteForceGrid {
  double L = 8.0;
  int m = 129;
  double dv() const { return 2.0 * L / (m - 1); }
  double v(int k) const { return -L + k * dv(); }
};

namespace detail {

/// Physical function reconstructed from a spectral state with Taylor tables at the grid nodes.
class PhysicalFunction {
 public:
  static constexpr int kOrder = 12;

  PhysicalFunction(const SpectralState& st, const BruteForceGrid& bg) : series_(physical_series(st)), bg_(bg) {
    const int m = bg.m;
    vals_.resize(m);
    std::vector<double> v(m);
    for (int k = 0; k < m; ++k) v[k] = bg.v(k);
    series_.values(v.data(), vals_.data(), m);
    // derivatives at nodes: Σ c_j ξ_j^q cos(ξ_j v + qπ/2)
    const auto& c = series_.coeffs();
    const double w = series_.omega();
    const int n = static_cast<int>(c.size());
    taylor_.assign(static_cast<size_t>(m) * kOrder, 0.0);
    radius_ = 0.25 / (w * (n - 1));
    for (int k = 0; k < m; ++k) {
      double inv_fact = 1.0;
      std::vector<double> cs(n), sn(n), pw(n, 1.0);
      for (int q = 0; q < n; ++q) {
        cs[q] = c[q] * std::cos(q * w * v[k]);
        sn[q] = c[q] * std::sin(q * w * v[k]);
      }
      for (int d = 1; d <= kOrder; ++d) {
        inv_fact /= d;
        const double sign = (d % 4 == 1 || d % 4 == 2) ? -1.0 : 1.0;
        const std::vector<double>& src = d % 2 == 1 ? sn : cs;
        double sum = 0.0;
        for (int q = 1; q < n; ++q) {
          pw[q] *= q * w;
          sum += pw[q] * src[q];
        }
        taylor_[static_cast<size_t>(k) * kOrder + d - 1] = sign * sum * inv_fact;
      }
    }
  }

  double node(int k) const { return vals_[k]; }
  double radius() const { return radius_; }
  const CosineSeries& series() const { return series_; }

  /// h(v_k + δ) − h(v_k) for |δ| <= radius().
  double node_difference(int k, double delta) const {
    const double* d = &taylor_[static_cast<size_t>(k) * kOrder];
    double acc = 0.0;
    for (int q = kOrder - 1; q >= 0; --q) acc = acc * delta + d[q];
    return acc * delta;
  }

  /// h(v_k + δ) − h(v_k) for any δ.
  double difference(int k, double delta) const {
    if (std::abs(delta) <= radius_) return node_difference(k, delta);
    return series_.value(std::abs(bg_.v(k) + delta)) - vals_[k];
  }

 private:
  CosineSeries series_;
  BruteForceGrid bg_;
  std::vector<double> vals_;
  std::vector<double> taylor_;
  double radius_ = 0.0;
};

}  // namespace detail

/**
 * Brute-force (K(f,g),h) = ∭ β f(v*) g(v) [h(v') − h(v)] on a physical grid,
 * with the θ-symmetrised bracket ½[h(v c − v* s) + h(v c + v* s)] − h(v).
 * Intended for small grids only (cost m² per angle).
 */
inline double weak_pairing_physical(const SpectralState& f, const SpectralState& g, const SpectralState& h,
                                    const KernelSpec& spec, const QuadratureRule& rule,
                                    const BruteForceGrid& bg = {}) {
  detail::check_rule(spec, rule);
  if (spec.half_angle) fail(ErrorCode::DomainError, "physical oracle supports full-angle kernels only");
  if (!(f.grid == g.grid) || !(g.grid == h.grid)) fail(ErrorCode::DomainError, "states live on different grids");
  const int m = bg.m;
  const int c = (m - 1) / 2;
  const double dv = bg.dv();
  CosineSeries fs = physical_series(f), gs = physical_series(g);
  std::vector<double> fv(m), gv(m), vv(m);
  for (int k = 0; k < m; ++k) vv[k] = std::abs(bg.v(k));
  fs.values(vv.data(), fv.data(), m);
  gs.values(vv.data(), gv.data(), m);
  detail::PhysicalFunction H(h, bg);
  // Even f, g, h: the integrand is invariant under (v, v*) -> (-v, -v*), so v >= 0 suffices.
  auto integrand = [&](double theta) {
    const double s = std::sin(theta), sh = std::sin(0.5 * theta);
    const double cm1 = -2.0 * sh * sh;
    double total = 0.0;
    for (int a = c; a < m; ++a) {
      const double v = bg.v(a);
      const double wv = (a == c ? 1.0 : 2.0) * (a == m - 1 ? 0.5 : 1.0);
      double inner = 0.0;
      for (int b = 0; b < m; ++b) {
        const double vs = bg.v(b);
        const double wb = (b == 0 || b == m - 1) ? 0.5 : 1.0;
        const double d1 = v * cm1 - vs * s, d2 = v * cm1 + vs * s;
        inner += wb * fv[b] * 0.5 * (H.difference(a, d1) + H.difference(a, d2));
      }
      total += wv * gv[a] * inner;
    }
    return total * dv * dv;
  };
  return integrate_singular(rule, integrand);
}

struct CoercivitySplit {
  double positive_part = 0.0;
  double cancellation_part = 0.0;
  double cancellation_constant = 0.0;  // C with cancellation = C ‖f‖_{L¹} ‖g‖²_{L²}
  double f_l1 = 0.0;
  double g_l2_sq = 0.0;
};

/// ½∫β(θ)(1/cosθ − 1)dθ over [-π/2, π/2].
inline double cancellation_constant(const KernelSpec& spec, double tol = 1e-10) {
  if (spec.family == KernelFamily::reduced_3d && spec.shape3d != Kernel3DShape::sine_power)
    fail(ErrorCode::DomainError, "cancellation constant diverges for kernels not vanishing at pi/2");
  QuadratureRule r = QuadratureRule::make(spec, tol / 2);
  return 0.5 * integrate_singular(r, [](double t) {
           double sh = std::sin(0.5 * t);
           return 2.0 * sh * sh / std::cos(t);
         });
}

/**
 * −(K(f,g),g) = ½∭β f(v*)(g(v') − g(v))² − ½‖f‖_{L¹}‖g‖²_{L²}∫β(1/cosθ − 1).
 * The first term is evaluated by brute force on a physical grid; the second
 * follows from the substitution v ↦ v' at fixed v*.
 *
 * Near θ = π/2 the g(v')² part of the square lives at |v| ~ 1/cosθ, outside
 * any fixed grid. For θ > 1e-3 the grid sum of that part is therefore
 * replaced by its whole-line value Σ f(v*)·‖g‖²/cosθ.
 */
inline CoercivitySplit coercivity_split(const SpectralState& f, const SpectralState& g, const KernelSpec& spec,
                                        const QuadratureRule& rule, const BruteForceGrid& bg = {}) {
  detail::check_rule(spec, rule);
  if (spec.half_angle) fail(ErrorCode::DomainError, "physical oracle supports full-angle kernels only");
  if (!(f.grid == g.grid)) fail(ErrorCode::DomainError, "states live on different grids");
  if (bg.m > 257) fail(ErrorCode::DomainError, "brute-force grid limited to 257 points");
  const int m = bg.m;
  const int c = (m - 1) / 2;
  const double dv = bg.dv();
  CosineSeries fs = physical_series(f), gs = physical_series(g);
  std::vector<double> fv(m), gv(m), vv(m);
  for (int k = 0; k < m; ++k) vv[k] = std::abs(bg.v(k));
  fs.values(vv.data(), fv.data(), m);
  gs.values(vv.data(), gv.data(), m);
  double neg = 0.0, tot = 0.0;
  for (double x : fv) {
    tot += std::abs(x);
    neg += std::max(-x, 0.0);
  }
  if (tot > 0.0 && neg / tot > 1e-3) fail(ErrorCode::DomainError, "f has a significant negative part");
  for (double& x : fv) x = std::max(x, 0.0);
  double f_sum = 0.0;
  for (int b = 0; b < m; ++b) f_sum += ((b == 0 || b == m - 1) ? 0.5 : 1.0) * fv[b];
  f_sum *= dv;
  const double gl2 = norm_l2(g);
  detail::PhysicalFunction G(g, bg);
  auto integrand = [&](double theta) {
    const double s = std::sin(theta), sh = std::sin(0.5 * theta);
    const double cm1 = -2.0 * sh * sh;
    const bool correct = theta > 1e-3;
    double total = 0.0, image_sq = 0.0;
    for (int a = c; a < m; ++a) {
      const double v = bg.v(a);
      const double wv = (a == c ? 1.0 : 2.0) * (a == m - 1 ? 0.5 : 1.0);
      double inner = 0.0, inner_sq = 0.0;
      for (int b = 0; b < m; ++b) {
        const double wb = (b == 0 || b == m - 1) ? 0.5 : 1.0;
        const double d = G.difference(a, v * cm1 - bg.v(b) * s);
        inner += wb * fv[b] * d * d;
        if (correct) {
          const double gp = G.node(a) + d;
          inner_sq += wb * fv[b] * gp * gp;
        }
      }
      total += wv * inner;
      image_sq += wv * inner_sq;
    }
    total *= dv * dv;
    if (correct) total += f_sum * gl2 * gl2 / std::cos(theta) - image_sq * dv * dv;
    return 0.5 * total;
  };
  CoercivitySplit out;
  out.positive_part = integrate_singular(rule, integrand);
  out.cancellation_constant = cancellation_constant(spec, rule.tol);
  out.f_l1 = f.values[0];
  out.g_l2_sq = gl2 * gl2;
  out.cancellation_part = out.cancellation_constant * out.f_l1 * out.g_l2_sq;
  return out;
}

}  // namespace kaclab
