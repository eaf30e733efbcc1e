#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "kaclab/cosine_series.hpp"
#include "kaclab/error.hpp"
#include "kaclab/kernel.hpp"

namespace kaclab {

// Fourier convention: f̂(ξ) = ∫ e^{-ivξ} f(v) dv, so f̂(0) is the mass and
// -f̂''(0) the energy ∫v²f. All data are even; only ξ >= 0 is stored.

struct GridSpec {
  double xi_max = 20.0;
  int n = 256;
  double v_max = 10.0;

  void validate() const {
    if (n < 16) fail(ErrorCode::DomainError, "grid needs n >= 16");
    if (!(xi_max > 0.0) || !std::isfinite(xi_max)) fail(ErrorCode::DomainError, "xi_max must be positive");
    if (!(v_max > 0.0) || !std::isfinite(v_max)) fail(ErrorCode::DomainError, "v_max must be positive");
  }
  double dxi() const { return xi_max / (n - 1); }
  double xi(int j) const { return j == n - 1 ? xi_max : j * dxi(); }
  bool operator==(const GridSpec&) const = default;
};

struct SpectralState {
  GridSpec grid;
  std::vector<double> values;
  double time = 0.0;

  double mass() const { return values.front(); }
  size_t size() const { return values.size(); }

  /// Checks the necessary conditions for the transform of a nonnegative density.
  void validate_density(double slack = 1e-9) const {
    if (values.size() != static_cast<size_t>(grid.n)) fail(ErrorCode::DomainError, "state size does not match grid");
    if (!(values[0] > 0.0)) fail(ErrorCode::DomainError, "mass must be positive");
    for (double v : values)
      if (!std::isfinite(v) || std::abs(v) > values[0] * (1.0 + slack))
        fail(ErrorCode::DomainError, "|f^(xi)| exceeds f^(0)");
  }
};

struct PhysicalState {
  double v_max = 10.0;
  std::vector<double> values;  // samples at v_k = -v_max + k*dv, k = 0..m-1 (m odd)
  double time = 0.0;

  int m() const { return static_cast<int>(values.size()); }
  double dv() const { return 2.0 * v_max / (m() - 1); }
  double v(int k) const { return -v_max + k * dv(); }
  int center() const { return (m() - 1) / 2; }
};

// ---------------------------------------------------------------- profiles

struct Gaussian {
  double mass = 1.0;
  double temperature = 1.0;
  double mean = 0.0;
};
struct Indicator {
  double mass = 1.0;
  double half_width = 1.0;
};
struct TwoBump {
  double mass = 1.0;
  std::vector<double> centers{-1.5, 1.5};
  std::vector<double> widths{0.5, 0.5};
};
/// Signed test function cos(k0 v)·amplitude·e^{-v²/(2w²)} (not a density).
struct Packet {
  double amplitude = 1.0;
  double k0 = 4.0;
  double width = 1.0;
};

using Profile = std::variant<Gaussian, Indicator, TwoBump, Packet>;

/// Analytic transform of a profile at one frequency.
inline double profile_transform(const Profile& p, double xi) {
  struct V {
    double xi;
    double operator()(const Gaussian& g) const { return g.mass * std::exp(-0.5 * g.temperature * xi * xi); }
    double operator()(const Indicator& g) const {
      double x = g.half_width * xi;
      return x == 0.0 ? g.mass : g.mass * std::sin(x) / x;
    }
    double operator()(const TwoBump& g) const {
      double sum = 0.0;
      for (size_t i = 0; i < g.centers.size(); ++i)
        sum += std::exp(-0.5 * g.widths[i] * g.widths[i] * xi * xi) * std::cos(g.centers[i] * xi);
      return g.mass * sum / static_cast<double>(g.centers.size());
    }
    double operator()(const Packet& g) const {
      auto w = [&](double x) { return g.width * std::sqrt(2.0 * kPi) * std::exp(-0.5 * g.width * g.width * x * x); };
      return 0.5 * g.amplitude * (w(xi - g.k0) + w(xi + g.k0));
    }
  };
  return std::visit(V{xi}, p);
}

/// Analytic physical density of a profile (used by tests and brute-force oracles).
inline double profile_density(const Profile& p, double v) {
  struct V {
    double v;
    double operator()(const Gaussian& g) const {
      return g.mass / std::sqrt(2.0 * kPi * g.temperature) * std::exp(-0.5 * v * v / g.temperature);
    }
    double operator()(const Indicator& g) const {
      return std::abs(v) < g.half_width ? g.mass / (2.0 * g.half_width)
                                        : (std::abs(v) == g.half_width ? g.mass / (4.0 * g.half_width) : 0.0);
    }
    double operator()(const TwoBump& g) const {
      double sum = 0.0;
      for (size_t i = 0; i < g.centers.size(); ++i) {
        double z = (v - g.centers[i]) / g.widths[i];
        sum += std::exp(-0.5 * z * z) / (g.widths[i] * std::sqrt(2.0 * kPi));
      }
      return g.mass * sum / static_cast<double>(g.centers.size());
    }
    double operator()(const Packet& g) const {
      return g.amplitude * std::cos(g.k0 * v) * std::exp(-0.5 * v * v / (g.width * g.width));
    }
  };
  return std::visit(V{v}, p);
}

inline void validate_profile(const Profile& p) {
  struct V {
    void operator()(const Gaussian& g) const {
      if (!(g.mass > 0.0 && g.temperature > 0.0)) fail(ErrorCode::DomainError, "gaussian needs mass, temperature > 0");
      if (g.mean != 0.0) fail(ErrorCode::DomainError, "gaussian with nonzero mean is not even");
    }
    void operator()(const Indicator& g) const {
      if (!(g.mass > 0.0 && g.half_width > 0.0)) fail(ErrorCode::DomainError, "indicator needs mass, half_width > 0");
    }
    void operator()(const TwoBump& g) const {
      if (!(g.mass > 0.0)) fail(ErrorCode::DomainError, "two_bump needs mass > 0");
      if (g.centers.empty() || g.centers.size() != g.widths.size())
        fail(ErrorCode::DomainError, "two_bump needs matching centers and widths");
      for (double w : g.widths)
        if (!(w > 0.0)) fail(ErrorCode::DomainError, "two_bump widths must be positive");
      // Evenness: the multiset of (center, width) pairs must be closed under c -> -c.
      std::vector<std::pair<double, double>> a, b;
      for (size_t i = 0; i < g.centers.size(); ++i) {
        a.emplace_back(g.centers[i], g.widths[i]);
        b.emplace_back(-g.centers[i], g.widths[i]);
      }
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      if (a != b) fail(ErrorCode::DomainError, "two_bump profile is not even");
    }
    void operator()(const Packet& g) const {
      if (!(g.width > 0.0)) fail(ErrorCode::DomainError, "packet width must be positive");
    }
  };
  std::visit(V{}, p);
}

inline SpectralState init_from_profile(const Profile& p, const GridSpec& grid) {
  grid.validate();
  validate_profile(p);
  SpectralState st;
  st.grid = grid;
  st.values.resize(grid.n);
  for (int j = 0; j < grid.n; ++j) st.values[j] = profile_transform(p, grid.xi(j));
  return st;
}

inline SpectralState zero_state(const GridSpec& grid) {
  SpectralState st;
  st.grid = grid;
  st.values.assign(grid.n, 0.0);
  return st;
}

// ---------------------------------------------------------- interpolation

/**
 * Local polynomial interpolant of the samples, degree 15 on 16 nodes around
 * each cell (one-sided near Ξ). Negative-index nodes take the reflected
 * values f̂(−ξ) = f̂(ξ); the first cell uses the 17-node symmetric stencil, so
 * p is exactly even there and p(x) − p(0) = O(x²).
 *
 * Every cell [ξ_i, ξ_{i+1}] is stored as a polynomial in w = (ξ_{i+1} − ξ)/Δξ
 * whose constant term is the sample f_{i+1}, so p(ξ_j − ε) − f_j is formed
 * without cancellation; Bobylev brackets vanish to O(θ²) at any θ.
 */
class Interpolant {
 public:
  static constexpr int kPoints = 16;
  static constexpr int kHalf = 8;  // first cell: nodes −8..8, even degree 16

  Interpolant() = default;
  explicit Interpolant(const SpectralState& st) : grid_(st.grid), values_(st.values) {
    const int n = grid_.n;
    if (static_cast<int>(st.values.size()) != n) fail(ErrorCode::DomainError, "state size does not match grid");
    if (n < kPoints + 1) fail(ErrorCode::DomainError, "interpolation needs n >= 17");
    h_ = grid_.dxi();
    build_first_cell();
    build_cells();
  }

  const GridSpec& grid() const { return grid_; }
  double node(int j) const { return values_[j]; }
  double at_origin() const { return values_[0]; }
  double spacing() const { return h_; }

  double operator()(double xi) const {
    check(xi);
    return eval(xi);
  }

  /// p(x) − p(0), relative-accurate for small x.
  double minus_origin(double x) const {
    if (x <= h_) {
      double y = (x / h_) * (x / h_);
      double acc = 0.0;
      for (int k = kHalf; k >= 1; --k) acc = acc * y + even_[k];
      return acc * y;
    }
    return eval(x) - values_[0];
  }

  /// p(ξ_j − ε) − f_j for 0 <= ε; exact cancellation-free form when ε <= Δξ.
  double node_difference(int j, double eps) const {
    if (j >= 1 && eps <= h_) {
      const double w = eps / h_;
      const double* d = j == 1 ? first_about_one_.data() : &cells_[static_cast<size_t>(j - 1) * kPoints];
      const int top = j == 1 ? 2 * kHalf : kPoints - 1;
      double acc = 0.0;
      for (int m = top; m >= 1; --m) acc = acc * w + d[m];
      return acc * w;
    }
    return eval(grid_.xi(j) - eps) - values_[j];
  }

  double derivative(double x) const {
    check(x);
    if (x <= h_) {
      double u = x / h_, y = u * u;
      double acc = 0.0;
      for (int k = kHalf; k >= 1; --k) acc = acc * y + 2.0 * k * even_[k];
      // d/dx Σ e_k u^{2k} = (u/Δ) Σ 2k e_k y^{k-1}
      return acc * u / h_;
    }
    int i = cell_of(x);
    double w = (grid_.xi(i + 1) - x) / h_;
    const double* d = &cells_[static_cast<size_t>(i) * kPoints];
    double acc = 0.0;
    for (int m = kPoints - 1; m >= 1; --m) acc = acc * w + m * d[m];
    return -acc / h_;
  }

 private:
  void check(double xi) const {
    if (!(xi >= 0.0 && xi <= grid_.xi_max * (1.0 + 1e-15)))
      fail(ErrorCode::DomainError, "interpolation point outside [0, xi_max]");
  }

  int cell_of(double x) const {
    int i = static_cast<int>(x / h_);
    return std::clamp(i, 1, grid_.n - 2);
  }

  double eval(double x) const {
    const long j = std::lround(x / h_);
    if (j >= 0 && j < grid_.n && grid_.xi(static_cast<int>(j)) == x) return values_[j];
    if (x <= h_) {
      double y = (x / h_) * (x / h_);
      double acc = 0.0;
      for (int k = kHalf; k >= 0; --k) acc = acc * y + even_[k];
      return acc;
    }
    int i = cell_of(x);
    double w = (grid_.xi(i + 1) - x) / h_;
    const double* d = &cells_[static_cast<size_t>(i) * kPoints];
    double acc = 0.0;
    for (int m = kPoints - 1; m >= 0; --m) acc = acc * w + d[m];
    return acc;
  }

  // Monomial coefficients of the Lagrange basis for integer nodes.
  static std::vector<std::vector<long double>> lagrange_basis(const std::vector<long double>& nodes) {
    const size_t K = nodes.size();
    std::vector<std::vector<long double>> basis(K, std::vector<long double>(K, 0.0L));
    for (size_t k = 0; k < K; ++k) {
      std::vector<long double> poly{1.0L};
      long double denom = 1.0L;
      for (size_t q = 0; q < K; ++q) {
        if (q == k) continue;
        std::vector<long double> next(poly.size() + 1, 0.0L);
        for (size_t m = 0; m < poly.size(); ++m) {
          next[m + 1] += poly[m];
          next[m] -= nodes[q] * poly[m];
        }
        poly.swap(next);
        denom *= nodes[k] - nodes[q];
      }
      for (size_t m = 0; m < K; ++m) basis[k][m] = poly[m] / denom;
    }
    return basis;
  }

  void build_first_cell() {
    // Even interpolant through (k, f_k), k = −8..8, as a polynomial in y = u².
    std::vector<long double> ynodes(kHalf + 1);
    for (int k = 0; k <= kHalf; ++k) ynodes[k] = static_cast<long double>(k) * k;
    auto basis = lagrange_basis(ynodes);
    std::vector<long double> e(kHalf + 1, 0.0L);
    for (int k = 0; k <= kHalf; ++k)
      for (int m = 0; m <= kHalf; ++m) e[m] += values_[k] * basis[k][m];
    even_.resize(kHalf + 1);
    for (int m = 0; m <= kHalf; ++m) even_[m] = static_cast<double>(e[m]);
    even_[0] = values_[0];
    // Same polynomial about u = 1: p(1 − w) = Σ_m t_m w^m.
    std::vector<long double> t(2 * kHalf + 1, 0.0L);
    for (int k = 0; k <= kHalf; ++k) {
      long double binom = 1.0L;  // C(2k, m)
      for (int m = 0; m <= 2 * k; ++m) {
        t[m] += e[k] * binom * ((m % 2) ? -1.0L : 1.0L);
        binom = binom * (2 * k - m) / (m + 1);
      }
    }
    first_about_one_.assign(2 * kHalf + 1, 0.0);
    for (int m = 1; m <= 2 * kHalf; ++m) first_about_one_[m] = static_cast<double>(t[m]);
    first_about_one_[0] = values_[1];
  }

  void build_cells() {
    const int n = grid_.n;
    cells_.assign(static_cast<size_t>(n - 1) * kPoints, 0.0);
    std::vector<long double> interior(kPoints);
    for (int q = 0; q < kPoints; ++q) interior[q] = static_cast<long double>(kHalf - q);  // w positions 8..−7
    auto basis_interior = lagrange_basis(interior);
    for (int i = 1; i < n - 1; ++i) {
      int start = i - (kHalf - 1);
      bool shifted = start + kPoints - 1 > n - 1;
      if (shifted) start = n - kPoints;
      std::vector<std::vector<long double>> local;
      const std::vector<std::vector<long double>>* basis = &basis_interior;
      if (shifted) {
        std::vector<long double> pos(kPoints);
        for (int q = 0; q < kPoints; ++q) pos[q] = static_cast<long double>(i + 1 - (start + q));
        local = lagrange_basis(pos);
        basis = &local;
      }
      double* d = &cells_[static_cast<size_t>(i) * kPoints];
      for (int m = 0; m < kPoints; ++m) {
        long double acc = 0.0L;
        for (int q = 0; q < kPoints; ++q) acc += values_[std::abs(start + q)] * (*basis)[q][m];
        d[m] = static_cast<double>(acc);
      }
      d[0] = values_[i + 1];
    }
  }

  GridSpec grid_;
  std::vector<double> values_;
  double h_ = 1.0;
  std::vector<double> even_;            // first cell, coefficients of (x/Δ)^{2k}
  std::vector<double> first_about_one_;  // first cell about node 1, powers of w = (Δ − x)/Δ
  std::vector<double> cells_;           // cell i, powers of w = (ξ_{i+1} − x)/Δ
};

inline double interpolate(const SpectralState& st, double xi) { return Interpolant(st)(xi); }

// ------------------------------------------------------ physical transforms

inline int default_physical_points(const GridSpec& g) {
  // Δv <= π/(2Ξ) keeps at least four samples per oscillation of cos(Ξ v).
  double dv = kPi / (2.0 * g.xi_max);
  int half = static_cast<int>(std::ceil(g.v_max / dv));
  return 2 * half + 1;
}

/// Cosine series in v reproducing the trapezoid sum (1/π)∫_0^Ξ f̂ cos(vξ) dξ.
inline CosineSeries physical_series(const SpectralState& st) {
  const int n = st.grid.n;
  const double h = st.grid.dxi();
  std::vector<double> c(n);
  for (int j = 0; j < n; ++j) c[j] = st.values[j] * h / kPi * ((j == 0 || j == n - 1) ? 0.5 : 1.0);
  return CosineSeries(std::move(c), h);
}

inline PhysicalState to_physical(const SpectralState& st, int m = 0) {
  st.grid.validate();
  if (st.grid.v_max * st.grid.dxi() > kHalfPi * (1.0 + 1e-12))
    fail(ErrorCode::ResolutionError, "v_max * dxi exceeds pi/2 (fewer than 4 samples per oscillation)");
  if (m == 0) m = default_physical_points(st.grid);
  if (m < 3 || m % 2 == 0) fail(ErrorCode::DomainError, "physical grid needs an odd point count >= 3");
  CosineSeries ser = physical_series(st);
  PhysicalState ph;
  ph.v_max = st.grid.v_max;
  ph.time = st.time;
  ph.values.resize(m);
  const int c = (m - 1) / 2;
  std::vector<double> v(c + 1), out(c + 1);
  for (int k = 0; k <= c; ++k) v[k] = k * (2.0 * ph.v_max / (m - 1));
  ser.values(v.data(), out.data(), c + 1);
  for (int k = 0; k <= c; ++k) ph.values[c + k] = ph.values[c - k] = out[k];
  return ph;
}

inline SpectralState to_spectral(const PhysicalState& ph, const GridSpec& grid) {
  grid.validate();
  const int m = ph.m();
  if (m < 3 || m % 2 == 0) fail(ErrorCode::DomainError, "physical grid needs an odd point count >= 3");
  const double dv = ph.dv();
  if (grid.xi_max * dv > kHalfPi * (1.0 + 1e-12))
    fail(ErrorCode::ResolutionError, "xi_max * dv exceeds pi/2 (fewer than 4 samples per oscillation)");
  const int c = ph.center();
  // Even part of the samples; trapezoid over [-v_max, v_max] folded onto [0, v_max].
  std::vector<double> coef(c + 1);
  for (int k = 0; k <= c; ++k) {
    double fe = 0.5 * (ph.values[c + k] + ph.values[c - k]);
    double w = k == 0 ? 1.0 : (k == c ? 1.0 : 2.0);
    coef[k] = w * dv * fe;
  }
  CosineSeries ser(std::move(coef), dv);
  SpectralState st;
  st.grid = grid;
  st.time = ph.time;
  st.values.resize(grid.n);
  std::vector<double> xi(grid.n);
  for (int j = 0; j < grid.n; ++j) xi[j] = grid.xi(j);
  ser.values(xi.data(), st.values.data(), grid.n);
  return st;
}

// ------------------------------------------------------------------ norms

namespace detail {

inline double trapezoid(const std::vector<double>& y, double h) {
  if (y.empty()) return 0.0;
  double s = 0.5 * (y.front() + y.back());
  for (size_t i = 1; i + 1 < y.size(); ++i) s += y[i];
  return s * h;
}

/// Fourth-order second derivative on the grid with even reflection at 0 and
/// one-sided stencils at the top end.
inline std::vector<double> second_derivative(const std::vector<double>& f, double h) {
  const int n = static_cast<int>(f.size());
  std::vector<double> d(n);
  auto at = [&](int j) { return f[std::abs(j)]; };
  for (int j = 0; j < n; ++j) {
    if (j + 2 < n) {
      d[j] = (-at(j + 2) + 16.0 * at(j + 1) - 30.0 * at(j) + 16.0 * at(j - 1) - at(j - 2)) / (12.0 * h * h);
    } else {
      // backward fourth-order stencil for f'' at the last points
      int b = n - 1 - j;  // 0 or 1 points to the right
      if (b == 1) {
        d[j] = (10.0 * f[j + 1] - 15.0 * f[j] - 4.0 * f[j - 1] + 14.0 * f[j - 2] - 6.0 * f[j - 3] + f[j - 4]) /
               (12.0 * h * h);
      } else {
        d[j] = (45.0 * f[j] - 154.0 * f[j - 1] + 214.0 * f[j - 2] - 156.0 * f[j - 3] + 61.0 * f[j - 4] -
                10.0 * f[j - 5]) /
               (12.0 * h * h);
      }
    }
  }
  return d;
}

inline double japanese(double x) { return std::sqrt(1.0 + x * x); }

}  // namespace detail

/// -f̂''(0) from the eighth-order 9-point stencil with even reflection.
inline double energy(const SpectralState& st) {
  const auto& f = st.values;
  double h = st.grid.dxi();
  double acc = 8.0 / 5.0 * (f[1] - f[0]) - 1.0 / 5.0 * (f[2] - f[0]) + 8.0 / 315.0 * (f[3] - f[0]) -
               1.0 / 560.0 * (f[4] - f[0]);
  return -2.0 * acc / (h * h);
}

/// Fourth derivative at 0 (= ∫v⁴f) from the sixth-order 9-point stencil with even reflection.
inline double fourth_moment(const SpectralState& st) {
  const auto& f = st.values;
  double h = st.grid.dxi();
  return (2730.0 * f[0] - 3904.0 * f[1] + 1352.0 * f[2] - 192.0 * f[3] + 14.0 * f[4]) / (240.0 * h * h * h * h);
}

/// Weighted spectral L² norm (1/π ∫_0^Ξ w(ξ)² g(ξ)² dξ)^{1/2}.
inline double spectral_l2(const std::vector<double>& g, const GridSpec& grid, double sigma = 0.0) {
  std::vector<double> y(g.size());
  for (int j = 0; j < grid.n; ++j) {
    double w = sigma == 0.0 ? 1.0 : std::pow(detail::japanese(grid.xi(j)), sigma);
    y[j] = w * w * g[j] * g[j];
  }
  return std::sqrt(detail::trapezoid(y, grid.dxi()) / kPi);
}

inline double norm_l2(const SpectralState& st) { return spectral_l2(st.values, st.grid); }

/// Samples of the transform of ⟨v⟩^ell f. ell = 0 and 2 stay in Fourier
/// space (ell = 2 uses f̂ − f̂''); other weights go through physical space.
inline std::vector<double> weighted_transform(const SpectralState& st, double ell) {
  if (ell == 0.0) return st.values;
  if (ell == 2.0) {
    auto d2 = detail::second_derivative(st.values, st.grid.dxi());
    std::vector<double> out(st.values.size());
    for (size_t j = 0; j < out.size(); ++j) out[j] = st.values[j] - d2[j];
    return out;
  }
  PhysicalState ph = to_physical(st);
  for (int k = 0; k < ph.m(); ++k) ph.values[k] *= std::pow(detail::japanese(ph.v(k)), ell);
  return to_spectral(ph, st.grid).values;
}

inline double norm_hs(const SpectralState& st, double sigma, double ell = 0.0) {
  return spectral_l2(weighted_transform(st, ell), st.grid, sigma);
}

inline double norm_l1k(const SpectralState& st, double k) {
  PhysicalState ph = to_physical(st);
  std::vector<double> y(ph.m());
  for (int i = 0; i < ph.m(); ++i) y[i] = std::pow(detail::japanese(ph.v(i)), k) * std::abs(ph.values[i]);
  return detail::trapezoid(y, ph.dv());
}

struct EntropyResult {
  double value = 0.0;
  double clamped_negative_fraction = 0.0;
  bool reliable = true;  // false flags the UnreliableEntropy condition
};

enum class ReconstructionWindow { none, fejer };

/**
 * ∫ f log f over the clamped-positive part of the reconstruction. The default
 * Fejér window (1 − ξ/Ξ) is a positive kernel, so truncating the transform at
 * Ξ does not manufacture negative mass near discontinuities.
 */
inline EntropyResult entropy(const SpectralState& st, ReconstructionWindow window = ReconstructionWindow::fejer) {
  SpectralState w = st;
  if (window == ReconstructionWindow::fejer)
    for (int j = 0; j < st.grid.n; ++j) w.values[j] *= 1.0 - st.grid.xi(j) / st.grid.xi_max;
  PhysicalState ph = to_physical(w);
  std::vector<double> y(ph.m()), neg(ph.m()), all(ph.m());
  for (int i = 0; i < ph.m(); ++i) {
    double f = ph.values[i];
    y[i] = f > 0.0 ? f * std::log(f) : 0.0;
    neg[i] = f < 0.0 ? -f : 0.0;
    all[i] = std::abs(f);
  }
  EntropyResult r;
  r.value = detail::trapezoid(y, ph.dv());
  double tot = detail::trapezoid(all, ph.dv());
  r.clamped_negative_fraction = tot > 0.0 ? detail::trapezoid(neg, ph.dv()) / tot : 0.0;
  r.reliable = r.clamped_negative_fraction <= 1e-6;
  return r;
}

/// L²₁ norm ‖⟨v⟩ f‖_{L²} measured in physical space.
inline double norm_l2_weighted1(const SpectralState& st) {
  PhysicalState ph = to_physical(st);
  std::vector<double> y(ph.m());
  for (int i = 0; i < ph.m(); ++i) {
    double v = ph.v(i);
    y[i] = (1.0 + v * v) * ph.values[i] * ph.values[i];
  }
  return std::sqrt(detail::trapezoid(y, ph.dv()));
}

/// L²₁ norm of e^{c0 t ⟨ξ⟩^{2s'}} f̂.
inline double norm_gevrey(const SpectralState& st, double c0, double t, double s_prime) {
  SpectralState g = st;
  for (int j = 0; j < st.grid.n; ++j) {
    double e = c0 * t * std::pow(1.0 + st.grid.xi(j) * st.grid.xi(j), s_prime);
    if (e > 700.0) fail(ErrorCode::Overflow, "gevrey weight exponent above 700");
    g.values[j] *= std::exp(e);
  }
  return norm_l2_weighted1(g);
}

/**
 * Uniform-integrability diagnostics of a physical density: the smallest
 * measure carrying a quarter of the mass (largest values first), and the
 * radius holding three quarters of the mass.
 */
struct IntegrabilityModulus {
  double measure_quarter_mass = 0.0;
  double radius_three_quarters = 0.0;
};

inline IntegrabilityModulus integrability_modulus(const PhysicalState& ph) {
  std::vector<double> f(ph.values);
  for (double& x : f) x = std::max(x, 0.0);
  double dv = ph.dv();
  double mass = 0.0;
  for (double x : f) mass += x * dv;
  IntegrabilityModulus r;
  if (mass <= 0.0) return r;
  std::vector<double> sorted(f);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double acc = 0.0;
  for (size_t i = 0; i < sorted.size(); ++i) {
    acc += sorted[i] * dv;
    if (acc >= 0.25 * mass) {
      r.measure_quarter_mass = (i + 1) * dv;
      break;
    }
  }
  const int c = ph.center();
  acc = f[c] * dv;
  for (int k = 1; k <= c; ++k) {
    acc += (f[c + k] + f[c - k]) * dv;
    if (acc >= 0.75 * mass) {
      r.radius_three_quarters = k * dv;
      break;
    }
  }
  return r;
}

}  // namespace kaclab
