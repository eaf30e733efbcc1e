#pragma once

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "kaclab/error.hpp"

namespace kaclab {

/**
 * p(x) = Σ_{k=0}^{N} a_k cos(k ω x), evaluated with Reinsch's modification of
 * the Clenshaw recurrence. Plain Clenshaw loses O(N² ε) near ωx ∈ {0, π};
 * the modified form keeps absolute error near N ε Σ|a_k| everywhere, and
 * `minus_origin` returns p(x) − p(0) with relative accuracy for small x.
 */
class CosineSeries {
 public:
  CosineSeries() = default;
  CosineSeries(std::vector<double> coeffs, double omega) : a_(std::move(coeffs)), omega_(omega) {
    if (a_.empty()) fail(ErrorCode::DomainError, "empty cosine series");
    origin_ = 0.0;
    for (double c : a_) origin_ += c;
  }

  double omega() const { return omega_; }
  const std::vector<double>& coeffs() const { return a_; }
  double at_origin() const { return origin_; }
  size_t size() const { return a_.size(); }

  double value(double x) const {
    double out;
    values(&x, &out, 1);
    return out;
  }

  double derivative(double x) const {
    double out;
    derivatives(&x, &out, 1);
    return out;
  }

  /// p(x) − p(0), accurate relative to its own size when x is small.
  double minus_origin(double x) const {
    double out;
    minus_origin(&x, &out, 1);
    return out;
  }

  static constexpr int kBatch = 32;

  void values(const double* x, double* out, int count) const { run(x, out, count, Mode::value); }
  void derivatives(const double* x, double* out, int count) const { run(x, out, count, Mode::derivative); }
  void minus_origin(const double* x, double* out, int count) const { run(x, out, count, Mode::minus_origin); }

 private:
  enum class Mode { value, derivative, minus_origin };

  void run(const double* x, double* out, int count, Mode mode) const {
    for (int start = 0; start < count; start += kBatch) {
      int m = std::min(kBatch, count - start);
      batch(x + start, out + start, m, mode);
    }
  }

  // For the derivative, Σ a_k (-kω) sin(kφ) = -ω sinφ Σ k a_k U_{k-1}(cosφ); the
  // same b-recurrence is run on the coefficients k·a_k.
  void batch(const double* x, double* out, int m, Mode mode) const {
    std::array<double, kBatch> lam{}, sig{}, b{}, d{}, sumb{}, phi{};
    const int N = static_cast<int>(a_.size()) - 1;
    for (int i = 0; i < m; ++i) {
      phi[i] = omega_ * x[i];
      double hs = std::sin(0.5 * phi[i]), hc = std::cos(0.5 * phi[i]);
      if (hc >= hs || mode == Mode::minus_origin) {
        sig[i] = 1.0;
        lam[i] = -4.0 * hs * hs;
      } else {
        sig[i] = -1.0;
        lam[i] = 4.0 * hc * hc;
      }
    }
    const bool deriv = mode == Mode::derivative;
    // Reinsch: d_k = c_k + λ b_{k+1} + σ d_{k+1},  b_k = d_k + σ b_{k+1}.
    for (int k = N; k >= 1; --k) {
      const double ck = deriv ? a_[k] * k : a_[k];
      for (int i = 0; i < m; ++i) {
        double dn = ck + lam[i] * b[i] + sig[i] * d[i];
        double bn = dn + sig[i] * b[i];
        d[i] = dn;
        b[i] = bn;
        if (k >= 2) sumb[i] += bn;
      }
    }
    for (int i = 0; i < m; ++i) {
      switch (mode) {
        case Mode::value: out[i] = a_[0] + sig[i] * d[i] + 0.5 * lam[i] * b[i]; break;
        case Mode::derivative: out[i] = -omega_ * std::sin(phi[i]) * b[i]; break;
        case Mode::minus_origin: out[i] = lam[i] * (0.5 * b[i] + sumb[i]); break;
      }
    }
  }

  std::vector<double> a_;
  double omega_ = 1.0;
  double origin_ = 0.0;
};

}  // namespace kaclab
