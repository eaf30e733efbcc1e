#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "kaclab/radial3d.hpp"

using namespace kaclab;

namespace {
const double kC = std::pow(2 * kPi, -1.5);

RadialProfile3D gaussian3d() {
  return sample_radial([](double r) { return kC * std::exp(-0.5 * r * r); }, 12.0, 2401);
}

RadialProfile3D ball(double R, double outer, int per_unit) {
  RadialProfile3D p;
  int a = static_cast<int>(R * per_unit), b = static_cast<int>(outer * per_unit);
  for (int i = 0; i <= a; ++i) {
    p.r.push_back(R * i / a);
    p.g.push_back(1.0);
  }
  for (int i = a; i <= b; ++i) {
    p.r.push_back(static_cast<double>(i) / per_unit);
    p.g.push_back(0.0);
  }
  return p;
}

// Two shells r² and r⁸ times a Gaussian, unit total mass.
RadialProfile3D two_shell() {
  return sample_radial(
      [](double r) {
        double e = std::exp(-0.5 * r * r);
        return (0.5 / 3.0) * kC * r * r * e + (0.5 / 945.0) * kC * std::pow(r, 8) * e;
      },
      12.0, 2401);
}

double golden_max(const std::function<double(double)>& f, double a, double b) {
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < 200 && b - a > 1e-12 * (1 + std::abs(a)); ++i) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    }
  }
  return f(0.5 * (a + b));
}

template <class F>
void expect_code(ErrorCode code, F&& f) {
  try {
    f();
    FAIL() << "expected " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}
}  // namespace

TEST(Radial3d, GaussianProjectsToGaussian) {
  auto prof = gaussian3d();
  auto f = project_to_kac(prof, 10.0, 2001);
  double err = 0.0;
  for (int k = 0; k < f.m(); ++k)
    err = std::max(err, std::abs(f.values[k] - std::exp(-0.5 * f.v(k) * f.v(k)) / std::sqrt(2 * kPi)));
  EXPECT_LT(err, 1e-8);
  auto mo = kac_moments(f);
  EXPECT_NEAR(mo.mass, prof.mass(), 1e-8);
  EXPECT_NEAR(mo.energy, prof.energy3d() / 3.0, 1e-8);
  EXPECT_NEAR(prof.mass(), 1.0, 1e-8);
  EXPECT_NEAR(prof.energy3d(), 3.0, 1e-8);
}

TEST(Radial3d, BallSliceAreaOracle) {
  // Independent 2D midpoint quadrature of the slice {v1² + v2² <= R² − u²}.
  const double R = 1.0;
  const int N = 2000;
  for (double u : {0.0, 0.5, 0.9}) {
    double rho2 = R * R - u * u, h = 2.0 * R / N, area = 0.0;
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        double x = -R + (i + 0.5) * h, y = -R + (j + 0.5) * h;
        if (x * x + y * y <= rho2) area += h * h;
      }
    EXPECT_NEAR(area, kPi * rho2, 2e-3) << u;
  }
}

TEST(Radial3d, BallProjectsToParabola) {
  auto prof = ball(1.0, 2.0, 100);
  auto f = project_to_kac(prof, 2.0, 4001);
  double err = 0.0;
  for (int k = 0; k < f.m(); ++k) {
    double u = f.v(k);
    err = std::max(err, std::abs(f.values[k] - kPi * std::max(1.0 - u * u, 0.0)));
  }
  EXPECT_LT(err, 1e-8);
  EXPECT_NEAR(prof.mass(), 4.0 * kPi / 3.0, 1e-12);
  auto mo = kac_moments(f);
  EXPECT_NEAR(mo.mass, prof.mass(), 1e-8);
  EXPECT_NEAR(mo.energy, prof.energy3d() / 3.0, 1e-8);
}

TEST(Radial3d, ProjectionIsEvenLinearAndPositive) {
  auto a = gaussian3d(), b = two_shell();
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> w(0.0, 2.0);
  for (int trial = 0; trial < 5; ++trial) {
    double x = w(rng), y = w(rng);
    RadialProfile3D mix = a;
    for (size_t i = 0; i < mix.g.size(); ++i) mix.g[i] = x * a.g[i] + y * b.g[i];
    auto fm = project_to_kac(mix, 8.0, 801), fa = project_to_kac(a, 8.0, 801), fb = project_to_kac(b, 8.0, 801);
    for (int k = 0; k < fm.m(); ++k) {
      EXPECT_GE(fm.values[k], 0.0);
      EXPECT_NEAR(fm.values[k], x * fa.values[k] + y * fb.values[k], 1e-13 * (1 + std::abs(fm.values[k])));
      ASSERT_EQ(fm.values[k], fm.values[fm.m() - 1 - k]);
    }
  }
}

TEST(Radial3d, ProjectionErrors) {
  expect_code(ErrorCode::DomainError, [] { project_to_kac(gaussian3d(), 13.0, 101); });
  RadialProfile3D bad = gaussian3d();
  std::swap(bad.r[5], bad.r[6]);
  expect_code(ErrorCode::DomainError, [&] { project_to_kac(bad, 5.0, 101); });
  RadialProfile3D neg = gaussian3d();
  neg.g[3] = -1.0;
  expect_code(ErrorCode::DomainError, [&] { project_to_kac(neg, 5.0, 101); });
}

TEST(Radial3d, ConvertExactPower) {
  Kernel3D b{Kernel3DShape::exact_power, 1.0, 0.25};
  auto c = convert_kernel(b);
  EXPECT_NEAR(c.measured_s, 0.25, 0.01 * 0.25);
  EXPECT_TRUE(c.spec.half_angle);
  EXPECT_EQ(c.spec.family, KernelFamily::reduced_3d);
  EXPECT_NEAR(c.amplitude, kPi * b.K, 1e-9);
  for (double t : {1e-4, 0.1, 0.7})
    EXPECT_NEAR(eval_beta(c.spec, t), kPi * std::sin(t) * b.b(t), 1e-12 * eval_beta(c.spec, t));
}

TEST(Radial3d, ConvertSinePower) {
  Kernel3D b{Kernel3DShape::sine_power, 2.0, 0.3};
  auto c = convert_kernel(b);
  EXPECT_NEAR(c.measured_s, 0.3, 0.003);
  EXPECT_NEAR(c.amplitude, 2.0 * kPi, 1e-6);
}

TEST(Radial3d, ConvertMismatch) {
  Kernel3D b{Kernel3DShape::exact_power, 1.0, 0.25, 0.3};
  expect_code(ErrorCode::KernelMismatch, [&] { convert_kernel(b); });
}

TEST(Radial3d, CutoffKernelHasFiniteMoments) {
  for (double s : {0.25, 0.75}) {
    Kernel3D b{Kernel3DShape::cutoff, 1.0, s};
    auto c = convert_kernel(b);
    EXPECT_TRUE(std::isnan(c.measured_s));
    double m = kernel_moment(c.spec, MomentKind::abs_theta);
    EXPECT_TRUE(std::isfinite(m));
    EXPECT_GT(m, 0.0);
  }
}

TEST(Radial3d, ZeroAmplitude) {
  Kernel3D b{Kernel3DShape::exact_power, 0.0, 0.25};
  auto c = convert_kernel(b);
  EXPECT_EQ(eval_beta(c.spec, 0.3), 0.0);
  GridSpec g{20.0, 64, 10.0};
  auto rep = rhs_consistency(two_shell(), b, g);
  EXPECT_EQ(rep.residual, 0.0);
  for (double x : rep.rhs_3d) EXPECT_EQ(x, 0.0);
}

TEST(Radial3d, MaxwellianConsistency) {
  Kernel3D b{Kernel3DShape::exact_power, 1.0, 0.25};
  auto rep = rhs_consistency(gaussian3d(), b, GridSpec{20.0, 256, 10.0});
  EXPECT_LE(rep.residual, 1e-9);
}

TEST(Radial3d, TwoShellConsistency) {
  Kernel3D b{Kernel3DShape::exact_power, 1.0, 0.25};
  auto rep = rhs_consistency(two_shell(), b, GridSpec{20.0, 256, 10.0});
  EXPECT_LE(rep.residual, 1e-6);
  EXPECT_GT(rep.rhs_norm, 1e-3);
}

TEST(Radial3d, LiftConstantMatchesGoldenSection) {
  const double c0 = 1.0, sp = 0.2;
  double sup = golden_max([&](double t) { return t * std::exp(-0.5 * c0 * std::pow(1 + t * t, sp)); }, 0.0, 1e3);
  auto lc = lift_constant(c0, sp);
  EXPECT_NEAR(lc.sup, sup, 1e-10 * sup);
  EXPECT_NEAR(lc.C_lift, sup / std::sqrt(2 * kPi), 1e-10);
  EXPECT_NEAR(lc.C_lift, 1.830330131186682, 1e-12);  // mpmath oracle
  EXPECT_NEAR(lc.tau_star, 55.93743653519645, 1e-8);
}

TEST(Radial3d, LiftBoundScaling) {
  EXPECT_EQ(lift_gevrey_bound(0.0, 1.0, 0.2), 0.0);
  EXPECT_DOUBLE_EQ(lift_gevrey_bound(2.0, 1.0, 0.2), 2.0 * lift_gevrey_bound(1.0, 1.0, 0.2));
  expect_code(ErrorCode::DomainError, [] { lift_gevrey_bound(1.0, 0.0, 0.2); });
  expect_code(ErrorCode::DomainError, [] { lift_gevrey_bound(1.0, -1.0, 0.2); });
}
