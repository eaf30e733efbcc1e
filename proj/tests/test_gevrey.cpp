#include <cmath>

#include <gtest/gtest.h>

#include "kaclab/evolve.hpp"
#include "kaclab/gevrey.hpp"

using namespace kaclab;

namespace {
const GridSpec kGrid{20.0, 256, 10.0};

Trajectory indicator_run(const GridSpec& g = kGrid) {
  KernelSpec k;
  auto rule = QuadratureRule::make(k, 1e-9);
  SimulateOptions o;
  o.record_entropy = false;
  return simulate(init_from_profile(Indicator{1, 1}, g), k, rule, 0.5, uniform_times(0.5, 11), o);
}

Trajectory frozen(const SpectralState& st, int count) {
  Trajectory tr;
  for (int k = 0; k < count; ++k) {
    SpectralState s = st;
    s.time = 0.1 * k;
    record(tr, s, false);
  }
  return tr;
}
}  // namespace

TEST(Gevrey, SymbolAtTimeZero) {
  for (double d : {1.0, 0.1, 1e-6}) {
    GevreyMultiplier G{1.0, 0.0, 0.2, d};
    EXPECT_DOUBLE_EQ(G.symbol(3.0), 1.0 / (1.0 + d));
    auto st = init_from_profile(Indicator{1, 1}, kGrid);
    auto out = apply_multiplier(st, G);
    for (int j = 0; j < kGrid.n; ++j) EXPECT_DOUBLE_EQ(out.values[j], st.values[j] / (1.0 + d));
  }
}

TEST(Gevrey, SymbolBoundsEvenAndMonotone) {
  GevreyMultiplier G{1.0, 0.4, 0.2, 1e-3};
  double prev = 0.0;
  for (double xi = 0.0; xi < 200.0; xi += 0.37) {
    double g = G.symbol(xi);
    EXPECT_GT(g, 0.0);
    EXPECT_LE(g, std::min(1.0 / G.delta, std::exp(G.phi(xi))) * (1 + 1e-15));
    EXPECT_EQ(g, G.symbol(-xi));
    EXPECT_GE(g, prev);
    prev = g;
  }
}

TEST(Gevrey, DeltaLimitIsMonotone) {
  const double xi = 7.0;
  double prev = 0.0;
  GevreyMultiplier lim{1.0, 0.3, 0.2, 1e-3};
  double limit = lim.limit(xi);
  for (double d : {1e-1, 1e-3, 1e-6}) {
    GevreyMultiplier G{1.0, 0.3, 0.2, d};
    double g = G.symbol(xi);
    EXPECT_GT(g, prev);
    EXPECT_LT(g, limit);
    prev = g;
  }
  EXPECT_NEAR(prev, limit, 1e-5 * limit);
}

TEST(Gevrey, PolyMultiplierWithUnitExponent) {
  PolyMultiplier M{2.0, 1.0, 0.5, 1e-2};  // t·N = 1
  for (double xi : {0.0, 1.0, 10.0, 100.0}) {
    double expected = std::pow(1.0 + M.delta * xi * xi, -M.N0());
    EXPECT_NEAR(M.symbol(xi), expected, 1e-14);
    EXPECT_LE(M.symbol(xi), 1.0);
  }
}

TEST(Gevrey, OverflowGuard) {
  GevreyMultiplier G{1.0, 1.0, 0.9, 1e-6};
  try {
    G.symbol(1e4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Overflow);
  }
}

TEST(Gevrey, AnalyticDerivatives) {
  GevreyMultiplier G{1.3, 0.4, 0.2, 1e-2};
  const double xi = 5.0, h = 1e-4;
  EXPECT_NEAR(G.d_xi(xi), (G.symbol(xi + h) - G.symbol(xi - h)) / (2 * h), 1e-6);
  EXPECT_NEAR(G.d_xi2(xi), (G.symbol(xi + h) - 2 * G.symbol(xi) + G.symbol(xi - h)) / (h * h), 1e-4);
  GevreyMultiplier Gp = G, Gm = G;
  Gp.t += h;
  Gm.t -= h;
  EXPECT_NEAR(G.d_t(xi), (Gp.symbol(xi) - Gm.symbol(xi)) / (2 * h), 1e-6);
}

TEST(Gevrey, MaxwellianFitSaturates) {
  auto tr = frozen(init_from_profile(Gaussian{1, 1}, kGrid), 3);
  auto fit = gevrey_fit(tr, 0.2);
  for (const auto& p : fit) EXPECT_TRUE(p.saturated);
}

TEST(Gevrey, WindowTooSmall) {
  auto tr = frozen(init_from_profile(Gaussian{1, 1}, kGrid), 3);
  GevreyFitOptions o;
  o.floor = 0.9;
  try {
    gevrey_fit(tr, 0.2, o);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::WindowTooSmall);
  }
}

TEST(Gevrey, IndicatorRateGrowsFromZero) {
  auto fit = gevrey_fit(indicator_run(), 0.2);
  ASSERT_EQ(fit.size(), 11u);
  EXPECT_LE(std::abs(fit[0].c), 1e-3);
  for (size_t k = 1; k < fit.size(); ++k) {
    EXPECT_GT(fit[k].c, 0.0);
    EXPECT_GE(fit[k].c, fit[k - 1].c - 2 * fit[k].c_stderr);
    EXPECT_FALSE(fit[k].saturated);
  }
  EXPECT_GT(rate_constant(fit), 0.0);
}

TEST(Gevrey, FrozenTrajectoryHasZeroConstants) {
  auto tr = frozen(init_from_profile(Indicator{1, 1}, kGrid), 5);
  auto rep = apriori_tracker(tr, 0.0, 0.2, 1e-3, 0.25);
  for (const auto& p : rep.points) EXPECT_DOUBLE_EQ(p.y, rep.points.front().y);
  EXPECT_EQ(rep.C1, 0.0);
  EXPECT_EQ(rep.C2, 0.0);
  EXPECT_TRUE(std::isinf(rep.t_star));
}

TEST(Gevrey, AprioriDeltaOneSanityBound) {
  auto tr = indicator_run();
  const double c0 = 1.0;
  auto rep = apriori_tracker(tr, c0, 0.2, 1.0, 0.25);
  for (size_t k = 0; k < tr.snapshots.size(); ++k) {
    GevreyMultiplier G{c0, tr.times[k], 0.2, 1.0};
    double bound = norm_l2_weighted1(tr.snapshots[k]) * G.symbol(kGrid.xi_max);
    EXPECT_LE(rep.points[k].y, bound * (1 + 1e-9));
  }
}

TEST(Gevrey, AprioriWithinClosedFormBound) {
  auto tr = indicator_run();
  double c0 = rate_constant(gevrey_fit(tr, 0.2));
  auto rep = apriori_tracker(tr, c0, 0.2, 1e-3, 0.25);
  EXPECT_TRUE(rep.within_bound);
  EXPECT_DOUBLE_EQ(rep.exponent, 0.2 / 0.05 + 1.0);
  for (const auto& p : rep.points) {
    if (p.t > rep.t_star) break;
    EXPECT_LE(p.y, p.ode_bound * (1 + 1e-9));
    EXPECT_LE(p.dy_dt, p.bound_rhs * (1 + 1e-9));
  }
}

TEST(Gevrey, AprioriPreconditions) {
  auto tr = frozen(init_from_profile(Indicator{1, 1}, kGrid), 2);
  EXPECT_THROW(apriori_tracker(tr, 1.0, 0.2, 1e-3, 0.25), Error);
  auto tr3 = frozen(init_from_profile(Indicator{1, 1}, kGrid), 3);
  EXPECT_THROW(apriori_tracker(tr3, 1.0, 0.3, 1e-3, 0.25), Error);
}
