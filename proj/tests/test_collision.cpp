#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "kaclab/collision.hpp"

using namespace kaclab;

namespace {
const GridSpec kGrid{20.0, 256, 10.0};

// mpmath double integral of the Bobylev bracket for the unit indicator, s = 0.25,
// evaluated with the exact transform sin(ξ)/ξ (tests/oracles/indicator_rhs.py).
struct OraclePoint {
  int j;
  double value;
};
constexpr OraclePoint kIndicatorRhs[] = {
    {1, 3.20203892254588e-7}, {2, 5.11651206073905e-6}, {17, 0.0235303153264964}, {50, 0.578989889987279}};

SpectralState packets(const GridSpec& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> amp(-1.0, 1.0), k(0.0, 4.0), w(0.8, 1.5);
  std::vector<Packet> parts;
  for (int i = 0; i < 3; ++i) parts.push_back({amp(rng), k(rng), w(rng)});
  SpectralState st = zero_state(g);
  for (int j = 0; j < g.n; ++j)
    for (const auto& p : parts) st.values[j] += profile_transform(p, g.xi(j));
  return st;
}
}  // namespace

TEST(Collision, RotationPreservesEnergy) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5, 5), t(-kHalfPi, kHalfPi);
  for (int i = 0; i < 1000; ++i) {
    CollisionGeometry c{t(rng), u(rng), u(rng)};
    double before = c.v * c.v + c.v_star * c.v_star;
    double after = c.v_prime() * c.v_prime() + c.v_star_prime() * c.v_star_prime();
    EXPECT_NEAR(after, before, 1e-12 * before);
  }
}

TEST(Collision, MaxwellianIsFixedPoint) {
  KernelSpec k;
  auto rule = QuadratureRule::make(k, 1e-9);
  for (double T : {0.5, 1.0, 2.0}) {
    auto r = bobylev_rhs(init_from_profile(Gaussian{1.3, T}, kGrid), k, rule);
    double mx = 0.0;
    for (double x : r.values) mx = std::max(mx, std::abs(x));
    EXPECT_LT(mx, 1e-8) << T;
  }
}

TEST(Collision, RhsAtOriginIsExactlyZero) {
  KernelSpec k;
  auto rule = QuadratureRule::make(k, 1e-9);
  for (const Profile& p : {Profile{Indicator{1, 1}}, Profile{TwoBump{1, {-1.5, 1.5}, {0.5, 0.5}}}, Profile{Gaussian{2, 1}}})
    EXPECT_EQ(bobylev_rhs(init_from_profile(p, kGrid), k, rule).values[0], 0.0);
}

TEST(Collision, IndicatorRhsMatchesDoubleIntegralOracle) {
  KernelSpec k;
  auto rule = QuadratureRule::make(k, 1e-9);
  auto r = bobylev_rhs(init_from_profile(Indicator{1, 1}, kGrid), k, rule);
  for (const auto& o : kIndicatorRhs) EXPECT_NEAR(r.values[o.j], o.value, 1e-6 * std::abs(o.value)) << o.j;
}

TEST(Collision, EnergyOfRhsVanishes) {
  KernelSpec k;
  auto rule = QuadratureRule::make(k, 1e-9);
  auto m = init_from_profile(Gaussian{1, 1}, kGrid);
  EXPECT_LE(std::abs(energy(bobylev_rhs(m, k, rule))), 1e-8 * energy(m));
  auto ind = bobylev_rhs(init_from_profile(Indicator{1, 1}, kGrid), k, rule);
  EXPECT_LE(std::abs(energy(ind)), 1e-8);
}

TEST(Collision, Bilinearity) {
  KernelSpec k;
  auto rule = QuadratureRule::make(k, 1e-12);
  std::mt19937_64 rng(5);
  GridSpec g{12.0, 64, 10.0};
  auto f = packets(g, rng), g1 = packets(g, rng), g2 = packets(g, rng);
  const double a = 0.7, b = -1.3;
  SpectralState comb = g1;
  for (int j = 0; j < g.n; ++j) comb.values[j] = a * g1.values[j] + b * g2.values[j];
  Interpolant F(f), G1(g1), G2(g2), C(comb);
  auto r1 = collision_transform(F, G1, rule), r2 = collision_transform(F, G2, rule), rc = collision_transform(F, C, rule);
  double scale = 0.0, err = 0.0;
  for (int j = 0; j < g.n; ++j) {
    scale = std::max(scale, std::abs(rc[j]));
    err = std::max(err, std::abs(rc[j] - (a * r1[j] + b * r2[j])));
  }
  EXPECT_LE(err, 1e-10 * scale);
}

TEST(Collision, PairingVanishesForMaxwellians) {
  KernelSpec k;
  auto rule = QuadratureRule::make(k, 1e-9);
  auto m = init_from_profile(Gaussian{1, 1}, kGrid);
  std::mt19937_64 rng(9);
  EXPECT_NEAR(weak_pairing(m, m, packets(kGrid, rng), k, rule), 0.0, 1e-9);
}

TEST(Collision, PairingAgainstWideningWindowVanishes) {
  // h(v) = exp(−v²/(2L²)) tends to the constant 1; the pairing then measures mass change.
  KernelSpec k;
  auto rule = QuadratureRule::make(k, 1e-10);
  GridSpec g{20.0, 512, 10.0};
  auto f = init_from_profile(Indicator{1, 1}, g);
  double prev = std::numeric_limits<double>::infinity();
  for (double L : {1.0, 2.0, 4.0}) {
    auto h = init_from_profile(Gaussian{L * std::sqrt(2 * kPi), L * L}, g);
    double p = std::abs(weak_pairing(f, f, h, k, rule));
    EXPECT_LT(p, prev) << L;
    prev = p;
  }
  EXPECT_LT(prev, 1e-3);
}

TEST(Collision, GridMismatchRejected) {
  KernelSpec k;
  auto rule = QuadratureRule::make(k, 1e-9);
  auto a = init_from_profile(Gaussian{}, kGrid);
  auto b = init_from_profile(Gaussian{}, GridSpec{20.0, 128, 10.0});
  try {
    weak_pairing(a, a, b, k, rule);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DomainError);
  }
}

TEST(Collision, PairingMatchesPhysicalTripleIntegral) {
  KernelSpec k;
  auto rule = QuadratureRule::make(k, 1e-11);
  GridSpec g{12.0, 48, 10.0};
  BruteForceGrid bg{10.0, 161};
  std::mt19937_64 rng(21);
  for (int i = 0; i < 2; ++i) {
    auto f = packets(g, rng), gg = packets(g, rng), h = packets(g, rng);
    double a = weak_pairing(f, gg, h, k, rule), b = weak_pairing_physical(f, gg, h, k, rule, bg);
    EXPECT_NEAR(a, b, 1e-6 * std::abs(b));
  }
}

TEST(Collision, CoercivitySplitIdentity) {
  KernelSpec k;
  auto rule = QuadratureRule::make(k, 1e-11);
  GridSpec g{12.0, 48, 10.0};
  BruteForceGrid bg{10.0, 161};
  auto f = init_from_profile(Gaussian{1, 1}, g);
  SpectralState herm = zero_state(g);
  for (int j = 0; j < g.n; ++j) herm.values[j] = g.xi(j) * g.xi(j) * std::exp(-0.5 * g.xi(j) * g.xi(j));
  auto split = coercivity_split(f, herm, k, rule, bg);
  EXPECT_GT(split.positive_part, 0.0);
  double rhs = -weak_pairing(f, herm, herm, k, rule);
  EXPECT_NEAR(split.positive_part - split.cancellation_part, rhs, 1e-6 * std::abs(rhs));
}

TEST(Collision, CoercivityPositivePartIsQuadraticAndShrinksForWiderG) {
  KernelSpec k;
  auto rule = QuadratureRule::make(k, 1e-10);
  GridSpec g{12.0, 48, 10.0};
  BruteForceGrid bg{10.0, 161};
  auto f = init_from_profile(Gaussian{1, 1}, g);
  auto narrow = init_from_profile(Gaussian{1, 0.5}, g);
  auto wide = init_from_profile(Gaussian{1, 2}, g);
  auto doubled = narrow;
  for (double& x : doubled.values) x *= 2.0;
  auto pn = coercivity_split(f, narrow, k, rule, bg);
  auto pw = coercivity_split(f, wide, k, rule, bg);
  auto pd = coercivity_split(f, doubled, k, rule, bg);
  EXPECT_NEAR(pd.positive_part, 4.0 * pn.positive_part, 1e-9 * pd.positive_part);
  EXPECT_GT(pw.positive_part, 0.0);
  // (g(v') − g(v))² is smaller per unit ‖g‖² when g varies more slowly.
  EXPECT_LT(pw.positive_part / pw.g_l2_sq, pn.positive_part / pn.g_l2_sq);
  for (const auto* st : {&narrow, &wide}) {
    auto sp = coercivity_split(f, *st, k, rule, bg);
    double q = -weak_pairing(f, *st, *st, k, rule);
    EXPECT_NEAR(sp.positive_part - sp.cancellation_part, q, 1e-6 * std::abs(q));
  }
}

TEST(Collision, CoercivityRejectsNegativeDensity) {
  KernelSpec k;
  auto rule = QuadratureRule::make(k, 1e-9);
  GridSpec g{12.0, 48, 10.0};
  auto f = init_from_profile(Packet{1.0, 3.0, 1.0}, g);
  auto h = init_from_profile(Gaussian{}, g);
  try {
    coercivity_split(f, h, k, rule);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DomainError);
  }
}
