#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "dpmfg/instance.hpp"

using namespace dpmfg;

TEST(Instance, ExamplesAreValid) {
  EXPECT_TRUE(validate(build_example1(20, 20)).empty());
  EXPECT_TRUE(validate(build_example2(20, 20)).empty());
  EXPECT_TRUE(validate(build_example1(3, 50)).empty());
}

TEST(Instance, UnnormalizedInitialLaw) {
  InstanceData d = build_example1(5, 5).data();
  for (double& v : d.m0) v *= 0.9;
  const auto out = validate(d);
  ASSERT_FALSE(out.empty());
  EXPECT_EQ(out.front(), "initial law not normalized");
}

TEST(Instance, EmptyTransitionDomain) {
  InstanceData d = build_example1(5, 5).data();
  for (int y = 0; y < 5; ++y) d.mask.set(0, 0, y, false);
  const auto out = validate(d);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_NE(out.front().find("empty transition domain"), std::string::npos);
  EXPECT_NE(out.front().find("t=0, x=0"), std::string::npos);
}

TEST(Instance, ShapeMismatchThrows) {
  InstanceData d = build_example1(5, 5).data();
  d.phi.pop_back();
  EXPECT_THROW(MfgInstance{d}, std::invalid_argument);
  EXPECT_FALSE(validate(d).empty());
}

TEST(Instance, ExampleOneHasInertPriceChannel) {
  const MfgInstance e1 = build_example1(12, 9);
  EXPECT_TRUE(e1.price_channel_inert());
  for (int t = 0; t < e1.T(); ++t) {
    EXPECT_TRUE(e1.phi(t).is_zero());
    EXPECT_EQ(e1.alpha_bar(t), 0.0);
  }
  const MfgInstance e2 = build_example2(12, 9);
  EXPECT_FALSE(e2.price_channel_inert());
  for (int s = 0; s <= e2.T(); ++s)
    for (int x = 0; x < e2.n(); ++x) EXPECT_TRUE(e2.F(s, x).is_zero());
}

TEST(Instance, NeighbourMaskAndCost) {
  const MfgInstance e = build_example1(10, 10);
  EXPECT_EQ(e.support(0, 0).size(), 2u);
  EXPECT_EQ(e.support(0, 5).size(), 3u);
  EXPECT_EQ(e.support(0, 9).size(), 2u);
  // (dx/dt)^2 / 4 with dx = dt
  EXPECT_DOUBLE_EQ(e.beta(0, 5, 6), 0.25);
  EXPECT_DOUBLE_EQ(e.beta(0, 5, 5), 0.0);
  EXPECT_FALSE(e.allowed(0, 5, 7));
}

TEST(Instance, CongestionWindowIsFloorInclusive) {
  const GridShape g{50, 50};
  // floor(50/3) = 16, floor(100/3) = 33
  EXPECT_EQ(example1_eta(g, 16, 16), 0.5);
  EXPECT_EQ(example1_eta(g, 33, 33), 0.5);
  EXPECT_EQ(example1_eta(g, 15, 20), 3.0);
  EXPECT_EQ(example1_eta(g, 20, 34), 3.0);
  const MfgInstance e = build_example1(50, 50);
  EXPECT_EQ(e.F(20, 20).subdiff(0.6).empty, true);
  EXPECT_EQ(e.F(0, 20).subdiff(0.6).empty, false);
}

TEST(Instance, ExogenousDemandPeak) {
  const auto d = example2_exogenous_demand(9);
  EXPECT_NEAR(d[0], 0.0, 1e-15);
  EXPECT_NEAR(d[1], 2.0, 1e-12);  // 4 pi / 8 = pi / 2
  EXPECT_NEAR(d[2], 0.0, 1e-12);
  EXPECT_NEAR(d[3], -2.0, 1e-12);
}

TEST(Instance, DefaultInitialLaw) {
  const auto m = default_initial_law(20);
  EXPECT_NEAR(std::accumulate(m.begin(), m.end(), 0.0), 1.0, 1e-14);
  EXPECT_DOUBLE_EQ(m[9], m[10]);
  EXPECT_GT(m[10], m[15]);
  // scaled peak under the cap 3
  EXPECT_LT(m[10] * 20, 3.0);
  const auto u = uniform_initial_law(4);
  EXPECT_EQ(u[2], 0.25);
}

TEST(Instance, RecoveryMapsInvertScaling) {
  const MfgInstance e = build_example2(7, 6);
  const UnscaledProblem p = to_unscaled(e);
  EXPECT_EQ(p.core.dx(), 1.0);
  EXPECT_EQ(p.core.dt(), 1.0);
  EXPECT_EQ(p.map.dx, e.dx());
  TimeStateField m(e.shape());
  TimeSeries P(e.shape());
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = 0.1 * static_cast<double>(i) + 0.3;
  for (int t = 0; t < e.T(); ++t) P(t) = std::sin(t + 0.5);
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
  const auto m2 = p.map.density_from_scaled(p.map.density_to_scaled(m));
  const auto g2 = p.map.congestion_from_scaled(p.map.congestion_to_scaled(m));
  const auto P2 = p.map.price_from_scaled(p.map.price_to_scaled(P));
  for (std::size_t i = 0; i < m.size(); ++i) {
    EXPECT_LE(rel(m2.data()[i], m.data()[i]), 1e-14);
    EXPECT_LE(rel(g2.data()[i], m.data()[i]), 1e-14);
  }
  for (int t = 0; t < e.T(); ++t) EXPECT_LE(rel(P2(t), P(t)), 1e-14);
}

TEST(Instance, UnscaledIsDeterministic) {
  const MfgInstance e = build_example1(6, 6);
  const UnscaledProblem a = to_unscaled(e), b = to_unscaled(e);
  EXPECT_TRUE(a.core.data().beta == b.core.data().beta);
  for (int s = 0; s <= 6; ++s)
    for (int x = 0; x < 6; ++x)
      for (double v : {0.0, 0.05, 0.2, 0.5}) EXPECT_EQ(a.core.F(s, x).eval(v), b.core.F(s, x).eval(v));
  // beta -> dt beta; cap 3 on the scaled density becomes 3 dx on the core mass.
  EXPECT_DOUBLE_EQ(a.core.beta(0, 2, 3), e.beta(0, 2, 3) * e.dt());
  EXPECT_EQ(a.core.F(0, 0).eval(3.0 * e.dx() * 1.0001), kInf);
  EXPECT_LT(a.core.F(0, 0).eval(3.0 * e.dx() * 0.9999), kInf);
}

TEST(Instance, BuildersRejectSmallGrids) {
  EXPECT_THROW(build_example1(2, 10), std::invalid_argument);
  EXPECT_THROW(build_example2(1, 10), std::invalid_argument);
  EXPECT_THROW(build_example1(5, 5, std::vector<double>{1.0}), std::invalid_argument);
}
