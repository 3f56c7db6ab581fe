#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "dpmfg/potential.hpp"
#include "dpmfg/prox.hpp"

using namespace dpmfg;

namespace {

PotentialPtr random_quadbox(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::uniform_int_distribution<int> kind(0, 3);
  const double c = std::abs(u(rng));
  const double r = u(rng);
  double lo = u(rng), hi = u(rng);
  if (lo > hi) std::swap(lo, hi);
  switch (kind(rng)) {
    case 0: lo = -kInf; break;
    case 1: hi = kInf; break;
    case 2: lo = -kInf, hi = kInf; break;
    default: break;
  }
  return make_quadbox(c, r, lo, hi);
}

// First-order condition of prox: (z - x)/lam in dg(x).
double prox_residual(const ScalarPotential& g, double lam, double z) {
  const double x = g.prox(lam, z);
  return g.subdiff(x).distance((z - x) / lam);
}

}  // namespace

TEST(Potential, ProxFirstOrderConditionQuadBox) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> lam(0.01, 10.0), z(-5.0, 5.0);
  for (int i = 0; i < 1000; ++i) {
    const auto g = random_quadbox(rng);
    const double l = lam(rng), zz = z(rng);
    EXPECT_LE(prox_residual(*g, l, zz), 1e-10) << g->describe();
  }
}

TEST(Potential, ProxFirstOrderConditionZeroAndScaled) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> lam(0.01, 10.0), z(-5.0, 5.0), k(0.1, 3.0);
  for (int i = 0; i < 1000; ++i) {
    const double l = lam(rng), zz = z(rng);
    EXPECT_LE(prox_residual(*make_zero(), l, zz), 1e-10);
    const auto g = random_quadbox(rng)->scaled(k(rng), k(rng));
    EXPECT_LE(prox_residual(*g, l, zz), 1e-10) << g->describe();
  }
}

TEST(Potential, MoreauIdentity) {
  // prox_{lam g}(z) + lam prox_{g*/lam}(z/lam) = z
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> lam(0.01, 10.0), z(-5.0, 5.0);
  for (int i = 0; i < 1000; ++i) {
    const auto g = random_quadbox(rng);
    const double l = lam(rng), zz = z(rng);
    const double x = g->prox(l, zz);
    const double p = conj_prox(*g, 1.0 / l, zz / l);
    EXPECT_NEAR(x + l * p, zz, 1e-10);
    // p maximizes p' x - g*(p'): x lies in dg*(p)
    EXPECT_LE(g->conj_subdiff(p).distance(x), 1e-10) << g->describe();
  }
}

TEST(Potential, ConjugateSubdifferentialMatchesGridSearch) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 100; ++i) {
    const double c = 0.1 + std::abs(u(rng));
    double lo = u(rng), hi = u(rng);
    if (lo > hi) std::swap(lo, hi);
    QuadBox g(c, u(rng), lo, hi);
    const double p = 2.0 * u(rng);
    const int steps = 20000;
    const double h = (hi - lo) / steps;
    double best = -kInf, arg = lo;
    for (int s = 0; s <= steps; ++s) {
      const double x = lo + s * h;
      const double v = p * x - g.eval(x);
      if (v > best) best = v, arg = x;
    }
    const Interval sd = g.conj_subdiff(p);
    ASSERT_TRUE(sd.is_singleton());
    EXPECT_NEAR(sd.lo, arg, h);
    // grid maximum undershoots by at most the slope times the spacing
    EXPECT_GE(g.conj_eval(p), best - 1e-12);
    EXPECT_LE(g.conj_eval(p) - best, h * (std::abs(p) + c * (std::abs(lo) + std::abs(hi) + 4.0)));
  }
}

TEST(Potential, LinearQuadBoxConjugateIsSupportFunction) {
  QuadBox g(0.0, 0.0, -1.0, 3.0);
  EXPECT_DOUBLE_EQ(g.conj_eval(2.0), 6.0);
  EXPECT_DOUBLE_EQ(g.conj_eval(-2.0), 2.0);
  EXPECT_EQ(g.conj_subdiff(0.0).lo, -1.0);
  EXPECT_EQ(g.conj_subdiff(0.0).hi, 3.0);
  QuadBox half(0.0, 0.0, 0.0, kInf);
  EXPECT_EQ(half.conj_eval(1.0), kInf);
  EXPECT_TRUE(half.conj_subdiff(1.0).empty);
}

TEST(Potential, ZeroConjugateIsIndicatorOfOrigin) {
  const auto z = make_zero();
  EXPECT_EQ(z->conj_eval(0.0), 0.0);
  EXPECT_EQ(z->conj_eval(1e-3), kInf);
  EXPECT_TRUE(z->conj_subdiff(0.0).is_whole_line());
  EXPECT_TRUE(z->conj_subdiff(-1.0).empty);
  EXPECT_TRUE(z->is_zero());
}

TEST(Potential, ScaledMatchesDefinition) {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> u(-2.0, 2.0), k(0.1, 3.0);
  for (int i = 0; i < 200; ++i) {
    const auto g = random_quadbox(rng);
    const double kk = k(rng), hh = k(rng);
    const auto s = g->scaled(kk, hh);
    const double v = 3.0 * u(rng);
    const double expect = kk * g->eval(v / hh);
    if (std::isinf(expect)) {
      EXPECT_EQ(s->eval(v), kInf);
    } else {
      EXPECT_NEAR(s->eval(v), expect, 1e-10 * (1.0 + std::abs(expect)));
    }
  }
}

TEST(Potential, QuadBoxRejectsBadParameters) {
  EXPECT_THROW(QuadBox(-1.0, 0.0, 0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(QuadBox(1.0, 0.0, 2.0, 1.0), std::invalid_argument);
  EXPECT_THROW(make_zero()->scaled(0.0, 1.0), std::invalid_argument);
}
