#include <cmath>

#include <gtest/gtest.h>

#include "dpmfg/diagnostics.hpp"
#include "dpmfg/solver.hpp"
#include "oracles.hpp"

using namespace dpmfg;

TEST(Toy, GridSearchFindsStayProbability) {
  double best = kInf, arg = -1.0;
  for (int i = 0; i <= 1000000; ++i) {
    const double p = i * 1e-6;
    const double v = oracle::toy_cost(p);
    if (v < best) best = v, arg = p;
  }
  EXPECT_NEAR(arg, 5.0 / 6.0, 1e-6);
  EXPECT_NEAR(best, oracle::kToyValue, 1e-12);
}

TEST(Residuals, VanishAtExactToySolution) {
  const MfgInstance inst = oracle::toy_instance();
  const PrimalPoint x = oracle::toy_primal();
  const DualPoint y = oracle::toy_dual();
  const ResidualReport r = residuals(x.m1, x.w, y.gamma, y.P, inst);
  EXPECT_LE(r.norms.pi.inf, 1e-10);
  EXPECT_LE(r.norms.m.inf, 1e-10);
  EXPECT_LE(r.norms.gamma.inf, 1e-10);
  EXPECT_LE(r.norms.P.inf, 1e-10);
  EXPECT_NEAR(r.norms.gap, 0.0, 1e-10);
  for (double v : r.eps_pi.data()) EXPECT_GE(v, 0.0);
  for (std::size_t i = 0; i < y.u.size(); ++i) EXPECT_NEAR(r.u_hat.data()[i], y.u.data()[i], 1e-15);
  EXPECT_NEAR(r.pi(0, 0, 0), 5.0 / 6.0, 1e-15);
  EXPECT_EQ(r.pi(0, 1, 1), 1.0);
}

TEST(Residuals, PrimalAndDualValuesAtToySolution) {
  const MfgInstance inst = oracle::toy_instance();
  EXPECT_NEAR(primal_value(oracle::toy_primal(), inst), oracle::kToyValue, 1e-15);
  EXPECT_NEAR(dual_value(oracle::toy_dual(), inst), oracle::kToyValue, 1e-15);
}

TEST(Residuals, WeakDualityOnPerturbedPoints) {
  const MfgInstance inst = oracle::toy_instance();
  for (double p : {0.0, 0.3, 0.6, 0.9, 1.0}) {
    PrimalPoint x = oracle::toy_primal();
    x.w(0, 0, 0) = 0.75 * p;
    x.w(0, 0, 1) = 0.75 * (1.0 - p);
    x.m1(1, 0) = 0.75 * p;
    x.m1(1, 1) = 1.0 - 0.75 * p;
    x.m2 = x.m1;
    EXPECT_NEAR(primal_value(x, inst), oracle::toy_cost(p), 1e-15);
    EXPECT_GE(primal_value(x, inst), oracle::kToyValue);
  }
  for (double s : {0.0, 0.4, 0.9, 1.1}) {
    DualPoint y = oracle::toy_dual();
    y.gamma = s * y.gamma;
    y.u = dp_backward(y.gamma, y.P, inst);
    EXPECT_LE(dual_value(y, inst), oracle::kToyValue + 1e-15);
  }
}

TEST(Residuals, InfeasiblePointsHaveInfiniteCriteria) {
  const MfgInstance inst = oracle::toy_instance();
  PrimalPoint x = oracle::toy_primal();
  x.m1(1, 0) += 0.1;
  EXPECT_EQ(primal_value(x, inst), kInf);
  DualPoint y = oracle::toy_dual();
  y.u(0, 0) += 0.1;  // violates the dynamic programming inequality
  EXPECT_EQ(dual_value(y, inst), -kInf);
}

TEST(Residuals, EpsPiNonnegativeOnArbitraryInput) {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> nd;
  for (int rep = 0; rep < 50; ++rep) {
    const MfgInstance inst(oracle::random_data(rng, 3, 4));
    TimeStateField m(inst.shape()), gamma(inst.shape());
    TransitionField w(inst.shape());
    TimeSeries P(inst.shape());
    for (double& v : m.data()) v = nd(rng);
    for (double& v : gamma.data()) v = nd(rng);
    for (double& v : w.data()) v = nd(rng);
    for (double& v : P.data()) v = nd(rng);
    const ResidualReport r = residuals(m, w, gamma, P, inst);
    for (double v : r.eps_pi.data()) EXPECT_GE(v, 0.0);
  }
}

TEST(Residuals, InfiniteSentinelUsesDistance) {
  // F = 0 forces gamma = 0; a nonzero gamma is measured by |gamma|.
  const MfgInstance inst = to_unscaled(build_example2(3, 3)).core;
  TimeStateField m(inst.shape(), 1.0 / 3.0), gamma(inst.shape());
  gamma(1, 1) = -0.25;
  const ResidualReport r = residuals(m, TransitionField(inst.shape()), gamma, TimeSeries(inst.shape()), inst);
  EXPECT_EQ(r.eps_gamma(1, 1), kInf);
  EXPECT_DOUBLE_EQ(r.gamma_infeasibility(1, 1), 0.25);
  EXPECT_DOUBLE_EQ(r.norms.gamma.inf, 0.25);
}

TEST(Certificates, HoldAtExactToySolution) {
  const CertificateReport c = certificates(oracle::toy_primal(), oracle::toy_dual(), oracle::toy_instance());
  EXPECT_TRUE(c.all());
  for (double v : c.magnitude) EXPECT_LE(v, 1e-15);
}

TEST(Certificates, DetectViolations) {
  const MfgInstance inst = oracle::toy_instance();
  PrimalPoint x = oracle::toy_primal();
  DualPoint y = oracle::toy_dual();
  x.m2(1, 0) += 0.01;
  CertificateReport c = certificates(x, y, inst);
  EXPECT_FALSE(c.holds[5]);
  EXPECT_NEAR(c.magnitude[5], 0.01, 1e-15);
  EXPECT_NEAR(c.magnitude[2], 0.01, 1e-15);
  x = oracle::toy_primal();
  y.u(1, 1) += 0.5;
  c = certificates(x, y, inst);
  EXPECT_FALSE(c.holds[1]);
  EXPECT_FALSE(c.holds[0]);
}

TEST(Residuals, ScaledRoundTripAtConvergence) {
  const MfgInstance scaled = build_example2(6, 6);
  SolverOptions opt;
  opt.algorithm = Algorithm::admm;
  opt.N = 20000;
  opt.tol = 1e-11;
  const SolveResult res = solve(scaled, opt);
  const UnscaledProblem core = to_unscaled(scaled);
  const ResidualReport rc = residuals(res.x.m1, res.x.w, res.y.gamma, res.y.P, core.core);
  const ResidualReport rs = scaled_residuals(rc, scaled, core.map);
  EXPECT_LE(rc.norms.m.inf, 1e-10);
  EXPECT_LE(rs.norms.m.inf, 1e-10 / scaled.dx());
  EXPECT_LE(rs.norms.pi.inf, 1e-10 / scaled.dt());
  EXPECT_LE(rs.norms.gamma.inf, 1e-9);
  EXPECT_LE(rs.norms.P.inf, 1e-9);
  // densities recovered as mass / dx sum to 1 / dx
  for (int s = 0; s <= scaled.T(); ++s) {
    double total = 0.0;
    for (double v : rs.m.row(s)) total += v * scaled.dx();
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
}
