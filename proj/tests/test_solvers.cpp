#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "dpmfg/solver.hpp"
#include "dpmfg/solver_admm.hpp"
#include "dpmfg/solver_cp.hpp"
#include "oracles.hpp"

using namespace dpmfg;

namespace {

double worst(const LogRow& r) {
  return std::max({r.norms.pi.inf, r.norms.m.inf, r.norms.gamma.inf, r.norms.P.inf});
}

SolverOptions options(Algorithm a, int N) {
  SolverOptions o;
  o.algorithm = a;
  o.N = N;
  o.log_every = 100;
  return o;
}

// A state with every ADMM block populated, for the minimizer checks.
AdmmState warm_state(const MfgInstance& inst, int steps) {
  AdmmState s = admm_initial_state(inst);
  for (int k = 0; k < steps; ++k) admm_step(s, 1.0, inst);
  return s;
}

template <class F>
void perturb(F& f, std::mt19937_64& rng, double eps) {
  std::normal_distribution<double> nd;
  for (double& v : f.data()) v += eps * nd(rng);
}

}  // namespace

TEST(StepSizeGuard, RefusesLargeSteps) {
  EXPECT_THROW(check_step_sizes(1.0, 1.0, 1.0), SolverError);
  EXPECT_THROW(check_step_sizes(0.5, 2.0, 1.0), SolverError);
  EXPECT_NO_THROW(check_step_sizes(0.5, 1.9, 1.0));
  EXPECT_THROW(check_step_sizes(0.0, 1.0, 1.0), SolverError);

  const MfgInstance e = build_example1(6, 6);
  const double est = op_norm(to_unscaled(e).core).estimate;
  for (Algorithm a : {Algorithm::cp, Algorithm::cp_bregman}) {
    SolverOptions o = options(a, 10);
    o.tau = 1.0 / est;
    o.sigma = 1.0 / est;
    EXPECT_THROW(solve(e, o), SolverError);
    o.tau = 0.9 / est;
    EXPECT_NO_THROW(solve(e, o));
  }
}

// Ergodic means decay like C/k with C about 2.3 on the toy, so 1e-4 needs ~2.3e4 steps.
TEST(CpEuclidean, ToyErgodicResiduals) {
  const SolveResult r = solve(oracle::toy_instance(), options(Algorithm::cp, 30000));
  EXPECT_LE(worst(r.log.rows.back()), 1e-4);
  EXPECT_LE(worst(r.log.last_rows.back()), 1e-10);
  EXPECT_NEAR(r.x.w(0, 0, 0), 0.625, 1e-3);
  EXPECT_NEAR(r.x.w(0, 0, 1), 0.125, 1e-3);
  for (const LogRow& row : r.log.rows)
    if (row.k >= 1000) EXPECT_LE(row.k * worst(row), 3.0) << "k=" << row.k;
}

TEST(CpBregman, ToyErgodicResiduals) {
  const SolveResult r = solve(oracle::toy_instance(), options(Algorithm::cp_bregman, 30000));
  EXPECT_LE(worst(r.log.rows.back()), 1e-4);
  for (const LogRow& row : r.log.rows)
    if (row.k >= 1000) EXPECT_LE(row.k * worst(row), 3.0) << "k=" << row.k;
}

TEST(Admm, ToyResiduals) {
  const SolveResult r = solve(oracle::toy_instance(), options(Algorithm::admm, 10000));
  EXPECT_LE(worst(r.log.rows.back()), 1e-5);
  EXPECT_NEAR(r.report.primal, oracle::kToyValue, 1e-6);
}

TEST(Admg, ToyResiduals) {
  const SolveResult r = solve(oracle::toy_instance(), options(Algorithm::admg, 10000));
  EXPECT_LE(worst(r.log.rows.back()), 1e-5);
}

TEST(Admg, ExampleTwoResidualsDecreaseByDecile) {
  SolverOptions o = options(Algorithm::admg, 5000);
  o.log_every = 500;
  const SolveResult r = solve(build_example2(10, 10), o);
  ASSERT_EQ(r.log.rows.size(), 10u);
  for (std::size_t i = 1; i < r.log.rows.size(); ++i)
    EXPECT_LE(worst(r.log.rows[i]), worst(r.log.rows[i - 1])) << "k=" << r.log.rows[i].k;
}

TEST(CpEuclidean, StepLengthsStayBounded) {
  const MfgInstance inst = to_unscaled(build_example1(8, 8)).core;
  const double est = op_norm(inst).estimate * (1.0 + 1e-6);
  CpState s = cp_initial_state(inst, CpVariant::euclidean);
  double running_min = kInf, first = 0.0;
  for (int k = 0; k < 2000; ++k) {
    const CpState prev = s;
    cp_step_euclidean(s, 0.95 / est, 0.95 / est, inst);
    const double len = std::sqrt((s.x.m1 - prev.x.m1).norm2_squared() + (s.x.w - prev.x.w).norm2_squared() +
                                 (s.x.m2 - prev.x.m2).norm2_squared() + (s.x.D - prev.x.D).norm2_squared()) +
                       std::sqrt((s.y.u - prev.y.u).norm2_squared() + (s.y.gamma - prev.y.gamma).norm2_squared() +
                                 (s.y.P - prev.y.P).norm2_squared());
    if (k == 0) first = len;
    EXPECT_LE(len, 100.0 * (first + 1.0));
    EXPECT_LE(std::min(running_min, len), running_min);
    running_min = std::min(running_min, len);
  }
  EXPECT_LT(running_min, first);
}

TEST(CpBregman, InitialStateIsInterior) {
  const MfgInstance inst = to_unscaled(build_example1(5, 5, std::vector<double>{1, 0, 0, 0, 0})).core;
  const CpState s = cp_initial_state(inst, CpVariant::bregman);
  for (int t = 0; t <= 5; ++t)
    for (int x = 0; x < 5; ++x) EXPECT_GT(s.x.m1(t, x), 0.0);
  for (int t = 0; t < 5; ++t)
    for (int x = 0; x < 5; ++x)
      for (int y : inst.support(t, x)) EXPECT_GT(s.x.w(t, x, y), 0.0);
}

TEST(CpEuclidean, LogsErgodicAndLastIterates) {
  SolverOptions o = options(Algorithm::cp, 1000);
  const SolveResult r = solve(build_example1(5, 5), o);
  EXPECT_EQ(r.log.rows.size(), 10u);
  EXPECT_EQ(r.log.last_rows.size(), 10u);
  EXPECT_EQ(r.log.rows.back().k, 1000);
  const SolveResult b = solve(build_example1(5, 5), options(Algorithm::cp_bregman, 1000));
  EXPECT_TRUE(b.log.last_rows.empty());
}

TEST(Solver, ToleranceStopsEarly) {
  SolverOptions o = options(Algorithm::admm, 100000);
  o.tol = 1e-6;
  const SolveResult r = solve(oracle::toy_instance(), o);
  EXPECT_LT(r.iterations, 100000);
  EXPECT_LE(worst(r.log.rows.back()), 1e-6);
}

TEST(Solver, RejectsInvalidInstance) {
  InstanceData d = build_example1(4, 4).data();
  d.m0[0] += 0.5;
  EXPECT_THROW(solve(MfgInstance(d), options(Algorithm::cp, 10)), std::invalid_argument);
}

TEST(Admm, DegeneratePriceChannelIsAnError) {
  InstanceData d = oracle::toy_instance().data();
  d.phi = {make_quadbox(1.0, 0.0, -kInf, kInf)};
  EXPECT_THROW(solve(MfgInstance(d), options(Algorithm::admm, 10)), SolverError);
}

TEST(Admm, UpdateUMinimizesAugmentedLagrangian) {
  std::mt19937_64 rng(51);
  const MfgInstance inst = to_unscaled(build_example2(4, 4)).core;
  AdmmState s = warm_state(inst, 7);
  admm_update_u(s, 1.0, inst);
  const double base = augmented_lagrangian(s, 1.0, inst);
  for (int rep = 0; rep < 20; ++rep) {
    AdmmState p = s;
    perturb(p.u, rng, 1e-4);
    EXPECT_GE(augmented_lagrangian(p, 1.0, inst) - base, -1e-12);
  }
}

TEST(Admm, UpdateGammaPMinimizesAugmentedLagrangian) {
  std::mt19937_64 rng(52);
  for (const MfgInstance& inst : {to_unscaled(build_example1(4, 4)).core, to_unscaled(build_example2(4, 4)).core}) {
    AdmmState s = warm_state(inst, 7);
    admm_update_u(s, 1.0, inst);
    admm_update_gamma_P(s, 1.0, inst);
    const double base = augmented_lagrangian(s, 1.0, inst);
    ASSERT_TRUE(std::isfinite(base));
    for (int rep = 0; rep < 20; ++rep) {
      AdmmState p = s;
      perturb(p.gamma, rng, 1e-4);
      EXPECT_GE(augmented_lagrangian(p, 1.0, inst) - base, -1e-12);
      p = s;
      perturb(p.P, rng, 1e-4);
      EXPECT_GE(augmented_lagrangian(p, 1.0, inst) - base, -1e-12);
    }
  }
}

TEST(Admm, UpdateAbStaysInQ) {
  const MfgInstance inst = to_unscaled(build_example1(4, 4)).core;
  AdmmState s = warm_state(inst, 5);
  admm_update_u(s, 1.0, inst);
  admm_update_gamma_P(s, 1.0, inst);
  admm_update_ab(s, 1.0, inst);
  for (int t = 0; t < inst.T(); ++t)
    for (int x = 0; x < inst.n(); ++x)
      for (int y : inst.support(t, x)) EXPECT_LE(s.a(t, x) + s.b(t, x, y) - inst.beta(t, x, y), 1e-12);
  for (int x = 0; x < inst.n(); ++x) EXPECT_EQ(s.a(inst.T(), x), 0.0);
  EXPECT_TRUE(std::isfinite(augmented_lagrangian(s, 1.0, inst)));
}

TEST(Admm, IsDeterministic) {
  const SolveResult a = solve(build_example2(5, 5), options(Algorithm::admm, 500));
  const SolveResult b = solve(build_example2(5, 5), options(Algorithm::admm, 500));
  EXPECT_TRUE(a.x.m1 == b.x.m1);
  EXPECT_TRUE(a.y.P == b.y.P);
}
