#include "dpmfg/solver_cp.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "dpmfg/prox.hpp"

namespace dpmfg {

namespace {

// Running sum with compensation, one per field.
template <class F>
class KahanSum {
 public:
  explicit KahanSum(const F& like) : sum_(like), comp_(like) {
    sum_.fill(0.0);
    comp_.fill(0.0);
  }
  void add(const F& v) {
    auto s = sum_.data();
    auto c = comp_.data();
    const auto x = v.data();
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double y = x[i] - c[i];
      const double t = s[i] + y;
      c[i] = (t - s[i]) - y;
      s[i] = t;
    }
  }
  F mean(int k) const { return (1.0 / k) * sum_; }

 private:
  F sum_, comp_;
};

struct Averages {
  KahanSum<TimeStateField> m1, m2, u, gamma;
  KahanSum<TransitionField> w;
  KahanSum<TimeSeries> D, P;

  explicit Averages(const CpState& s)
      : m1(s.x.m1), m2(s.x.m2), u(s.y.u), gamma(s.y.gamma), w(s.x.w), D(s.x.D), P(s.y.P) {}
  void add(const CpState& s) {
    m1.add(s.x.m1);
    w.add(s.x.w);
    m2.add(s.x.m2);
    D.add(s.x.D);
    u.add(s.y.u);
    gamma.add(s.y.gamma);
    P.add(s.y.P);
  }
  PrimalPoint primal(int k) const { return {m1.mean(k), w.mean(k), m2.mean(k), D.mean(k)}; }
  DualPoint dual(int k) const { return {u.mean(k), gamma.mean(k), P.mean(k)}; }
};

// (m2, D) prox and the over-relaxed dual step shared by both variants.
void finish_step(CpState& s, const PrimalPoint& xp, double tau, double sigma, const MfgInstance& inst) {
  const GridShape g = inst.shape();
  for (int t = 0; t <= g.T; ++t)
    for (int x = 0; x < g.n; ++x)
      s.x.m2(t, x) = inst.F(t, x).prox(tau, xp.m2(t, x) + tau * s.y.gamma(t, x));
  for (int t = 0; t < g.T; ++t) s.x.D(t) = inst.phi(t).prox(tau, xp.D(t) + tau * s.y.P(t));

  PrimalPoint xt{2.0 * s.x.m1 - xp.m1, 2.0 * s.x.w - xp.w, 2.0 * s.x.m2 - xp.m2, 2.0 * s.x.D - xp.D};
  DualPoint ax = composite_A(xt, inst);
  ax.u += inst.m0_bar();
  s.y.u.axpy(sigma, ax.u);
  s.y.gamma.axpy(sigma, ax.gamma);
  s.y.P.axpy(sigma, ax.P);
  ++s.k;
}

}  // namespace

CpState cp_initial_state(const MfgInstance& inst, CpVariant variant) {
  const GridShape g = inst.shape();
  TransitionField pi(g);
  for (int t = 0; t < g.T; ++t)
    for (int x = 0; x < g.n; ++x) {
      const auto sup = inst.support(t, x);
      for (int y : sup) pi(t, x, y) = 1.0 / static_cast<double>(sup.size());
    }

  TimeStateField m1 = kolmogorov_forward(pi, inst);
  if (variant == CpVariant::bregman) {
    bool zeros = false;
    for (double v : inst.m0()) zeros = zeros || v <= 0.0;
    if (zeros) {
      InstanceData d = inst.data();
      for (double& v : d.m0) v = 0.5 * v + 0.5 / g.n;
      m1 = kolmogorov_forward(pi, MfgInstance(std::move(d)));
    }
  }

  CpState s{PrimalPoint::zeros(g), DualPoint::zeros(g), 0};
  for (int t = 0; t < g.T; ++t)
    for (int x = 0; x < g.n; ++x)
      for (int y : inst.support(t, x)) s.x.w(t, x, y) = m1(t, x) * pi(t, x, y);
  s.x.m1 = m1;
  s.x.m2 = m1;
  s.x.D = op_A(s.x.w, inst);
  return s;
}

void check_step_sizes(double tau, double sigma, double norm) {
  if (!(tau > 0.0) || !(sigma > 0.0)) throw SolverError("step sizes must be positive");
  if (!(tau * sigma * norm * norm < 1.0)) {
    std::ostringstream os;
    os << "step sizes violate tau*sigma*|A|^2 < 1 (tau=" << tau << ", sigma=" << sigma
       << ", |A|=" << norm << ")";
    throw SolverError(os.str());
  }
}

void cp_step_euclidean(CpState& s, double tau, double sigma, const MfgInstance& inst) {
  const PrimalPoint xp = s.x;
  // z = x' - tau A* y' on the (m1, w) block; prox of the support function of Q.
  TimeStateField zm = xp.m1 - tau * (s.y.gamma - s.y.u);
  TransitionField zw = xp.w - tau * (op_A_star(s.y.P, inst) + op_S_star(s.y.u, inst));
  auto [a, b] = project_Q((1.0 / tau) * zm, (1.0 / tau) * zw, inst);
  s.x.m1 = zm - tau * a;
  s.x.w = zw - tau * b;
  finish_step(s, xp, tau, sigma, inst);
}

bool cp_step_bregman(CpState& s, double tau, double sigma, const MfgInstance& inst) {
  const PrimalPoint xp = s.x;
  const TimeStateField c1 = tau * (s.y.gamma - s.y.u);
  TransitionField c2 = inst.data().beta + op_A_star(s.y.P, inst) + op_S_star(s.y.u, inst);
  c2 *= tau;
  EntropicProxResult r = entropic_prox(xp.m1, xp.w, c1, c2, inst);
  s.x.m1 = std::move(r.m1);
  s.x.w = std::move(r.w);
  finish_step(s, xp, tau, sigma, inst);
  return !r.underflow;
}

SolveResult run_cp(const MfgInstance& scaled, const SolverOptions& opt, CpVariant variant) {
  if (opt.N < 1) throw std::invalid_argument("N must be at least 1");
  if (opt.log_every < 1) throw std::invalid_argument("log_every must be at least 1");
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  SolveResult res;
  res.algorithm = variant == CpVariant::euclidean ? Algorithm::cp : Algorithm::cp_bregman;
  const UnscaledProblem core = to_unscaled(scaled);
  res.map = core.map;
  const MfgInstance& inst = core.core;

  res.norm = op_norm(inst);
  const double guard = res.norm.estimate * (1.0 + 1e-6);
  res.tau = opt.tau.value_or(0.95 / guard);
  res.sigma = opt.sigma.value_or(0.95 / guard);
  check_step_sizes(res.tau, res.sigma, guard);

  CpState s = cp_initial_state(inst, variant);
  Averages avg(s);
  double min_pi = kInf;

  for (int k = 1; k <= opt.N; ++k) {
    if (variant == CpVariant::euclidean) {
      cp_step_euclidean(s, res.tau, res.sigma, inst);
    } else if (!cp_step_bregman(s, res.tau, res.sigma, inst)) {
      std::ostringstream os;
      os << "entropic prox underflow at iteration " << k;
      throw SolverError(os.str());
    }
    avg.add(s);
    res.iterations = k;

    if (k % opt.log_every != 0 && k != opt.N) continue;
    const PrimalPoint xa = avg.primal(k);
    const DualPoint ya = avg.dual(k);
    ResidualReport rep = detail::scaled_report(core, scaled, xa.m1, xa.w, ya.gamma, ya.P);
    min_pi = std::min(min_pi, detail::min_entry(rep.eps_pi));
    LogRow row = detail::make_row(k, rep, elapsed());
    res.log.rows.push_back(row);
    if (variant == CpVariant::euclidean) {
      ResidualReport last = detail::scaled_report(core, scaled, s.x.m1, s.x.w, s.y.gamma, s.y.P);
      min_pi = std::min(min_pi, detail::min_entry(last.eps_pi));
      res.log.last_rows.push_back(detail::make_row(k, last, elapsed()));
    }
    if (opt.on_log) opt.on_log(row);
    res.x = xa;
    res.y = ya;
    res.report = std::move(rep);
    if (detail::below_tol(row, opt.tol)) break;
  }
  res.x_last = s.x;
  res.y_last = s.y;
  res.log.min_eps_pi = min_pi;
  res.seconds = elapsed();
  return res;
}

}  // namespace dpmfg
