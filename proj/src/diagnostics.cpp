#include "dpmfg/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "dpmfg/prox.hpp"

namespace dpmfg {

namespace {

// Residual of "m in dg*(p)", or +inf when dg*(p) is empty.
double conj_residual(const ScalarPotential& g, double p, double m) {
  const Interval I = g.conj_subdiff(p);
  if (I.empty) return kInf;
  if (I.is_whole_line()) return 0.0;
  return m - I.project(m);
}

// Distance certificate for "p in dg(v)", symmetric in the two inclusions.
double subgradient_gap(const ScalarPotential& g, double v, double p) {
  return std::min(g.conj_subdiff(p).distance(v), g.subdiff(v).distance(p));
}

template <class Field>
NormPair effective_norms(const Field& eps, const Field& infeas) {
  NormPair r;
  double sq = 0.0;
  const auto e = eps.data();
  const auto f = infeas.data();
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double v = std::isinf(e[i]) ? f[i] : std::abs(e[i]);
    r.inf = std::max(r.inf, v);
    sq += v * v;
  }
  if (!e.empty()) r.rms = std::sqrt(sq / static_cast<double>(e.size()));
  return r;
}

template <class Field>
NormPair plain_norms(const Field& f) {
  return {f.norm_inf(), norm_rms(f)};
}

void fill_norms(ResidualReport& r) {
  r.norms.pi = plain_norms(r.eps_pi);
  r.norms.m = plain_norms(r.eps_m);
  r.norms.gamma = effective_norms(r.eps_gamma, r.gamma_infeasibility);
  r.norms.P = effective_norms(r.eps_P, r.P_infeasibility);
  r.norms.gap = r.primal - r.dual;
}

// min_y c(t,x,y) over S_x with c = beta + alpha P + u(t+1, y).
double min_cost(const MfgInstance& inst, const TimeStateField& u, const TimeSeries& P, int t, int x) {
  double best = kInf;
  for (int y : inst.support(t, x)) best = std::min(best, transition_cost(inst, u, P, t, x, y));
  return best;
}

}  // namespace

ResidualReport residuals(const TimeStateField& m, const TransitionField& w,
                         const TimeStateField& gamma, const TimeSeries& P, const MfgInstance& inst) {
  const GridShape g = inst.shape();
  const int T = g.T;
  ResidualReport r;
  r.m = m;
  r.gamma = gamma;
  r.P = P;
  r.u_hat = dp_backward(gamma, P, inst);
  r.pi = policy_recover(m, w, r.u_hat, P, inst);
  r.m_pi = kolmogorov_forward(r.pi, inst);

  r.eps_pi = StageStateField(g);
  for (int t = 0; t < T; ++t)
    for (int x = 0; x < g.n; ++x) {
      const double best = min_cost(inst, r.u_hat, P, t, x);
      double acc = 0.0;
      for (int y : inst.support(t, x)) acc += r.pi(t, x, y) * (transition_cost(inst, r.u_hat, P, t, x, y) - best);
      r.eps_pi(t, x) = acc;
    }

  r.eps_m = r.m_pi - m;

  r.eps_gamma = TimeStateField(g);
  r.gamma_infeasibility = TimeStateField(g);
  for (int s = 0; s <= T; ++s)
    for (int x = 0; x < g.n; ++x) {
      const ScalarPotential& F = inst.F(s, x);
      const double e = conj_residual(F, gamma(s, x), m(s, x));
      r.eps_gamma(s, x) = e;
      if (std::isinf(e)) r.gamma_infeasibility(s, x) = F.subdiff(m(s, x)).distance(gamma(s, x));
    }

  TransitionField w_pi(g);
  for (int t = 0; t < T; ++t)
    for (int x = 0; x < g.n; ++x)
      for (int y : inst.support(t, x)) w_pi(t, x, y) = r.m_pi(t, x) * r.pi(t, x, y);

  r.Q = TimeSeries(g);
  for (int t = 0; t < T; ++t) {
    double acc = 0.0;
    for (int x = 0; x < g.n; ++x)
      for (int y : inst.support(t, x)) acc += m(t, x) * r.pi(t, x, y) * inst.alpha(t, x, y);
    r.Q(t) = acc;
  }
  r.eps_P = TimeSeries(g);
  r.P_infeasibility = TimeSeries(g);
  for (int t = 0; t < T; ++t) {
    const ScalarPotential& phi = inst.phi(t);
    const double e = conj_residual(phi, P(t), r.Q(t));
    r.eps_P(t) = e;
    if (std::isinf(e)) r.P_infeasibility(t) = phi.subdiff(r.Q(t)).distance(P(t));
  }

  PrimalPoint rec{r.m_pi, w_pi, r.m_pi, op_A(w_pi, inst)};
  r.primal = primal_value(rec, inst, kGapDomainTol);
  r.dual = dual_value(DualPoint{r.u_hat, gamma, P}, inst);
  fill_norms(r);
  return r;
}

ResidualReport scaled_residuals(const ResidualReport& core, const MfgInstance& scaled,
                                const ScaleMap& map) {
  const GridShape g = scaled.shape();
  ResidualReport r = core;
  r.eps_pi *= 1.0 / map.dt;
  r.eps_m *= 1.0 / map.dx;
  for (double& v : r.eps_gamma.data())
    if (!std::isinf(v)) v /= map.dx;
  r.m = map.density_to_scaled(core.m);
  r.m_pi = map.density_to_scaled(core.m_pi);
  r.gamma = map.congestion_to_scaled(core.gamma);
  r.P = map.price_to_scaled(core.P);
  r.Q *= 1.0 / map.dx;

  for (int s = 0; s <= g.T; ++s)
    for (int x = 0; x < g.n; ++x)
      if (std::isinf(r.eps_gamma(s, x)))
        r.gamma_infeasibility(s, x) = scaled.F(s, x).subdiff(r.m(s, x)).distance(r.gamma(s, x));
  for (int t = 0; t < g.T; ++t)
    if (std::isinf(r.eps_P(t)))
      r.P_infeasibility(t) = scaled.phi(t).subdiff(r.Q(t) * map.dx).distance(r.P(t));
  fill_norms(r);
  return r;
}

double primal_value(const PrimalPoint& x, const MfgInstance& inst, double tol) {
  const GridShape g = inst.shape();
  const TimeStateField kol = op_S(x.w, inst) + inst.m0_bar() - x.m1;
  if (kol.norm_inf() > tol) return kInf;
  if ((x.m1 - x.m2).norm_inf() > tol) return kInf;
  if ((op_A(x.w, inst) - x.D).norm_inf() > tol) return kInf;

  double v = 0.0;
  for (int t = 0; t < g.T; ++t)
    for (int s = 0; s < g.n; ++s) v += perspective_eval(x.m1(t, s), x.w.row(t, s), t, s, inst, tol);
  for (int s = 0; s <= g.T; ++s)
    for (int y = 0; y < g.n; ++y) v += inst.F(s, y).eval_tolerant(x.m2(s, y), tol);
  for (int t = 0; t < g.T; ++t) v += inst.phi(t).eval_tolerant(x.D(t), tol);
  return v;
}

double dual_value(const DualPoint& y, const MfgInstance& inst, double tol) {
  const GridShape g = inst.shape();
  for (int x = 0; x < g.n; ++x)
    if (std::abs(y.u(g.T, x) - y.gamma(g.T, x)) > tol) return -kInf;
  for (int t = 0; t < g.T; ++t)
    for (int x = 0; x < g.n; ++x)
      if (y.u(t, x) - y.gamma(t, x) - min_cost(inst, y.u, y.P, t, x) > tol) return -kInf;

  double v = 0.0;
  for (int x = 0; x < g.n; ++x) v += inst.m0()[static_cast<std::size_t>(x)] * y.u(0, x);
  for (int t = 0; t < g.T; ++t) v -= inst.phi(t).conj_eval(y.P(t));
  for (int s = 0; s <= g.T; ++s)
    for (int x = 0; x < g.n; ++x) v -= inst.F(s, x).conj_eval(y.gamma(s, x));
  return v;
}

CertificateReport certificates(const PrimalPoint& x, const DualPoint& y, const MfgInstance& inst,
                               double tol) {
  const GridShape g = inst.shape();
  CertificateReport c;

  double c1 = 0.0;
  for (int t = 0; t < g.T; ++t)
    for (int s = 0; s < g.n; ++s) {
      const double m1 = x.m1(t, s);
      const double best = min_cost(inst, y.u, y.P, t, s);
      const double ineq = y.u(t, s) - y.gamma(t, s) - best;
      double fy = 0.0;
      double total = 0.0;
      double dom = std::max(0.0, -m1);
      for (int z = 0; z < g.n; ++z) {
        const double wz = x.w(t, s, z);
        if (!inst.allowed(t, s, z)) {
          dom = std::max(dom, std::abs(wz));
          continue;
        }
        dom = std::max(dom, -wz);
        total += wz;
        fy += wz * (transition_cost(inst, y.u, y.P, t, s, z) - best);
      }
      dom = std::max(dom, std::abs(total - m1));
      c1 = std::max({c1, std::max(0.0, ineq), std::abs(m1 * ineq), std::abs(fy), dom});
    }
  c.magnitude[0] = c1;

  double c2 = 0.0;
  for (int s = 0; s < g.n; ++s) c2 = std::max(c2, std::abs(y.u(g.T, s) - y.gamma(g.T, s)));
  c.magnitude[1] = c2;

  double c3 = 0.0;
  for (int s = 0; s <= g.T; ++s)
    for (int z = 0; z < g.n; ++z)
      c3 = std::max(c3, subgradient_gap(inst.F(s, z), x.m2(s, z), y.gamma(s, z)));
  c.magnitude[2] = c3;

  double c4 = 0.0;
  for (int t = 0; t < g.T; ++t) c4 = std::max(c4, subgradient_gap(inst.phi(t), x.D(t), y.P(t)));
  c.magnitude[3] = c4;

  c.magnitude[4] = (x.m1 - op_S(x.w, inst) - inst.m0_bar()).norm_inf();
  c.magnitude[5] = (x.m1 - x.m2).norm_inf();
  c.magnitude[6] = (x.D - op_A(x.w, inst)).norm_inf();

  for (std::size_t i = 0; i < 7; ++i) c.holds[i] = c.magnitude[i] <= tol;
  return c;
}

}  // namespace dpmfg
