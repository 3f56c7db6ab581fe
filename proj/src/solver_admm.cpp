#include "dpmfg/solver_admm.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "dpmfg/operators.hpp"
#include "dpmfg/prox.hpp"

namespace dpmfg {

namespace {

// Squared norm over allowed transitions.
double masked_norm2(const TransitionField& f, const MfgInstance& inst) {
  double acc = 0.0;
  for (int t = 0; t < inst.T(); ++t)
    for (int x = 0; x < inst.n(); ++x)
      for (int y : inst.support(t, x)) acc += f(t, x, y) * f(t, x, y);
  return acc;
}

double masked_dot(const TransitionField& f, const TransitionField& g, const MfgInstance& inst) {
  double acc = 0.0;
  for (int t = 0; t < inst.T(); ++t)
    for (int x = 0; x < inst.n(); ++x)
      for (int y : inst.support(t, x)) acc += f(t, x, y) * g(t, x, y);
  return acc;
}

// -A*P - S*u - b, the second constraint block.
TransitionField flow_constraint(const AdmmState& s, const MfgInstance& inst) {
  TransitionField c = op_A_star(s.P, inst) + op_S_star(s.u, inst) + s.b;
  c *= -1.0;
  return c;
}

}  // namespace

AdmmState admm_initial_state(const MfgInstance& inst) {
  const GridShape g = inst.shape();
  AdmmState s{TimeStateField(g), TimeStateField(g), TimeStateField(g), TimeStateField(g),
              TimeSeries(g),     TransitionField(g), TransitionField(g), 0};
  auto [a, b] = project_Q(TimeStateField(g), TransitionField(g), inst);
  s.a = std::move(a);
  s.b = std::move(b);
  return s;
}

void admm_update_u(AdmmState& s, double r, const MfgInstance& inst) {
  const GridShape g = inst.shape();
  // (1 + SS*) u = gamma + a - S(A*P + b) + (m0bar - m + Sw) / r, SS* diagonal (in-degree).
  TransitionField ones(g);
  for (int t = 0; t < g.T; ++t)
    for (int x = 0; x < g.n; ++x)
      for (int y : inst.support(t, x)) ones(t, x, y) = 1.0;
  const TimeStateField indeg = op_S(ones, inst);

  TimeStateField rhs = s.gamma + s.a - op_S(op_A_star(s.P, inst) + s.b, inst);
  TimeStateField lin = inst.m0_bar() - s.m + op_S(s.w, inst);
  rhs.axpy(1.0 / r, lin);
  const auto d = indeg.data();
  auto out = rhs.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] /= 1.0 + d[i];
  s.u = std::move(rhs);
}

void admm_update_gamma_P(AdmmState& s, double r, const MfgInstance& inst) {
  const GridShape g = inst.shape();
  for (int t = 0; t <= g.T; ++t)
    for (int x = 0; x < g.n; ++x) {
      const double z = s.m(t, x) / r + s.u(t, x) - s.a(t, x);
      s.gamma(t, x) = conj_prox(inst.F(t, x), 1.0 / r, z);
    }

  TransitionField v = (1.0 / r) * s.w - op_S_star(s.u, inst) - s.b;
  const TimeSeries av = op_A(v, inst);
  for (int t = 0; t < g.T; ++t) {
    const double ab = inst.alpha_bar(t);
    if (ab == 0.0) {
      if (!inst.phi(t).is_zero()) {
        std::ostringstream os;
        os << "price update undefined: alpha vanishes at t=" << t << " but phi is not zero";
        throw SolverError(os.str());
      }
      s.P(t) = 0.0;
      continue;
    }
    s.P(t) = conj_prox(inst.phi(t), 1.0 / (r * ab), av(t) / ab);
  }
}

void admm_update_ab(AdmmState& s, double r, const MfgInstance& inst) {
  TimeStateField abar = (1.0 / r) * s.m + s.u - s.gamma;
  TransitionField bbar = (1.0 / r) * s.w - op_A_star(s.P, inst) - op_S_star(s.u, inst);
  auto [a, b] = project_Q(abar, bbar, inst);
  s.a = std::move(a);
  s.b = std::move(b);
  // Forbidden transitions carry no constraint.
  for (int t = 0; t < inst.T(); ++t)
    for (int x = 0; x < inst.n(); ++x)
      for (int y = 0; y < inst.n(); ++y)
        if (!inst.allowed(t, x, y)) s.b(t, x, y) = 0.0;
}

void admm_update_multipliers(AdmmState& s, double r, const MfgInstance& inst) {
  s.m.axpy(r, s.u - s.gamma - s.a);
  s.w.axpy(r, flow_constraint(s, inst));
}

double augmented_lagrangian(const AdmmState& s, double r, const MfgInstance& inst) {
  const GridShape g = inst.shape();
  double v = 0.0;
  for (int x = 0; x < g.n; ++x) v -= inst.m0()[static_cast<std::size_t>(x)] * s.u(0, x);
  for (int t = 0; t <= g.T; ++t)
    for (int x = 0; x < g.n; ++x) v += inst.F(t, x).conj_eval(s.gamma(t, x));
  for (int t = 0; t < g.T; ++t) v += inst.phi(t).conj_eval(s.P(t));
  const TimeStateField c1 = s.u - s.gamma - s.a;
  const TransitionField c2 = flow_constraint(s, inst);
  v += s.m.dot(c1) + masked_dot(s.w, c2, inst);
  v += 0.5 * r * (c1.norm2_squared() + masked_norm2(c2, inst));
  return v;
}

void admm_step(AdmmState& s, double r, const MfgInstance& inst) {
  if (!(r > 0.0)) throw SolverError("penalty r must be positive");
  admm_update_u(s, r, inst);
  admm_update_gamma_P(s, r, inst);
  admm_update_ab(s, r, inst);
  admm_update_multipliers(s, r, inst);
  ++s.k;
}

void admg_step(AdmmState& s, double r, double xi, const MfgInstance& inst) {
  if (!(xi > 0.0 && xi < 1.0)) throw SolverError("xi must lie in (0, 1)");
  const TimeStateField a_old = s.a;
  const TransitionField b_old = s.b;
  admm_step(s, r, inst);
  s.gamma.axpy(-xi, s.a - a_old);
  const TimeSeries db = op_A(s.b - b_old, inst);
  for (int t = 0; t < inst.T(); ++t) {
    const double ab = inst.alpha_bar(t);
    if (ab != 0.0) s.P(t) -= xi * db(t) / ab;
  }
}

SolveResult run_admm(const MfgInstance& scaled, const SolverOptions& opt, bool gaussian) {
  if (opt.N < 1) throw std::invalid_argument("N must be at least 1");
  if (opt.log_every < 1) throw std::invalid_argument("log_every must be at least 1");
  if (!(opt.r > 0.0)) throw SolverError("penalty r must be positive");
  if (gaussian && !(opt.xi > 0.0 && opt.xi < 1.0)) throw SolverError("xi must lie in (0, 1)");
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  SolveResult res;
  res.algorithm = gaussian ? Algorithm::admg : Algorithm::admm;
  const UnscaledProblem core = to_unscaled(scaled);
  res.map = core.map;
  res.r = opt.r;
  res.xi = gaussian ? opt.xi : 0.0;
  const MfgInstance& inst = core.core;

  AdmmState s = admm_initial_state(inst);
  double min_pi = kInf;
  auto point = [&] {
    return PrimalPoint{s.m, s.w, s.m, op_A(s.w, inst)};
  };
  for (int k = 1; k <= opt.N; ++k) {
    if (gaussian)
      admg_step(s, opt.r, opt.xi, inst);
    else
      admm_step(s, opt.r, inst);
    res.iterations = k;

    if (k % opt.log_every != 0 && k != opt.N) continue;
    ResidualReport rep = detail::scaled_report(core, scaled, s.m, s.w, s.gamma, s.P);
    min_pi = std::min(min_pi, detail::min_entry(rep.eps_pi));
    LogRow row = detail::make_row(k, rep, elapsed());
    res.log.rows.push_back(row);
    if (opt.on_log) opt.on_log(row);
    res.report = std::move(rep);
    res.x = point();
    res.y = DualPoint{s.u, s.gamma, s.P};
    if (detail::below_tol(row, opt.tol)) break;
  }
  res.x_last = res.x;
  res.y_last = res.y;
  res.log.min_eps_pi = min_pi;
  res.seconds = elapsed();
  return res;
}

}  // namespace dpmfg
