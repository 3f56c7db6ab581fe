#pragma once

#include <span>
#include <vector>

#include "dpmfg/fields.hpp"
#include "dpmfg/instance.hpp"

namespace dpmfg {

// All operators act on the subspace of transition fields that vanish on
// forbidden transitions: entries with mask(t,x,y) = false are ignored on input
// and set to zero on output.

/// Primal variable (m1, w, m2, D).
struct PrimalPoint {
  TimeStateField m1;
  TransitionField w;
  TimeStateField m2;
  TimeSeries D;

  static PrimalPoint zeros(GridShape g) {
    return {TimeStateField(g), TransitionField(g), TimeStateField(g), TimeSeries(g)};
  }
  double dot(const PrimalPoint& o) const {
    return m1.dot(o.m1) + w.dot(o.w) + m2.dot(o.m2) + D.dot(o.D);
  }
};

/// Dual variable (u, gamma, P); also the range space of the constraint operator.
struct DualPoint {
  TimeStateField u;
  TimeStateField gamma;
  TimeSeries P;

  static DualPoint zeros(GridShape g) { return {TimeStateField(g), TimeStateField(g), TimeSeries(g)}; }
  double dot(const DualPoint& o) const { return u.dot(o.u) + gamma.dot(o.gamma) + P.dot(o.P); }
};

/// A[w](t) = sum_{x,y} w(t,x,y) alpha(t,x,y).
TimeSeries op_A(const TransitionField& w, const MfgInstance& inst);
/// A*[P](t,x,y) = alpha(t,x,y) P(t).
TransitionField op_A_star(const TimeSeries& P, const MfgInstance& inst);
/// S[w](s,x) = sum_y w(s-1,y,x) for s > 0, 0 at s = 0.
TimeStateField op_S(const TransitionField& w, const MfgInstance& inst);
/// S*[u](t,x,y) = u(t+1,y).
TransitionField op_S_star(const TimeStateField& u, const MfgInstance& inst);

/// (Sw - m1, m1 - m2, Aw - D).
DualPoint composite_A(const PrimalPoint& p, const MfgInstance& inst);
/// (gamma - u, A*P + S*u, -gamma, -P).
PrimalPoint composite_A_star(const DualPoint& d, const MfgInstance& inst);

/// Distribution of the controlled chain: m(0) = m0, m(t+1,x) = sum_y m(t,y) pi(t,y,x).
TimeStateField kolmogorov_forward(const TransitionField& pi, const MfgInstance& inst);

struct EllConjugate {
  double value;
  std::vector<int> argmax;  // ascending
};
/// l*(t,x,b) = max_{y in S_x} b(y) - beta(t,x,y), with its maximizers.
EllConjugate ell_conjugate(int t, int x, std::span<const double> b, const MfgInstance& inst);

/// beta(t,x,y) + alpha(t,x,y) P(t) + u(t+1,y), the cost of moving from x to y.
inline double transition_cost(const MfgInstance& inst, const TimeStateField& u, const TimeSeries& P,
                              int t, int x, int y) {
  return inst.beta(t, x, y) + inst.alpha(t, x, y) * P(t) + u(t + 1, y);
}

/// u = U[gamma, P]: u(T) = gamma(T), u(t,x) = gamma(t,x) + min_{y in S_x} transition_cost.
TimeStateField dp_backward(const TimeStateField& gamma, const TimeSeries& P, const MfgInstance& inst);

/// Mass below which w/m is not trusted and the argmin branch is used.
inline constexpr double kMassThreshold = 1e-9;

/// An element of the policy set pi[m, w, u, gamma, P]: w/m where m > kMassThreshold
/// (clipped and renormalized over S_x), else a point mass on the least-index minimizer.
TransitionField policy_recover(const TimeStateField& m, const TransitionField& w,
                               const TimeStateField& u, const TimeSeries& P, const MfgInstance& inst);

/// v(t,x) = sum_y pi(t,x,y)(y - x).
StageStateField mean_displacement(const TransitionField& pi);

struct OperatorNorm {
  double estimate = 0.0;  // power iteration on the adjoint composition
  double bound = 0.0;     // sqrt(max(n + max_t alpha_bar(t), 4))
  int iterations = 0;
  bool converged = false;
};
OperatorNorm op_norm(const MfgInstance& inst, double rel_tol = 1e-8, int max_iter = 10000);

}  // namespace dpmfg
