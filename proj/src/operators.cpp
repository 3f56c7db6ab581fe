#include "dpmfg/operators.hpp"

#include <algorithm>
#include <cmath>

namespace dpmfg {

TimeSeries op_A(const TransitionField& w, const MfgInstance& inst) {
  TimeSeries out(inst.shape());
  for (int t = 0; t < inst.T(); ++t) {
    double acc = 0.0;
    for (int x = 0; x < inst.n(); ++x)
      for (int y : inst.support(t, x)) acc += w(t, x, y) * inst.alpha(t, x, y);
    out(t) = acc;
  }
  return out;
}

TransitionField op_A_star(const TimeSeries& P, const MfgInstance& inst) {
  TransitionField out(inst.shape());
  for (int t = 0; t < inst.T(); ++t)
    for (int x = 0; x < inst.n(); ++x)
      for (int y : inst.support(t, x)) out(t, x, y) = inst.alpha(t, x, y) * P(t);
  return out;
}

TimeStateField op_S(const TransitionField& w, const MfgInstance& inst) {
  TimeStateField out(inst.shape());
  for (int t = 0; t < inst.T(); ++t)
    for (int x = 0; x < inst.n(); ++x)
      for (int y : inst.support(t, x)) out(t + 1, y) += w(t, x, y);
  return out;
}

TransitionField op_S_star(const TimeStateField& u, const MfgInstance& inst) {
  TransitionField out(inst.shape());
  for (int t = 0; t < inst.T(); ++t)
    for (int x = 0; x < inst.n(); ++x)
      for (int y : inst.support(t, x)) out(t, x, y) = u(t + 1, y);
  return out;
}

DualPoint composite_A(const PrimalPoint& p, const MfgInstance& inst) {
  DualPoint d{op_S(p.w, inst), p.m1, op_A(p.w, inst)};
  d.u -= p.m1;
  d.gamma -= p.m2;
  d.P -= p.D;
  return d;
}

PrimalPoint composite_A_star(const DualPoint& d, const MfgInstance& inst) {
  PrimalPoint p{d.gamma - d.u, op_A_star(d.P, inst), d.gamma, d.P};
  p.w += op_S_star(d.u, inst);
  p.m2 *= -1.0;
  p.D *= -1.0;
  return p;
}

TimeStateField kolmogorov_forward(const TransitionField& pi, const MfgInstance& inst) {
  TimeStateField m(inst.shape());
  for (int x = 0; x < inst.n(); ++x) m(0, x) = inst.m0()[static_cast<std::size_t>(x)];
  for (int t = 0; t < inst.T(); ++t)
    for (int x = 0; x < inst.n(); ++x) {
      const double mx = m(t, x);
      for (int y : inst.support(t, x)) m(t + 1, y) += mx * pi(t, x, y);
    }
  return m;
}

EllConjugate ell_conjugate(int t, int x, std::span<const double> b, const MfgInstance& inst) {
  EllConjugate r{-kInf, {}};
  for (int y : inst.support(t, x)) {
    const double v = b[static_cast<std::size_t>(y)] - inst.beta(t, x, y);
    if (v > r.value) {
      r.value = v;
      r.argmax.assign(1, y);
    } else if (v == r.value) {
      r.argmax.push_back(y);
    }
  }
  return r;
}

TimeStateField dp_backward(const TimeStateField& gamma, const TimeSeries& P, const MfgInstance& inst) {
  const int T = inst.T();
  TimeStateField u(inst.shape());
  for (int x = 0; x < inst.n(); ++x) u(T, x) = gamma(T, x);
  for (int t = T - 1; t >= 0; --t)
    for (int x = 0; x < inst.n(); ++x) {
      double best = kInf;
      for (int y : inst.support(t, x)) best = std::min(best, transition_cost(inst, u, P, t, x, y));
      u(t, x) = gamma(t, x) + best;
    }
  return u;
}

TransitionField policy_recover(const TimeStateField& m, const TransitionField& w,
                               const TimeStateField& u, const TimeSeries& P, const MfgInstance& inst) {
  TransitionField pi(inst.shape());
  for (int t = 0; t < inst.T(); ++t)
    for (int x = 0; x < inst.n(); ++x) {
      const auto sup = inst.support(t, x);
      const double mass = m(t, x);
      if (mass > kMassThreshold) {
        double total = 0.0;
        for (int y : sup) {
          const double p = std::clamp(w(t, x, y) / mass, 0.0, 1.0);
          pi(t, x, y) = p;
          total += p;
        }
        if (total > 0.0) {
          for (int y : sup) pi(t, x, y) /= total;
          continue;
        }
      }
      int arg = -1;
      double best = kInf;
      for (int y : sup) {
        const double c = transition_cost(inst, u, P, t, x, y);
        if (arg < 0 || c < best) {
          best = c;
          arg = y;
        }
      }
      for (int y : sup) pi(t, x, y) = y == arg ? 1.0 : 0.0;
    }
  return pi;
}

StageStateField mean_displacement(const TransitionField& pi) {
  const GridShape g = pi.shape();
  StageStateField v(g);
  for (int t = 0; t < g.T; ++t)
    for (int x = 0; x < g.n; ++x) {
      double acc = 0.0;
      for (int y = 0; y < g.n; ++y) acc += pi(t, x, y) * (y - x);
      v(t, x) = acc;
    }
  return v;
}

OperatorNorm op_norm(const MfgInstance& inst, double rel_tol, int max_iter) {
  OperatorNorm r;
  r.bound = std::sqrt(std::max(inst.n() + inst.alpha_bar_max(), 4.0));

  const GridShape g = inst.shape();
  PrimalPoint x = PrimalPoint::zeros(g);
  x.m1.fill(1.0);
  x.m2.fill(1.0);
  x.D.fill(1.0);
  for (int t = 0; t < g.T; ++t)
    for (int s = 0; s < g.n; ++s)
      for (int y : inst.support(t, s)) x.w(t, s, y) = 1.0;

  auto normalize = [](PrimalPoint& p) {
    const double nrm = std::sqrt(p.dot(p));
    if (nrm > 0.0) {
      p.m1 *= 1.0 / nrm;
      p.w *= 1.0 / nrm;
      p.m2 *= 1.0 / nrm;
      p.D *= 1.0 / nrm;
    }
    return nrm;
  };
  normalize(x);

  double lambda = 0.0;
  for (int k = 1; k <= max_iter; ++k) {
    PrimalPoint y = composite_A_star(composite_A(x, inst), inst);
    const double next = x.dot(y);  // Rayleigh quotient, |x| = 1
    if (normalize(y) == 0.0) {
      lambda = 0.0;
      r.iterations = k;
      r.converged = true;
      break;
    }
    x = std::move(y);
    r.iterations = k;
    if (k > 1 && std::abs(next - lambda) <= rel_tol * std::abs(next)) {
      lambda = next;
      r.converged = true;
      break;
    }
    lambda = next;
  }
  r.estimate = std::sqrt(std::max(lambda, 0.0));
  return r;
}

}  // namespace dpmfg
