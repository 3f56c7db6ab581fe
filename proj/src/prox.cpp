#include "dpmfg/prox.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace dpmfg {

double project_Q_cell(double abar, std::span<const double> bbar, const QCell& cell,
                      std::span<double> b_out) {
  if (cell.terminal) return 0.0;
  const std::size_t k = cell.beta.size();

  bool feasible = true;
  for (std::size_t j = 0; j < k; ++j)
    if (abar + bbar[j] - cell.beta[j] > 0.0) {
      feasible = false;
      break;
    }
  if (feasible) {
    std::copy(bbar.begin(), bbar.begin() + static_cast<std::ptrdiff_t>(k), b_out.begin());
    return abar;
  }

  // Minimize (a - abar)^2/2 + sum_j max(0, a - bt_j)^2/2, bt = beta - bbar.
  std::vector<double> bt(k);
  for (std::size_t j = 0; j < k; ++j) bt[j] = cell.beta[j] - bbar[j];
  std::sort(bt.begin(), bt.end());

  double a = abar;
  double partial = 0.0;
  for (std::size_t i = 1; i <= k; ++i) {
    partial += bt[i - 1];
    a = (abar + partial) / static_cast<double>(i + 1);
    const bool upper_ok = i == k || a <= bt[i];
    if (bt[i - 1] <= a && upper_ok) break;
  }
  for (std::size_t j = 0; j < k; ++j) b_out[j] = std::min(bbar[j], cell.beta[j] - a);
  return a;
}

std::pair<TimeStateField, TransitionField> project_Q(const TimeStateField& abar,
                                                     const TransitionField& bbar,
                                                     const MfgInstance& inst) {
  const int T = inst.T();
  TimeStateField a(inst.shape());
  TransitionField b = bbar;
  std::vector<double> beta_row, bbar_row, b_row;
  for (int t = 0; t < T; ++t)
    for (int x = 0; x < inst.n(); ++x) {
      const auto sup = inst.support(t, x);
      beta_row.resize(sup.size());
      bbar_row.resize(sup.size());
      b_row.resize(sup.size());
      for (std::size_t j = 0; j < sup.size(); ++j) {
        beta_row[j] = inst.beta(t, x, sup[j]);
        bbar_row[j] = bbar(t, x, sup[j]);
      }
      a(t, x) = project_Q_cell(abar(t, x), bbar_row, QCell{beta_row, false}, b_row);
      for (std::size_t j = 0; j < sup.size(); ++j) b(t, x, sup[j]) = b_row[j];
    }
  // a(T, .) = 0 already.
  return {std::move(a), std::move(b)};
}

EntropicProxResult entropic_prox(const TimeStateField& m1p, const TransitionField& wp,
                                 const TimeStateField& c1, const TransitionField& c2,
                                 const MfgInstance& inst) {
  const int T = inst.T();
  EntropicProxResult r{TimeStateField(inst.shape()), TransitionField(inst.shape()), false};
  std::vector<double> lw;
  for (int t = 0; t < T; ++t)
    for (int x = 0; x < inst.n(); ++x) {
      const auto sup = inst.support(t, x);
      const double L = std::log(m1p(t, x)) - c1(t, x);
      lw.resize(sup.size());
      double mx = -kInf;
      for (std::size_t j = 0; j < sup.size(); ++j) {
        lw[j] = std::log(wp(t, x, sup[j])) - c2(t, x, sup[j]);
        mx = std::max(mx, lw[j]);
      }
      if (!std::isfinite(mx) || !std::isfinite(L)) {
        r.underflow = true;
        continue;
      }
      double acc = 0.0;
      for (double v : lw) acc += std::exp(v - mx);
      const double lse = mx + std::log(acc);

      // Unconstrained candidate sqrt(M W); above 1 the cap m1 <= 1 is active.
      const double shift = (L + lse) / 2.0 <= 0.0 ? (L - lse) / 2.0 : -lse;
      double total = 0.0;
      for (std::size_t j = 0; j < sup.size(); ++j) {
        const double v = std::exp(lw[j] + shift);
        r.w(t, x, sup[j]) = v;
        total += v;
      }
      r.m1(t, x) = total;
      if (total == 0.0) r.underflow = true;
    }
  for (int x = 0; x < inst.n(); ++x) {
    const double L = std::log(m1p(T, x)) - c1(T, x);
    const double v = L >= 0.0 ? 1.0 : std::exp(L);
    if (v == 0.0) r.underflow = true;
    r.m1(T, x) = v;
  }
  return r;
}

double perspective_eval(double m, std::span<const double> wrow, int t, int x,
                        const MfgInstance& inst, double tol) {
  const int n = inst.n();
  double total = 0.0;
  double cost = 0.0;
  bool all_zero = true;
  for (int y = 0; y < n; ++y) {
    const double v = wrow[static_cast<std::size_t>(y)];
    if (v != 0.0) all_zero = false;
    if (!inst.allowed(t, x, y)) {
      if (std::abs(v) > tol) return kInf;
      continue;
    }
    if (v < -tol) return kInf;
    total += v;
    cost += v * inst.beta(t, x, y);
  }
  if (m == 0.0 && all_zero) return 0.0;
  if (m < -tol) return kInf;
  if (std::abs(total - m) > tol * std::max(1.0, std::abs(m))) return kInf;
  return cost;
}

}  // namespace dpmfg
