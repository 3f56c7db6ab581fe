#pragma once

#include <span>
#include <utility>

#include "dpmfg/fields.hpp"
#include "dpmfg/instance.hpp"
#include "dpmfg/potential.hpp"

namespace dpmfg {

/// One cell of the dynamic programming cone Q:
/// {(a, b) : a + b(y) - beta(y) <= 0 for all y} for s < T, {a = 0} for s = T.
struct QCell {
  std::span<const double> beta;  // beta(t, x, .) restricted to S_x
  bool terminal = false;
};

/// Euclidean projection of (abar, bbar) onto the cell. Writes b into `b_out`
/// (same length as cell.beta; ignored for terminal cells) and returns a.
double project_Q_cell(double abar, std::span<const double> bbar, const QCell& cell,
                      std::span<double> b_out);

/// Cell-wise projection onto Q. Entries of b outside the mask are unconstrained
/// and returned unchanged.
std::pair<TimeStateField, TransitionField> project_Q(const TimeStateField& abar,
                                                     const TransitionField& bbar,
                                                     const MfgInstance& inst);

struct EntropicProxResult {
  TimeStateField m1;
  TransitionField w;
  bool underflow = false;  // some cell lost all its mass in double precision
};

/// argmin over (m1, w) of <c1, m1> + <c2, w> + KL((m1, w), (m1p, wp))
/// subject to sum_y w(t,x,y) = m1(t,x), w >= 0, w = 0 off the mask, and m1 <= 1.
/// Requires m1p > 0; allowed entries of wp that are zero stay zero.
EntropicProxResult entropic_prox(const TimeStateField& m1p, const TransitionField& wp,
                                 const TimeStateField& c1, const TransitionField& c2,
                                 const MfgInstance& inst);

/// Perspective of the running cost: <w, beta(t,x,.)> when w lies in m * Delta(S_x),
/// 0 when m = 0 and w = 0, +inf otherwise. Membership is tested up to `tol`.
double perspective_eval(double m, std::span<const double> wrow, int t, int x,
                        const MfgInstance& inst, double tol = 1e-12);

/// prox of lam * g*, through the Moreau identity.
inline double conj_prox(const ScalarPotential& pot, double lam, double z) {
  return z - lam * pot.prox(1.0 / lam, z / lam);
}

}  // namespace dpmfg
