#pragma once

#include <array>
#include <string>
#include <vector>

#include "dpmfg/fields.hpp"
#include "dpmfg/instance.hpp"
#include "dpmfg/operators.hpp"

namespace dpmfg {

struct NormPair {
  double inf = 0.0;
  double rms = 0.0;
};

struct ResidualNorms {
  NormPair pi, m, gamma, P;
  double gap = 0.0;
};

/// Residuals of the coupled system at an approximate solution.
///
/// eps_gamma and eps_P hold +inf where the conjugate subdifferential is empty.
/// Those cells are measured by the distance of gamma to dF(m) (resp. of P to
/// dphi(Q)), stored in gamma_infeasibility / P_infeasibility; the norms use
/// that distance in place of the sentinel so they stay finite.
struct ResidualReport {
  StageStateField eps_pi;
  TimeStateField eps_m;
  TimeStateField eps_gamma;
  TimeSeries eps_P;
  TimeStateField gamma_infeasibility;
  TimeSeries P_infeasibility;

  // Quantities the residuals were evaluated at.
  TimeStateField m;
  TimeStateField gamma;
  TimeSeries P;
  TimeStateField u_hat;  // U[gamma, P]
  TransitionField pi;
  TimeStateField m_pi;   // Kolmogorov flow of pi
  TimeSeries Q;          // Q[m, pi]

  double primal = 0.0;   // at (m_pi, m_pi pi, m_pi, A(m_pi pi))
  double dual = 0.0;     // at (U[gamma, P], gamma, P)
  ResidualNorms norms;
};

/// Residual report for the instance's own system. `inst` should be a core
/// (dx = dt = 1) instance; see scaled_residuals for the scaled system.
ResidualReport residuals(const TimeStateField& m, const TransitionField& w,
                         const TimeStateField& gamma, const TimeSeries& P, const MfgInstance& inst);

/// Residuals of the scaled system: `core` must come from residuals() on
/// to_unscaled(scaled).core; fields are mapped back with `map`.
ResidualReport scaled_residuals(const ResidualReport& core, const MfgInstance& scaled,
                                const ScaleMap& map);

/// Membership tolerance used for the primal value in the duality gap.
inline constexpr double kGapDomainTol = 1e-6;

/// Criterion of the primal problem: perspective cost + phi[D] + F[m2], plus the
/// indicator of the linear constraints (checked to `tol`). Potentials are
/// evaluated with eval_tolerant(., tol).
double primal_value(const PrimalPoint& x, const MfgInstance& inst, double tol = 1e-9);
/// <m0, u(0)> - sum phi*(P) - sum F*(gamma); -inf when the dynamic programming
/// inequalities or u(T) = gamma(T) fail beyond `tol`.
double dual_value(const DualPoint& y, const MfgInstance& inst, double tol = 1e-9);

/// Magnitudes of the seven optimality conditions linking a primal and a dual point.
struct CertificateReport {
  std::array<double, 7> magnitude{};  // C1..C7
  std::array<bool, 7> holds{};
  bool all() const {
    for (bool b : holds)
      if (!b) return false;
    return true;
  }
};
CertificateReport certificates(const PrimalPoint& x, const DualPoint& y, const MfgInstance& inst,
                               double tol = 1e-8);

/// One logged iteration.
struct LogRow {
  int k = 0;
  ResidualNorms norms;
  double seconds = 0.0;
};

struct RunLog {
  std::vector<LogRow> rows;       // averaged iterates (CP) or last iterates (ADMM, ADM-G)
  std::vector<LogRow> last_rows;  // last iterates, Euclidean CP only
  double min_eps_pi = 0.0;        // smallest eps_pi entry over every logged report
};

}  // namespace dpmfg
