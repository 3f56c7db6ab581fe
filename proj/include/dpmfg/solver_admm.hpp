#pragma once

#include "dpmfg/fields.hpp"
#include "dpmfg/solver.hpp"

namespace dpmfg {

/// Iterate of the augmented Lagrangian splitting: dual unknowns (u, gamma, P),
/// auxiliary (a, b) = (u - gamma, -A*P - S*u) kept in Q, multipliers (m, w).
struct AdmmState {
  TimeStateField u, gamma, a, m;
  TimeSeries P;
  TransitionField b, w;
  int k = 0;
};

/// Zero fields with (a, b) = proj_Q(0, 0).
AdmmState admm_initial_state(const MfgInstance& inst);

/// Step (i): exact minimizer in u of the augmented Lagrangian.
void admm_update_u(AdmmState& s, double r, const MfgInstance& inst);
/// Step (ii): exact minimizers in gamma and in P (with the new u).
void admm_update_gamma_P(AdmmState& s, double r, const MfgInstance& inst);
/// Step (iii): projection of the auxiliary variables onto Q.
void admm_update_ab(AdmmState& s, double r, const MfgInstance& inst);
/// Step (iv): multiplier ascent.
void admm_update_multipliers(AdmmState& s, double r, const MfgInstance& inst);

/// Augmented Lagrangian L_r at the state (minimization form); +inf outside the domain.
double augmented_lagrangian(const AdmmState& s, double r, const MfgInstance& inst);

/// One ADMM iteration, steps (i) to (iv).
void admm_step(AdmmState& s, double r, const MfgInstance& inst);
/// ADMM iteration followed by the Gaussian back substitution on (gamma, P).
void admg_step(AdmmState& s, double r, double xi, const MfgInstance& inst);

/// Runs ADMM (`gaussian = false`) or ADM-G on to_unscaled(scaled); residuals use
/// the last iterates with m1 = m2 = m and D = A w.
SolveResult run_admm(const MfgInstance& scaled, const SolverOptions& opt, bool gaussian);

}  // namespace dpmfg
