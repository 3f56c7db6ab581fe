#pragma once

#include "dpmfg/operators.hpp"
#include "dpmfg/solver.hpp"

namespace dpmfg {

enum class CpVariant { euclidean, bregman };

struct CpState {
  PrimalPoint x;
  DualPoint y;
  int k = 0;
};

/// Starting point: Kolmogorov flow of the uniform policy over S_x, duals zero.
/// The Bregman start replaces m0 by (m0 + uniform)/2 when m0 has zeros, to stay interior.
CpState cp_initial_state(const MfgInstance& inst, CpVariant variant);

/// One Chambolle-Pock iteration with Euclidean proximity terms.
void cp_step_euclidean(CpState& s, double tau, double sigma, const MfgInstance& inst);
/// One iteration with the entropy proximity term on (m1, w). Returns false on underflow.
bool cp_step_bregman(CpState& s, double tau, double sigma, const MfgInstance& inst);

/// Throws SolverError unless tau sigma norm^2 < 1.
void check_step_sizes(double tau, double sigma, double norm);

/// Runs the chosen variant on to_unscaled(scaled); residuals are logged on the ergodic
/// means, and on the last iterates as well for the Euclidean variant.
SolveResult run_cp(const MfgInstance& scaled, const SolverOptions& opt, CpVariant variant);

}  // namespace dpmfg
