#include "dpmfg/solver.hpp"

#include <algorithm>
#include <cmath>

#include "dpmfg/solver_admm.hpp"
#include "dpmfg/solver_cp.hpp"

namespace dpmfg {

std::string_view algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::cp: return "cp";
    case Algorithm::cp_bregman: return "cp-bregman";
    case Algorithm::admm: return "admm";
    case Algorithm::admg: return "admg";
  }
  return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view s) {
  for (Algorithm a : {Algorithm::cp, Algorithm::cp_bregman, Algorithm::admm, Algorithm::admg})
    if (algorithm_name(a) == s) return a;
  return std::nullopt;
}

SolveResult solve(const MfgInstance& inst, const SolverOptions& opt) {
  const auto problems = validate(inst);
  if (!problems.empty()) throw std::invalid_argument("invalid instance: " + problems.front());
  switch (opt.algorithm) {
    case Algorithm::cp: return run_cp(inst, opt, CpVariant::euclidean);
    case Algorithm::cp_bregman: return run_cp(inst, opt, CpVariant::bregman);
    case Algorithm::admm: return run_admm(inst, opt, false);
    case Algorithm::admg: return run_admm(inst, opt, true);
  }
  throw std::invalid_argument("unknown algorithm");
}

namespace detail {

ResidualReport scaled_report(const UnscaledProblem& core, const MfgInstance& scaled,
                             const TimeStateField& m1, const TransitionField& w,
                             const TimeStateField& gamma, const TimeSeries& P) {
  return scaled_residuals(residuals(m1, w, gamma, P, core.core), scaled, core.map);
}

LogRow make_row(int k, const ResidualReport& r, double seconds) {
  return LogRow{k, r.norms, seconds};
}

bool below_tol(const LogRow& row, double tol) {
  if (!(tol > 0.0)) return false;
  const auto& n = row.norms;
  return n.pi.inf <= tol && n.m.inf <= tol && n.gamma.inf <= tol && n.P.inf <= tol;
}

double min_entry(const StageStateField& f) {
  double v = kInf;
  for (double x : f.data()) v = std::min(v, x);
  return v;
}

}  // namespace detail

}  // namespace dpmfg
