#pragma once

#include <functional>
#include <stdexcept>
#include <optional>
#include <string>
#include <string_view>

#include "dpmfg/diagnostics.hpp"
#include "dpmfg/instance.hpp"
#include "dpmfg/operators.hpp"

namespace dpmfg {

enum class Algorithm { cp, cp_bregman, admm, admg };

std::string_view algorithm_name(Algorithm a);
/// Parses "cp", "cp-bregman", "admm", "admg"; nullopt otherwise.
std::optional<Algorithm> parse_algorithm(std::string_view s);

/// Raised for numerical failures (step-size guard, underflow, degenerate prices).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolverOptions {
  Algorithm algorithm = Algorithm::cp;
  int N = 10000;
  int log_every = 100;
  std::optional<double> tau;    // CP variants; default 0.95 / |A|
  std::optional<double> sigma;
  double r = 1.0;               // ADMM, ADM-G
  double xi = 0.9;              // ADM-G
  /// Stop at the first logged iteration whose four residual inf-norms are all <= tol (0 = off).
  double tol = 0.0;
  std::function<void(const LogRow&)> on_log;
};

struct SolveResult {
  Algorithm algorithm = Algorithm::cp;
  /// Point the final log row refers to (ergodic means for CP, last iterates otherwise), core units.
  PrimalPoint x;
  DualPoint y;
  /// Last iterates, core units.
  PrimalPoint x_last;
  DualPoint y_last;
  RunLog log;
  ResidualReport report;  // scaled units, at (x, y)
  ScaleMap map;           // core -> scaled units
  OperatorNorm norm;      // CP variants
  double tau = 0.0, sigma = 0.0, r = 0.0, xi = 0.0;
  int iterations = 0;
  double seconds = 0.0;
};

/// Runs one algorithm on the scaled instance `inst`. Iterations happen on to_unscaled(inst).
SolveResult solve(const MfgInstance& inst, const SolverOptions& opt);

namespace detail {
/// Report on the scaled system for a core point.
ResidualReport scaled_report(const UnscaledProblem& core, const MfgInstance& scaled,
                             const TimeStateField& m1, const TransitionField& w,
                             const TimeStateField& gamma, const TimeSeries& P);
LogRow make_row(int k, const ResidualReport& r, double seconds);
bool below_tol(const LogRow& row, double tol);
double min_entry(const StageStateField& f);
}  // namespace detail

}  // namespace dpmfg
