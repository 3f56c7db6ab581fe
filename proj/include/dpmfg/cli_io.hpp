#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dpmfg/instance.hpp"
#include "dpmfg/solver.hpp"

namespace dpmfg {

/// Bad configuration, instance file or solution directory (exit code 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;

struct RunConfig {
  std::string problem = "example1";   // example1 | example2 | custom
  std::filesystem::path instance;     // custom only
  int T = 20;
  int n = 20;
  nlohmann::json m0 = "default-gaussian";
  std::optional<Algorithm> algorithm;  // absent for compare
  int N = 10000;
  int log_every = 100;
  std::optional<double> tau, sigma, r, xi;
  double tol = 0.0;
  std::filesystem::path output_dir = "out";
};

/// Parses and checks a config object. `base` resolves relative paths.
/// Throws ConfigError on unknown keys, bad values or algorithm/parameter mismatches.
RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base = {});
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& c);

/// Instance JSON. Example problems are stored by name (T, n, m0); custom
/// problems carry every array and per-point potential descriptor.
nlohmann::json instance_to_json(const MfgInstance& inst);
MfgInstance instance_from_json(const nlohmann::json& j);
MfgInstance load_instance(const std::filesystem::path& path);
MfgInstance build_instance(const RunConfig& c);

/// {"type": "quadbox", "c", "r", "lo", "hi"} or {"type": "zero"}; infinite bounds are "inf"/"-inf".
nlohmann::json potential_to_json(const ScalarPotential& p);
PotentialPtr potential_from_json(const nlohmann::json& j);

/// Shortest decimal that reads back to the same double.
std::string format_double(double v);

std::string time_state_csv(const TimeStateField& f);
std::string stage_state_csv(const StageStateField& f);
/// Rows (t, x, y, value) over the allowed transitions.
std::string transition_csv(const TransitionField& f, const MfgInstance& inst);
std::string time_series_csv(const TimeSeries& f);
std::string residuals_csv(const std::vector<LogRow>& rows);

inline constexpr std::string_view kResidualsHeader =
    "k,eps_pi_inf,eps_m_inf,eps_gamma_inf,eps_P_inf,eps_pi_rms,eps_m_rms,eps_gamma_rms,eps_P_rms,gap";
inline constexpr std::string_view kTimingsHeader = "algorithm,seconds,status";

TimeStateField read_time_state_csv(const std::filesystem::path& path, GridShape g);
TransitionField read_transition_csv(const std::filesystem::path& path, const MfgInstance& inst);
TimeSeries read_time_series_csv(const std::filesystem::path& path, GridShape g);
std::vector<std::vector<double>> read_numeric_csv(const std::filesystem::path& path,
                                                  std::string_view header);

/// Writes the solution files of `res` into `dir` (created if needed).
void write_solution(const std::filesystem::path& dir, const RunConfig& c, const MfgInstance& inst,
                    const SolveResult& res);

SolverOptions solver_options(const RunConfig& c, Algorithm a);

/// Recomputes the residual row of a solution directory (scaled units).
LogRow recompute_residuals(const std::filesystem::path& dir);

int cmd_solve(const RunConfig& c);
int cmd_compare(const RunConfig& c);
int cmd_residuals(const std::filesystem::path& dir);

}  // namespace dpmfg
