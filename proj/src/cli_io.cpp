#include "dpmfg/cli_io.hpp"

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <system_error>

#include "dpmfg/diagnostics.hpp"
#include "dpmfg/operators.hpp"

namespace dpmfg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::array<const char*, 8> kFieldFiles = {"m.csv",     "w.csv", "pi.csv", "v.csv",
                                                "u.csv",     "gamma.csv", "P.csv", "D.csv"};

bool verbose() {
  const char* v = std::getenv("DPMFG_VERBOSE");
  return v != nullptr && *v != '\0' && std::string_view(v) != "0";
}

template <class T>
T get_checked(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("bad or missing value for \"") + key + "\"");
  }
}

int get_int(const json& j, const char* key) {
  if (!j.at(key).is_number_integer()) throw ConfigError(std::string("\"") + key + "\" must be an integer");
  return j.at(key).get<int>();
}

double get_real(const json& j, const char* key) {
  const json& v = j.at(key);
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  throw ConfigError(std::string("\"") + key + "\" must be a number");
}

json real_to_json(double v) {
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  return v;
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + " must be a JSON object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items())
    if (!ok.contains(k)) throw ConfigError(std::string("unknown key \"") + k + "\" in " + what);
}

std::optional<std::vector<double>> parse_m0(const json& m0, int n) {
  if (m0.is_string()) {
    const auto s = m0.get<std::string>();
    if (s == "default-gaussian") return std::nullopt;
    if (s == "uniform") return uniform_initial_law(n);
    throw ConfigError("m0 must be a list, \"default-gaussian\" or \"uniform\"");
  }
  if (!m0.is_array()) throw ConfigError("m0 must be a list, \"default-gaussian\" or \"uniform\"");
  std::vector<double> v;
  for (const auto& e : m0) {
    if (!e.is_number()) throw ConfigError("m0 entries must be numbers");
    v.push_back(e.get<double>());
  }
  if (v.size() != static_cast<std::size_t>(n)) throw ConfigError("m0 has the wrong length");
  return v;
}

void append_double(std::string& out, double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.append(buf.data(), res.ptr);
}

std::string state_header(int n) {
  std::string h;
  for (int x = 0; x < n; ++x) {
    if (x) h += ',';
    h += std::to_string(x);
  }
  return h;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  os << text;
  if (!os) throw std::runtime_error("write failed: " + p.string());
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const fs::path& file) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  const auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e) throw ConfigError("non-numeric entry \"" + s + "\" in " + file.string());
  return v;
}

// Builds a nested T x n x n array from a transition-indexed getter.
template <class Get>
json nested(GridShape g, Get get) {
  json outer = json::array();
  for (int t = 0; t < g.T; ++t) {
    json rows = json::array();
    for (int x = 0; x < g.n; ++x) {
      json row = json::array();
      for (int y = 0; y < g.n; ++y) row.push_back(get(t, x, y));
      rows.push_back(std::move(row));
    }
    outer.push_back(std::move(rows));
  }
  return outer;
}

const json& nested_at(const json& a, GridShape g, int t, int x, int y, const char* what) {
  if (!a.is_array() || a.size() != static_cast<std::size_t>(g.T))
    throw ConfigError(std::string(what) + " must be a T x n x n array");
  const json& r = a[static_cast<std::size_t>(t)];
  if (!r.is_array() || r.size() != static_cast<std::size_t>(g.n))
    throw ConfigError(std::string(what) + " must be a T x n x n array");
  const json& c = r[static_cast<std::size_t>(x)];
  if (!c.is_array() || c.size() != static_cast<std::size_t>(g.n))
    throw ConfigError(std::string(what) + " must be a T x n x n array");
  return c[static_cast<std::size_t>(y)];
}

template <class F>
std::string matrix_csv(const F& f, int rows, int n) {
  std::string out = state_header(n);
  out += '\n';
  for (int s = 0; s < rows; ++s) {
    for (int x = 0; x < n; ++x) {
      if (x) out += ',';
      append_double(out, f(s, x));
    }
    out += '\n';
  }
  return out;
}

json row_to_json(const LogRow& r) {
  const auto& n = r.norms;
  return json{{"k", r.k},
              {"eps_pi_inf", real_to_json(n.pi.inf)},
              {"eps_m_inf", real_to_json(n.m.inf)},
              {"eps_gamma_inf", real_to_json(n.gamma.inf)},
              {"eps_P_inf", real_to_json(n.P.inf)},
              {"eps_pi_rms", real_to_json(n.pi.rms)},
              {"eps_m_rms", real_to_json(n.m.rms)},
              {"eps_gamma_rms", real_to_json(n.gamma.rms)},
              {"eps_P_rms", real_to_json(n.P.rms)},
              {"gap", real_to_json(n.gap)}};
}

std::array<double, 9> row_values(const LogRow& r) {
  const auto& n = r.norms;
  return {n.pi.inf, n.m.inf, n.gamma.inf, n.P.inf, n.pi.rms, n.m.rms, n.gamma.rms, n.P.rms, n.gap};
}

// Removes what a failed run left behind.
void remove_outputs(const fs::path& dir, bool created) {
  std::error_code ec;
  if (created) {
    fs::remove_all(dir, ec);
    return;
  }
  for (const char* f : kFieldFiles) fs::remove(dir / f, ec);
  for (const char* f : {"residuals.csv", "residuals_last.csv", "meta.json"}) fs::remove(dir / f, ec);
}

int run_one(const RunConfig& c, const MfgInstance& inst, Algorithm a, const fs::path& dir,
            double& seconds, std::string& error) {
  const bool created = !fs::exists(dir);
  const auto start = std::chrono::steady_clock::now();
  auto stop = [&] {
    seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  try {
    const SolveResult res = solve(inst, solver_options(c, a));
    fs::create_directories(dir);
    write_solution(dir, c, inst, res);
    stop();
    return kExitOk;
  } catch (const SolverError& e) {
    error = e.what();
    stop();
    remove_outputs(dir, created);
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    error = e.what();
    stop();
    remove_outputs(dir, created);
    return kExitUsage;
  } catch (const std::exception& e) {
    error = e.what();
    stop();
    remove_outputs(dir, created);
    return kExitNumerical;
  }
}

}  // namespace

RunConfig parse_run_config(const json& j, const fs::path& base) {
  check_keys(j,
             {"problem", "instance", "T", "n", "m0", "algorithm", "N", "log_every", "tau", "sigma", "r",
              "xi", "tol", "output_dir"},
             "config");
  RunConfig c;
  try {
    if (j.contains("problem")) c.problem = get_checked<std::string>(j, "problem");
    if (c.problem != "example1" && c.problem != "example2" && c.problem != "custom")
      throw ConfigError("problem must be example1, example2 or custom");
    if (c.problem == "custom") {
      if (!j.contains("instance")) throw ConfigError("custom problem needs an \"instance\" path");
      for (const char* k : {"T", "n", "m0"})
        if (j.contains(k)) throw ConfigError(std::string("\"") + k + "\" comes from the instance file for custom problems");
      c.instance = get_checked<std::string>(j, "instance");
      if (c.instance.is_relative() && !base.empty()) c.instance = base / c.instance;
    } else if (j.contains("instance")) {
      throw ConfigError("\"instance\" is only valid for custom problems");
    }
    if (j.contains("T")) c.T = get_int(j, "T");
    if (j.contains("n")) c.n = get_int(j, "n");
    if (j.contains("m0")) c.m0 = j.at("m0");
    if (j.contains("algorithm")) {
      const auto name = get_checked<std::string>(j, "algorithm");
      c.algorithm = parse_algorithm(name);
      if (!c.algorithm) throw ConfigError("unknown algorithm \"" + name + "\"");
    }
    if (j.contains("N")) c.N = get_int(j, "N");
    if (j.contains("log_every")) c.log_every = get_int(j, "log_every");
    if (j.contains("tau")) c.tau = get_real(j, "tau");
    if (j.contains("sigma")) c.sigma = get_real(j, "sigma");
    if (j.contains("r")) c.r = get_real(j, "r");
    if (j.contains("xi")) c.xi = get_real(j, "xi");
    if (j.contains("tol")) c.tol = get_real(j, "tol");
    if (j.contains("output_dir")) {
      c.output_dir = get_checked<std::string>(j, "output_dir");
      if (c.output_dir.is_relative() && !base.empty()) c.output_dir = base / c.output_dir;
    }
  } catch (const json::exception& e) {
    throw ConfigError(e.what());
  }

  if (c.problem != "custom") {
    if (c.T < 1 || c.n < 1) throw ConfigError("T and n must be positive");
    parse_m0(c.m0, c.n);
  }
  if (c.N < 1) throw ConfigError("N must be at least 1");
  if (c.log_every < 1) throw ConfigError("log_every must be at least 1");
  if (!(c.tol >= 0.0)) throw ConfigError("tol must be >= 0");
  if (c.tau && !(*c.tau > 0.0 && std::isfinite(*c.tau))) throw ConfigError("tau must be positive");
  if (c.sigma && !(*c.sigma > 0.0 && std::isfinite(*c.sigma))) throw ConfigError("sigma must be positive");
  if (c.r && !(*c.r > 0.0 && std::isfinite(*c.r))) throw ConfigError("r must be positive");
  if (c.xi && !(*c.xi > 0.0 && *c.xi < 1.0)) throw ConfigError("xi must lie in (0, 1)");

  if (c.algorithm) {
    const Algorithm a = *c.algorithm;
    const bool cp = a == Algorithm::cp || a == Algorithm::cp_bregman;
    const std::string name(algorithm_name(a));
    if (!cp && (c.tau || c.sigma)) throw ConfigError("tau and sigma only apply to cp and cp-bregman, not " + name);
    if (cp && c.r) throw ConfigError("r only applies to admm and admg, not " + name);
    if (a != Algorithm::admg && c.xi) throw ConfigError("xi only applies to admg, not " + name);
  }
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_run_config(j, path.parent_path());
}

json to_json(const RunConfig& c) {
  json j;
  j["problem"] = c.problem;
  if (c.problem == "custom") {
    j["instance"] = c.instance.string();
  } else {
    j["T"] = c.T;
    j["n"] = c.n;
    j["m0"] = c.m0;
  }
  if (c.algorithm) j["algorithm"] = std::string(algorithm_name(*c.algorithm));
  j["N"] = c.N;
  j["log_every"] = c.log_every;
  if (c.tau) j["tau"] = *c.tau;
  if (c.sigma) j["sigma"] = *c.sigma;
  if (c.r) j["r"] = *c.r;
  if (c.xi) j["xi"] = *c.xi;
  j["tol"] = c.tol;
  j["output_dir"] = c.output_dir.string();
  return j;
}

json potential_to_json(const ScalarPotential& p) {
  if (p.is_zero()) return json{{"type", "zero"}};
  if (const auto* q = dynamic_cast<const QuadBox*>(&p))
    return json{{"type", "quadbox"},
                {"c", q->c()},
                {"r", q->r()},
                {"lo", real_to_json(q->lo())},
                {"hi", real_to_json(q->hi())}};
  throw ConfigError("potential " + p.describe() + " has no JSON form");
}

PotentialPtr potential_from_json(const json& j) {
  if (!j.is_object() || !j.contains("type")) throw ConfigError("potential descriptor needs a \"type\"");
  const auto type = get_checked<std::string>(j, "type");
  if (type == "zero") {
    check_keys(j, {"type"}, "zero potential");
    return make_zero();
  }
  if (type != "quadbox") throw ConfigError("unknown potential type \"" + type + "\"");
  check_keys(j, {"type", "c", "r", "lo", "hi"}, "quadbox potential");
  const double c = j.contains("c") ? get_real(j, "c") : 0.0;
  const double r = j.contains("r") ? get_real(j, "r") : 0.0;
  const double lo = j.contains("lo") ? get_real(j, "lo") : -kInf;
  const double hi = j.contains("hi") ? get_real(j, "hi") : kInf;
  try {
    return make_quadbox(c, r, lo, hi);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

json instance_to_json(const MfgInstance& inst) {
  const GridShape g = inst.shape();
  json j;
  j["problem"] = inst.problem();
  j["T"] = g.T;
  j["n"] = g.n;
  j["m0"] = std::vector<double>(inst.m0().begin(), inst.m0().end());
  if (inst.problem() == "example1" || inst.problem() == "example2") return j;

  j["dx"] = inst.dx();
  j["dt"] = inst.dt();
  j["mask"] = nested(g, [&](int t, int x, int y) { return inst.allowed(t, x, y); });
  j["beta"] = nested(g, [&](int t, int x, int y) { return inst.beta(t, x, y); });
  j["alpha"] = nested(g, [&](int t, int x, int y) { return inst.alpha(t, x, y); });
  json F = json::array();
  for (int s = 0; s <= g.T; ++s) {
    json row = json::array();
    for (int x = 0; x < g.n; ++x) row.push_back(potential_to_json(inst.F(s, x)));
    F.push_back(std::move(row));
  }
  json phi = json::array();
  for (int t = 0; t < g.T; ++t) phi.push_back(potential_to_json(inst.phi(t)));
  j["potentials"] = json{{"F", std::move(F)}, {"phi", std::move(phi)}};
  return j;
}

MfgInstance instance_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("instance must be a JSON object");
  const std::string problem = j.contains("problem") ? get_checked<std::string>(j, "problem") : "custom";
  if (!j.contains("T") || !j.contains("n")) throw ConfigError("instance needs \"T\" and \"n\"");
  const int T = get_int(j, "T");
  const int n = get_int(j, "n");
  if (T < 1 || n < 1) throw ConfigError("T and n must be positive");
  const json m0j = j.contains("m0") ? j.at("m0") : json("default-gaussian");

  try {
    if (problem == "example1" || problem == "example2") {
      check_keys(j, {"problem", "T", "n", "m0"}, "example instance");
      auto m0 = parse_m0(m0j, n);
      return problem == "example1" ? build_example1(T, n, std::move(m0)) : build_example2(T, n, std::move(m0));
    }
    if (problem != "custom") throw ConfigError("unknown problem \"" + problem + "\"");
    check_keys(j, {"problem", "T", "n", "m0", "dx", "dt", "mask", "beta", "alpha", "potentials"},
               "custom instance");
    for (const char* k : {"mask", "beta", "potentials"})
      if (!j.contains(k)) throw ConfigError(std::string("custom instance needs \"") + k + "\"");

    InstanceData d;
    d.shape = {T, n};
    d.problem = "custom";
    auto m0 = parse_m0(m0j, n);
    d.m0 = m0 ? *std::move(m0) : default_initial_law(n);
    d.dx = j.contains("dx") ? get_real(j, "dx") : 1.0;
    d.dt = j.contains("dt") ? get_real(j, "dt") : 1.0;
    d.mask = TransitionMask(d.shape);
    d.beta = TransitionField(d.shape);
    d.alpha = TransitionField(d.shape);
    for (int t = 0; t < T; ++t)
      for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) {
          const json& m = nested_at(j.at("mask"), d.shape, t, x, y, "mask");
          if (!m.is_boolean() && !m.is_number_integer()) throw ConfigError("mask entries must be booleans");
          d.mask.set(t, x, y, m.is_boolean() ? m.get<bool>() : m.get<int>() != 0);
          const json& b = nested_at(j.at("beta"), d.shape, t, x, y, "beta");
          if (!b.is_number()) throw ConfigError("beta entries must be numbers");
          d.beta(t, x, y) = b.get<double>();
          if (j.contains("alpha")) {
            const json& a = nested_at(j.at("alpha"), d.shape, t, x, y, "alpha");
            if (!a.is_number()) throw ConfigError("alpha entries must be numbers");
            d.alpha(t, x, y) = a.get<double>();
          }
        }

    const json& pot = j.at("potentials");
    check_keys(pot, {"F", "phi"}, "potentials");
    if (!pot.contains("F") || !pot.at("F").is_array() || pot.at("F").size() != static_cast<std::size_t>(T + 1))
      throw ConfigError("potentials.F must be a (T+1) x n array");
    for (const json& row : pot.at("F")) {
      if (!row.is_array() || row.size() != static_cast<std::size_t>(n))
        throw ConfigError("potentials.F must be a (T+1) x n array");
      for (const json& p : row) d.F.push_back(potential_from_json(p));
    }
    if (pot.contains("phi")) {
      if (!pot.at("phi").is_array() || pot.at("phi").size() != static_cast<std::size_t>(T))
        throw ConfigError("potentials.phi must have T entries");
      for (const json& p : pot.at("phi")) d.phi.push_back(potential_from_json(p));
    } else {
      d.phi.assign(static_cast<std::size_t>(T), make_zero());
    }

    const auto problems = validate(d);
    if (!problems.empty()) throw ConfigError("invalid instance: " + problems.front());
    return MfgInstance(std::move(d));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  } catch (const json::exception& e) {
    throw ConfigError(e.what());
  }
}

MfgInstance load_instance(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open instance " + path.string());
  try {
    return instance_from_json(json::parse(is));
  } catch (const json::parse_error& e) {
    throw ConfigError("instance " + path.string() + " is not valid JSON: " + e.what());
  }
}

MfgInstance build_instance(const RunConfig& c) {
  if (c.problem == "custom") return load_instance(c.instance);
  json j{{"problem", c.problem}, {"T", c.T}, {"n", c.n}, {"m0", c.m0}};
  return instance_from_json(j);
}

std::string format_double(double v) {
  std::string s;
  append_double(s, v);
  return s;
}

std::string time_state_csv(const TimeStateField& f) {
  return matrix_csv(f, f.shape().T + 1, f.shape().n);
}

std::string stage_state_csv(const StageStateField& f) { return matrix_csv(f, f.shape().T, f.shape().n); }

std::string transition_csv(const TransitionField& f, const MfgInstance& inst) {
  std::string out = "t,x,y,value\n";
  for (int t = 0; t < inst.T(); ++t)
    for (int x = 0; x < inst.n(); ++x)
      for (int y : inst.support(t, x)) {
        out += std::to_string(t) + ',' + std::to_string(x) + ',' + std::to_string(y) + ',';
        append_double(out, f(t, x, y));
        out += '\n';
      }
  return out;
}

std::string time_series_csv(const TimeSeries& f) {
  std::string out = "t,value\n";
  for (int t = 0; t < f.shape().T; ++t) {
    out += std::to_string(t) + ',';
    append_double(out, f(t));
    out += '\n';
  }
  return out;
}

std::string residuals_csv(const std::vector<LogRow>& rows) {
  std::string out(kResidualsHeader);
  out += '\n';
  for (const LogRow& r : rows) {
    out += std::to_string(r.k);
    for (double v : row_values(r)) {
      out += ',';
      append_double(out, v);
    }
    out += '\n';
  }
  return out;
}

std::vector<std::vector<double>> read_numeric_csv(const fs::path& path, std::string_view header) {
  std::ifstream is(path);
  if (!is) throw ConfigError("missing file " + path.string());
  std::string line;
  if (!std::getline(is, line) || line != header)
    throw ConfigError("unexpected header in " + path.string());
  const std::size_t cols = split(std::string(header)).size();
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != cols) throw ConfigError("wrong column count in " + path.string());
    std::vector<double> row;
    row.reserve(cols);
    for (const auto& c : cells) row.push_back(parse_double(c, path));
    rows.push_back(std::move(row));
  }
  return rows;
}

TimeStateField read_time_state_csv(const fs::path& path, GridShape g) {
  const auto rows = read_numeric_csv(path, state_header(g.n));
  if (rows.size() != static_cast<std::size_t>(g.T + 1))
    throw ConfigError("expected " + std::to_string(g.T + 1) + " rows in " + path.string());
  TimeStateField f(g);
  for (int s = 0; s <= g.T; ++s)
    for (int x = 0; x < g.n; ++x) f(s, x) = rows[static_cast<std::size_t>(s)][static_cast<std::size_t>(x)];
  return f;
}

TransitionField read_transition_csv(const fs::path& path, const MfgInstance& inst) {
  const auto rows = read_numeric_csv(path, "t,x,y,value");
  TransitionField f(inst.shape());
  std::size_t i = 0;
  for (int t = 0; t < inst.T(); ++t)
    for (int x = 0; x < inst.n(); ++x)
      for (int y : inst.support(t, x)) {
        if (i >= rows.size()) throw ConfigError("too few rows in " + path.string());
        const auto& r = rows[i++];
        if (r[0] != t || r[1] != x || r[2] != y) throw ConfigError("unexpected index in " + path.string());
        f(t, x, y) = r[3];
      }
  if (i != rows.size()) throw ConfigError("too many rows in " + path.string());
  return f;
}

TimeSeries read_time_series_csv(const fs::path& path, GridShape g) {
  const auto rows = read_numeric_csv(path, "t,value");
  if (rows.size() != static_cast<std::size_t>(g.T))
    throw ConfigError("expected " + std::to_string(g.T) + " rows in " + path.string());
  TimeSeries f(g);
  for (int t = 0; t < g.T; ++t) {
    if (rows[static_cast<std::size_t>(t)][0] != t) throw ConfigError("unexpected index in " + path.string());
    f(t) = rows[static_cast<std::size_t>(t)][1];
  }
  return f;
}

SolverOptions solver_options(const RunConfig& c, Algorithm a) {
  SolverOptions o;
  o.algorithm = a;
  o.N = c.N;
  o.log_every = c.log_every;
  o.tol = c.tol;
  if (a == Algorithm::cp || a == Algorithm::cp_bregman) {
    o.tau = c.tau;
    o.sigma = c.sigma;
  }
  if (c.r) o.r = *c.r;
  if (c.xi) o.xi = *c.xi;
  if (verbose()) {
    const std::string name(algorithm_name(a));
    o.on_log = [name](const LogRow& r) {
      const auto& n = r.norms;
      std::cerr << name << " k=" << r.k << " eps_pi=" << n.pi.inf << " eps_m=" << n.m.inf
                << " eps_gamma=" << n.gamma.inf << " eps_P=" << n.P.inf << " gap=" << n.gap
                << " t=" << r.seconds << "s\n";
    };
  }
  return o;
}

void write_solution(const fs::path& dir, const RunConfig& c, const MfgInstance& inst, const SolveResult& res) {
  const ResidualReport& rep = res.report;
  const ScaleMap& map = res.map;
  write_text(dir / "m.csv", time_state_csv(rep.m));
  write_text(dir / "w.csv", transition_csv(map.flow_to_scaled(res.x.w), inst));
  write_text(dir / "pi.csv", transition_csv(rep.pi, inst));
  write_text(dir / "v.csv", stage_state_csv(mean_displacement(rep.pi)));
  write_text(dir / "u.csv", time_state_csv(rep.u_hat));
  write_text(dir / "gamma.csv", time_state_csv(rep.gamma));
  write_text(dir / "P.csv", time_series_csv(rep.P));
  write_text(dir / "D.csv", time_series_csv(res.x.D));
  write_text(dir / "residuals.csv", residuals_csv(res.log.rows));
  if (!res.log.last_rows.empty()) write_text(dir / "residuals_last.csv", residuals_csv(res.log.last_rows));

  const UnscaledProblem core = to_unscaled(inst);
  const OperatorNorm norm = res.norm.iterations > 0 ? res.norm : op_norm(core.core);
  const CertificateReport cert = certificates(res.x, res.y, core.core);

  json meta;
  meta["config"] = to_json(c);
  meta["instance"] = instance_to_json(inst);
  meta["algorithm"] = std::string(algorithm_name(res.algorithm));
  meta["iterations"] = res.iterations;
  meta["wall_time_seconds"] = res.seconds;
  meta["operator_norm"] = {{"estimate", norm.estimate},
                           {"bound", norm.bound},
                           {"power_iterations", norm.iterations},
                           {"converged", norm.converged}};
  if (res.algorithm == Algorithm::cp || res.algorithm == Algorithm::cp_bregman)
    meta["step_sizes"] = {{"tau", res.tau}, {"sigma", res.sigma}};
  else if (res.algorithm == Algorithm::admm)
    meta["step_sizes"] = {{"r", res.r}};
  else
    meta["step_sizes"] = {{"r", res.r}, {"xi", res.xi}};
  meta["scaling"] = {{"dx", map.dx}, {"dt", map.dt}};
  json cj = json::object();
  for (std::size_t i = 0; i < 7; ++i) cj["C" + std::to_string(i + 1)] = real_to_json(cert.magnitude[i]);
  meta["certificates"] = std::move(cj);
  meta["final_residuals"] = res.log.rows.empty() ? json() : row_to_json(res.log.rows.back());
  meta["min_eps_pi"] = real_to_json(res.log.min_eps_pi);
  meta["objective_core_units"] = {{"primal", real_to_json(rep.primal)}, {"dual", real_to_json(rep.dual)}};
  if (inst.problem() == "example2") {
    meta["exogenous_demand"] = example2_exogenous_demand(inst.T());
    meta["D_max"] = 0.0;
  }
  write_text(dir / "meta.json", meta.dump(2) + "\n");
}

LogRow recompute_residuals(const fs::path& dir) {
  std::ifstream is(dir / "meta.json");
  if (!is) throw ConfigError("missing file " + (dir / "meta.json").string());
  json meta;
  try {
    meta = json::parse(is);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("meta.json is not valid JSON: ") + e.what());
  }
  if (!meta.contains("instance")) throw ConfigError("meta.json has no instance");
  const MfgInstance inst = instance_from_json(meta.at("instance"));
  const GridShape g = inst.shape();
  const UnscaledProblem core = to_unscaled(inst);
  const ScaleMap& map = core.map;

  const TimeStateField m = map.density_from_scaled(read_time_state_csv(dir / "m.csv", g));
  const TransitionField w = map.flow_from_scaled(read_transition_csv(dir / "w.csv", inst));
  const TimeStateField gamma = map.congestion_from_scaled(read_time_state_csv(dir / "gamma.csv", g));
  const TimeSeries P = map.price_from_scaled(read_time_series_csv(dir / "P.csv", g));

  const ResidualReport rep = scaled_residuals(residuals(m, w, gamma, P, core.core), inst, map);
  int k = 0;
  if (meta.contains("final_residuals") && meta.at("final_residuals").is_object())
    k = meta.at("final_residuals").value("k", 0);
  return detail::make_row(k, rep, 0.0);
}

int cmd_solve(const RunConfig& c) {
  if (!c.algorithm) {
    std::cerr << "error: solve needs an algorithm\n";
    return kExitUsage;
  }
  std::optional<MfgInstance> inst;
  try {
    inst.emplace(build_instance(c));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  double seconds = 0.0;
  std::string error;
  const int code = run_one(c, *inst, *c.algorithm, c.output_dir, seconds, error);
  if (code != kExitOk) std::cerr << "error: " << error << "\n";
  else if (verbose()) std::cerr << "wrote " << c.output_dir.string() << " in " << seconds << "s\n";
  return code;
}

int cmd_compare(const RunConfig& c) {
  if (c.algorithm) {
    std::cerr << "error: compare runs every algorithm; remove \"algorithm\" from the config\n";
    return kExitUsage;
  }
  std::optional<MfgInstance> inst;
  try {
    inst.emplace(build_instance(c));
    fs::create_directories(c.output_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  std::string timings(kTimingsHeader);
  timings += '\n';
  int worst = kExitOk;
  for (Algorithm a : {Algorithm::cp, Algorithm::cp_bregman, Algorithm::admm, Algorithm::admg}) {
    const std::string name(algorithm_name(a));
    RunConfig ci = c;
    ci.algorithm = a;
    ci.output_dir = c.output_dir / name;
    if (a == Algorithm::cp || a == Algorithm::cp_bregman) {
      ci.r.reset();
      ci.xi.reset();
    } else {
      ci.tau.reset();
      ci.sigma.reset();
      if (a == Algorithm::admm) ci.xi.reset();
    }
    double seconds = 0.0;
    std::string error;
    const int code = run_one(ci, *inst, a, ci.output_dir, seconds, error);
    if (code != kExitOk) {
      std::cerr << "error: " << name << ": " << error << "\n";
      worst = std::max(worst, code);
    } else if (verbose()) {
      std::cerr << name << " done in " << seconds << "s\n";
    }
    timings += name + ',';
    append_double(timings, seconds);
    timings += code == kExitOk ? ",ok\n" : ",failed\n";
  }
  try {
    write_text(c.output_dir / "timings.csv", timings);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return worst;
}

int cmd_residuals(const fs::path& dir) {
  LogRow row;
  std::vector<std::vector<double>> logged;
  try {
    row = recompute_residuals(dir);
    logged = read_numeric_csv(dir / "residuals.csv", kResidualsHeader);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  std::cout << residuals_csv({row});
  if (logged.empty()) return kExitOk;

  const auto fresh = row_values(row);
  const auto& last = logged.back();
  double dev = 0.0;
  for (std::size_t i = 0; i < fresh.size(); ++i) {
    const double a = fresh[i];
    const double b = last[i + 1];
    if (a == b) continue;
    dev = std::max(dev, std::isfinite(a) && std::isfinite(b) ? std::abs(a - b) : kInf);
  }
  std::cout << "max deviation from final logged row: " << format_double(dev) << "\n";
  if (dev > 1e-9) {
    std::cerr << "error: recomputed residuals differ from the final logged row\n";
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace dpmfg
