#include "dpmfg/instance.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace dpmfg {

namespace {

std::size_t cell(GridShape g, int t, int x) { return static_cast<std::size_t>(t) * g.n + x; }

void check_sizes(const InstanceData& d) {
  const GridShape g = d.shape;
  if (g.T < 1 || g.n < 1) throw std::invalid_argument("grid shape must have T >= 1 and n >= 1");
  if (d.m0.size() != static_cast<std::size_t>(g.n))
    throw std::invalid_argument("initial law has the wrong length");
  if (!(d.beta.shape() == g) || d.beta.size() != static_cast<std::size_t>(g.T) * g.n * g.n)
    throw std::invalid_argument("beta has the wrong shape");
  if (!(d.alpha.shape() == g) || d.alpha.size() != d.beta.size())
    throw std::invalid_argument("alpha has the wrong shape");
  if (!(d.mask.shape() == g) || d.mask.size() != d.beta.size())
    throw std::invalid_argument("mask has the wrong shape");
  if (d.F.size() != static_cast<std::size_t>(g.T + 1) * g.n)
    throw std::invalid_argument("F has the wrong length");
  if (d.phi.size() != static_cast<std::size_t>(g.T))
    throw std::invalid_argument("phi has the wrong length");
  for (const auto& p : d.F)
    if (!p) throw std::invalid_argument("F contains a null potential");
  for (const auto& p : d.phi)
    if (!p) throw std::invalid_argument("phi contains a null potential");
}

// Neighbour mask {x-1, x, x+1} and quadratic displacement cost of both examples.
void fill_nearest_neighbour(InstanceData& d) {
  const GridShape g = d.shape;
  const double ratio = d.dx / d.dt;
  d.beta = TransitionField(g);
  d.mask = TransitionMask(g);
  for (int t = 0; t < g.T; ++t)
    for (int x = 0; x < g.n; ++x)
      for (int y = std::max(0, x - 1); y <= std::min(g.n - 1, x + 1); ++y) {
        d.mask.set(t, x, y, true);
        const double step = (y - x) * ratio;
        d.beta(t, x, y) = step * step / 4.0;
      }
}

std::vector<double> pick_m0(int n, std::optional<std::vector<double>> m0) {
  if (!m0) return default_initial_law(n);
  if (m0->size() != static_cast<std::size_t>(n))
    throw std::invalid_argument("initial law has the wrong length");
  return *std::move(m0);
}

}  // namespace

MfgInstance::MfgInstance(InstanceData data) : data_(std::move(data)) {
  check_sizes(data_);
  const GridShape g = data_.shape;
  support_begin_.assign(static_cast<std::size_t>(g.T) * g.n + 1, 0);
  alpha_bar_.assign(static_cast<std::size_t>(g.T), 0.0);
  for (int t = 0; t < g.T; ++t) {
    double ab = 0.0;
    for (int x = 0; x < g.n; ++x) {
      support_begin_[cell(g, t, x)] = support_flat_.size();
      for (int y = 0; y < g.n; ++y) {
        if (!data_.mask(t, x, y)) continue;
        support_flat_.push_back(y);
        const double a = data_.alpha(t, x, y);
        ab += a * a;
      }
    }
    alpha_bar_[static_cast<std::size_t>(t)] = ab;
  }
  support_begin_.back() = support_flat_.size();

  price_inert_ = true;
  for (int t = 0; t < g.T; ++t)
    if (alpha_bar_[static_cast<std::size_t>(t)] != 0.0 || !data_.phi[static_cast<std::size_t>(t)]->is_zero())
      price_inert_ = false;
}

std::span<const int> MfgInstance::support(int t, int x) const {
  const std::size_t c = cell(data_.shape, t, x);
  return std::span<const int>(support_flat_).subspan(support_begin_[c],
                                                     support_begin_[c + 1] - support_begin_[c]);
}

double MfgInstance::alpha_bar_max() const {
  double a = 0.0;
  for (double v : alpha_bar_) a = std::max(a, v);
  return a;
}

TimeStateField MfgInstance::m0_bar() const {
  TimeStateField m(data_.shape);
  for (int x = 0; x < n(); ++x) m(0, x) = data_.m0[static_cast<std::size_t>(x)];
  return m;
}

std::vector<std::string> validate(const InstanceData& d) {
  std::vector<std::string> out;
  try {
    check_sizes(d);
  } catch (const std::exception& e) {
    out.emplace_back(e.what());
    return out;
  }
  const GridShape g = d.shape;
  double total = 0.0;
  bool negative = false;
  for (double v : d.m0) {
    if (!std::isfinite(v) || v < 0.0) negative = true;
    total += v;
  }
  if (negative) out.emplace_back("initial law has negative or non-finite entries");
  if (!(std::abs(total - 1.0) <= 1e-12)) out.emplace_back("initial law not normalized");

  for (int t = 0; t < g.T; ++t)
    for (int x = 0; x < g.n; ++x) {
      bool any = false;
      for (int y = 0; y < g.n; ++y) any = any || d.mask(t, x, y);
      if (!any) {
        std::ostringstream os;
        os << "empty transition domain at (t=" << t << ", x=" << x << ")";
        out.push_back(os.str());
      }
    }
  for (double v : d.beta.data())
    if (!std::isfinite(v)) {
      out.emplace_back("beta has non-finite entries");
      break;
    }
  for (double v : d.alpha.data())
    if (!std::isfinite(v)) {
      out.emplace_back("alpha has non-finite entries");
      break;
    }
  if (!(d.dx > 0.0) || !(d.dt > 0.0) || !std::isfinite(d.dx) || !std::isfinite(d.dt))
    out.emplace_back("scaling coefficients must be positive and finite");
  return out;
}

std::vector<double> default_initial_law(int n) {
  if (n < 1) throw std::invalid_argument("n must be positive");
  std::vector<double> m(static_cast<std::size_t>(n));
  const double dx = 1.0 / n;
  for (int x = 0; x < n; ++x) {
    const double z = (x + 0.5) * dx - 0.5;
    m[static_cast<std::size_t>(x)] = std::exp(-z * z / (2.0 * 0.15 * 0.15));
  }
  const double s = std::accumulate(m.begin(), m.end(), 0.0);
  for (double& v : m) v /= s;
  return m;
}

std::vector<double> uniform_initial_law(int n) {
  if (n < 1) throw std::invalid_argument("n must be positive");
  return std::vector<double>(static_cast<std::size_t>(n), 1.0 / n);
}

double example1_eta(GridShape g, int s, int x) {
  const bool in_time = s >= g.T / 3 && s <= (2 * g.T) / 3;
  const bool in_space = x >= g.n / 3 && x <= (2 * g.n) / 3;
  return in_time && in_space ? 0.5 : 3.0;
}

std::vector<double> example2_exogenous_demand(int T) {
  if (T < 2) throw std::invalid_argument("exogenous demand needs T >= 2");
  std::vector<double> d(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t)
    d[static_cast<std::size_t>(t)] = 2.0 * std::sin(4.0 * std::numbers::pi * t / (T - 1));
  return d;
}

MfgInstance build_example1(int T, int n, std::optional<std::vector<double>> m0) {
  if (T < 3 || n < 3) throw std::invalid_argument("example1 needs T >= 3 and n >= 3");
  InstanceData d;
  d.shape = {T, n};
  d.problem = "example1";
  d.dx = 1.0 / n;
  d.dt = 1.0 / T;
  d.m0 = pick_m0(n, std::move(m0));
  fill_nearest_neighbour(d);
  d.alpha = TransitionField(d.shape);
  d.F.reserve(static_cast<std::size_t>(T + 1) * n);
  for (int s = 0; s <= T; ++s)
    for (int x = 0; x < n; ++x) d.F.push_back(make_quadbox(1.0, 0.0, 0.0, example1_eta(d.shape, s, x)));
  d.phi.assign(static_cast<std::size_t>(T), make_zero());
  return MfgInstance(std::move(d));
}

MfgInstance build_example2(int T, int n, std::optional<std::vector<double>> m0) {
  if (T < 2 || n < 2) throw std::invalid_argument("example2 needs T >= 2 and n >= 2");
  InstanceData d;
  d.shape = {T, n};
  d.problem = "example2";
  d.dx = 1.0 / n;
  d.dt = 1.0 / T;
  d.m0 = pick_m0(n, std::move(m0));
  fill_nearest_neighbour(d);
  d.alpha = TransitionField(d.shape);
  for (int t = 0; t < T; ++t)
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y) d.alpha(t, x, y) = y - x;
  d.F.assign(static_cast<std::size_t>(T + 1) * n, make_zero());
  const auto dbar = example2_exogenous_demand(T);
  for (int t = 0; t < T; ++t)
    d.phi.push_back(make_quadbox(0.5, -dbar[static_cast<std::size_t>(t)], -kInf, 0.0));
  return MfgInstance(std::move(d));
}

TimeStateField ScaleMap::density_to_scaled(const TimeStateField& m) const { return (1.0 / dx) * m; }
TimeStateField ScaleMap::density_from_scaled(const TimeStateField& m) const { return dx * m; }
TransitionField ScaleMap::flow_to_scaled(const TransitionField& w) const { return (1.0 / dx) * w; }
TransitionField ScaleMap::flow_from_scaled(const TransitionField& w) const { return dx * w; }

TimeStateField ScaleMap::congestion_to_scaled(const TimeStateField& gamma) const {
  TimeStateField out = gamma;
  const int T = gamma.shape().T;
  for (int s = 0; s < T; ++s)
    for (double& v : out.row(s)) v /= dt;
  return out;
}

TimeStateField ScaleMap::congestion_from_scaled(const TimeStateField& gamma) const {
  TimeStateField out = gamma;
  const int T = gamma.shape().T;
  for (int s = 0; s < T; ++s)
    for (double& v : out.row(s)) v *= dt;
  return out;
}

TimeSeries ScaleMap::price_to_scaled(const TimeSeries& P) const { return (1.0 / dt) * P; }
TimeSeries ScaleMap::price_from_scaled(const TimeSeries& P) const { return dt * P; }

UnscaledProblem to_unscaled(const MfgInstance& inst) {
  InstanceData d = inst.data();
  const double dx = d.dx;
  const double dt = d.dt;
  const GridShape g = d.shape;
  d.beta *= dt;
  for (int s = 0; s <= g.T; ++s)
    for (int x = 0; x < g.n; ++x) {
      auto& p = d.F[cell(g, s, x)];
      p = p->scaled(s < g.T ? dt * dx : dx, dx);
    }
  for (auto& p : d.phi) p = p->scaled(dt, 1.0);
  d.dx = 1.0;
  d.dt = 1.0;
  return UnscaledProblem{MfgInstance(std::move(d)), ScaleMap{dx, dt}};
}

}  // namespace dpmfg
