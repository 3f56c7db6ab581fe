#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dpmfg/fields.hpp"
#include "dpmfg/potential.hpp"

namespace dpmfg {

/// Boolean field over {0..T-1} x S x S: mask(t, x, y) is true when y is in S_x at time t.
class TransitionMask {
 public:
  TransitionMask() = default;
  explicit TransitionMask(GridShape g, bool v = false)
      : shape_(g), values_(static_cast<std::size_t>(g.T) * g.n * g.n, v ? 1 : 0) {}

  GridShape shape() const { return shape_; }
  bool operator()(int t, int x, int y) const { return values_[index(t, x, y)] != 0; }
  void set(int t, int x, int y, bool v) { values_[index(t, x, y)] = v ? 1 : 0; }
  std::size_t size() const { return values_.size(); }

 private:
  std::size_t index(int t, int x, int y) const {
    return (static_cast<std::size_t>(t) * shape_.n + x) * shape_.n + y;
  }
  GridShape shape_{};
  std::vector<std::uint8_t> values_;
};

/// Raw problem data. Running cost is l(t,x,rho) = <rho, beta(t,x,.)> + indicator of
/// the simplex over S_x; the congestion potential is separable across states.
struct InstanceData {
  GridShape shape;
  std::vector<double> m0;            // initial law on S
  TransitionField beta;              // fixed displacement cost
  TransitionMask mask;               // allowed transitions
  TransitionField alpha;             // price kernel
  std::vector<PotentialPtr> F;       // (T+1) * n, row-major in (s, x)
  std::vector<PotentialPtr> phi;     // T
  double dx = 1.0;
  double dt = 1.0;
  std::string problem = "custom";
};

/// Immutable problem instance with cached per-cell supports and alpha_bar.
class MfgInstance {
 public:
  /// Throws std::invalid_argument when array sizes disagree with the shape.
  explicit MfgInstance(InstanceData data);

  const InstanceData& data() const { return data_; }
  GridShape shape() const { return data_.shape; }
  int T() const { return data_.shape.T; }
  int n() const { return data_.shape.n; }
  double dx() const { return data_.dx; }
  double dt() const { return data_.dt; }
  const std::string& problem() const { return data_.problem; }

  std::span<const double> m0() const { return data_.m0; }
  double beta(int t, int x, int y) const { return data_.beta(t, x, y); }
  double alpha(int t, int x, int y) const { return data_.alpha(t, x, y); }
  bool allowed(int t, int x, int y) const { return data_.mask(t, x, y); }
  /// Allowed destinations y in S_x at stage t, ascending.
  std::span<const int> support(int t, int x) const;

  const ScalarPotential& F(int s, int x) const {
    return *data_.F[static_cast<std::size_t>(s) * data_.shape.n + x];
  }
  const ScalarPotential& phi(int t) const { return *data_.phi[static_cast<std::size_t>(t)]; }

  /// Sum of alpha(t,x,y)^2 over allowed pairs.
  double alpha_bar(int t) const { return alpha_bar_[static_cast<std::size_t>(t)]; }
  double alpha_bar_max() const;
  /// alpha vanishes on the support and phi is identically zero: P is pinned to 0.
  bool price_channel_inert() const { return price_inert_; }

  /// m0 placed at time 0 of a (T+1) x n field.
  TimeStateField m0_bar() const;

 private:
  InstanceData data_;
  std::vector<int> support_flat_;
  std::vector<std::size_t> support_begin_;  // T*n + 1 offsets
  std::vector<double> alpha_bar_;
  bool price_inert_ = false;
};

/// Invariant violations of the data; empty when valid. Never throws.
std::vector<std::string> validate(const InstanceData& data);
inline std::vector<std::string> validate(const MfgInstance& inst) { return validate(inst.data()); }

/// m0(x) proportional to exp(-((x + 1/2)/n - 1/2)^2 / (2 * 0.15^2)). Its scaled peak
/// density stays below the cap 3 of the first example.
std::vector<double> default_initial_law(int n);
std::vector<double> uniform_initial_law(int n);

/// Congestion bound of the first example: 0.5 inside the window
/// floor(T/3) <= s <= floor(2T/3), floor(n/3) <= x <= floor(2n/3), else 3.
double example1_eta(GridShape g, int s, int x);
/// Exogenous demand of the second example, 2 sin(4 pi t / (T - 1)).
std::vector<double> example2_exogenous_demand(int T);

/// Congestion example with a hard density cap (scaled units, dx = 1/n, dt = 1/T).
MfgInstance build_example1(int T, int n, std::optional<std::vector<double>> m0 = std::nullopt);
/// Cournot example with a hard cap D <= 0 on the demand (scaled units).
MfgInstance build_example2(int T, int n, std::optional<std::vector<double>> m0 = std::nullopt);

/// Recovery maps between the core (unscaled) unknowns and the scaled system's unknowns.
struct ScaleMap {
  double dx = 1.0;
  double dt = 1.0;

  TimeStateField density_to_scaled(const TimeStateField& m) const;
  TimeStateField density_from_scaled(const TimeStateField& m) const;
  TransitionField flow_to_scaled(const TransitionField& w) const;
  TransitionField flow_from_scaled(const TransitionField& w) const;
  /// gamma / dt for s < T, unchanged at s = T.
  TimeStateField congestion_to_scaled(const TimeStateField& gamma) const;
  TimeStateField congestion_from_scaled(const TimeStateField& gamma) const;
  TimeSeries price_to_scaled(const TimeSeries& P) const;
  TimeSeries price_from_scaled(const TimeSeries& P) const;
};

struct UnscaledProblem {
  MfgInstance core;
  ScaleMap map;
};

/// Core instance whose KKT system is equivalent to the scaled system of `inst`:
/// beta -> dt beta, F(s<T) -> v |-> dt dx F(v/dx), F(T) -> v |-> dx F(v/dx), phi -> dt phi.
/// The core instance has dx = dt = 1.
UnscaledProblem to_unscaled(const MfgInstance& inst);

}  // namespace dpmfg
