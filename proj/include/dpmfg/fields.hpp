#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace dpmfg {

/// Horizon T (number of decision stages) and number of states n.
/// Stage indices run over {0..T-1}, time indices over {0..T}, states over {0..n-1}.
struct GridShape {
  int T = 1;
  int n = 1;

  friend bool operator==(const GridShape&, const GridShape&) = default;
};

namespace detail {

// Dense storage with element-wise arithmetic shared by all field types.
template <class Derived>
class DenseField {
 public:
  std::span<double> data() { return values_; }
  std::span<const double> data() const { return values_; }
  std::size_t size() const { return values_.size(); }

  void fill(double v) { std::fill(values_.begin(), values_.end(), v); }

  Derived& operator+=(const Derived& o) {
    check_same(o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    return self();
  }
  Derived& operator-=(const Derived& o) {
    check_same(o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    return self();
  }
  Derived& operator*=(double s) {
    for (double& v : values_) v *= s;
    return self();
  }
  /// this += s * o
  Derived& axpy(double s, const Derived& o) {
    check_same(o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += s * o.values_[i];
    return self();
  }

  friend Derived operator+(Derived a, const Derived& b) { return a += b; }
  friend Derived operator-(Derived a, const Derived& b) { return a -= b; }
  friend Derived operator*(double s, Derived a) { return a *= s; }

  double dot(const Derived& o) const {
    check_same(o);
    double acc = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) acc += values_[i] * o.values_[i];
    return acc;
  }
  double norm_inf() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }
  double norm2_squared() const { return dot(static_cast<const Derived&>(*this)); }

  friend bool operator==(const DenseField& a, const DenseField& b) {
    return a.values_ == b.values_;
  }

 protected:
  DenseField() = default;
  explicit DenseField(std::size_t n, double v = 0.0) : values_(n, v) {}

  std::vector<double> values_;

 private:
  Derived& self() { return static_cast<Derived&>(*this); }
  void check_same(const Derived& o) const {
    if (o.values_.size() != values_.size())
      throw std::invalid_argument("field shape mismatch");
  }
};

}  // namespace detail

/// Real field over {0..T} x S (densities, values, congestion, ...).
class TimeStateField : public detail::DenseField<TimeStateField> {
 public:
  TimeStateField() = default;
  explicit TimeStateField(GridShape g, double v = 0.0)
      : DenseField((g.T + 1) * static_cast<std::size_t>(g.n), v), shape_(g) {}

  GridShape shape() const { return shape_; }
  double& operator()(int s, int x) { return values_[index(s, x)]; }
  double operator()(int s, int x) const { return values_[index(s, x)]; }
  std::span<double> row(int s) { return data().subspan(index(s, 0), shape_.n); }
  std::span<const double> row(int s) const { return data().subspan(index(s, 0), shape_.n); }

 private:
  std::size_t index(int s, int x) const {
    assert(s >= 0 && s <= shape_.T && x >= 0 && x < shape_.n);
    return static_cast<std::size_t>(s) * shape_.n + x;
  }
  GridShape shape_{};
};

/// Real field over {0..T-1} x S (mean displacement, Fenchel-Young gaps).
class StageStateField : public detail::DenseField<StageStateField> {
 public:
  StageStateField() = default;
  explicit StageStateField(GridShape g, double v = 0.0)
      : DenseField(g.T * static_cast<std::size_t>(g.n), v), shape_(g) {}

  GridShape shape() const { return shape_; }
  double& operator()(int t, int x) { return values_[index(t, x)]; }
  double operator()(int t, int x) const { return values_[index(t, x)]; }

 private:
  std::size_t index(int t, int x) const {
    assert(t >= 0 && t < shape_.T && x >= 0 && x < shape_.n);
    return static_cast<std::size_t>(t) * shape_.n + x;
  }
  GridShape shape_{};
};

/// Real field over {0..T-1} x S x S (flows w, policies pi, costs, dual slacks b).
class TransitionField : public detail::DenseField<TransitionField> {
 public:
  TransitionField() = default;
  explicit TransitionField(GridShape g, double v = 0.0)
      : DenseField(g.T * static_cast<std::size_t>(g.n) * g.n, v), shape_(g) {}

  GridShape shape() const { return shape_; }
  double& operator()(int t, int x, int y) { return values_[index(t, x, y)]; }
  double operator()(int t, int x, int y) const { return values_[index(t, x, y)]; }
  /// Row (t, x, .) over all destination states.
  std::span<double> row(int t, int x) { return data().subspan(index(t, x, 0), shape_.n); }
  std::span<const double> row(int t, int x) const {
    return data().subspan(index(t, x, 0), shape_.n);
  }

 private:
  std::size_t index(int t, int x, int y) const {
    assert(t >= 0 && t < shape_.T && x >= 0 && x < shape_.n && y >= 0 && y < shape_.n);
    return (static_cast<std::size_t>(t) * shape_.n + x) * shape_.n + y;
  }
  GridShape shape_{};
};

/// Real series over {0..T-1} (prices P, demands D).
class TimeSeries : public detail::DenseField<TimeSeries> {
 public:
  TimeSeries() = default;
  explicit TimeSeries(GridShape g, double v = 0.0) : DenseField(g.T, v), shape_(g) {}

  GridShape shape() const { return shape_; }
  double& operator()(int t) { return values_[static_cast<std::size_t>(t)]; }
  double operator()(int t) const { return values_[static_cast<std::size_t>(t)]; }

 private:
  GridShape shape_{};
};

/// Root-mean-square of a field's entries (0 for an empty field).
template <class F>
double norm_rms(const F& f) {
  if (f.size() == 0) return 0.0;
  return std::sqrt(f.norm2_squared() / static_cast<double>(f.size()));
}

}  // namespace dpmfg
