#pragma once

#include <limits>
#include <memory>
#include <string>

namespace dpmfg {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Closed interval [lo, hi] of the extended real line, or the empty set.
/// Used to describe subdifferentials of scalar convex functions.
struct Interval {
  double lo = -kInf;
  double hi = kInf;
  bool empty = false;

  static Interval point(double v) { return {v, v, false}; }
  static Interval whole_line() { return {-kInf, kInf, false}; }
  static Interval none() { return {0.0, 0.0, true}; }

  bool is_whole_line() const { return !empty && lo == -kInf && hi == kInf; }
  bool is_singleton() const { return !empty && lo == hi; }
  bool contains(double v) const { return !empty && lo <= v && v <= hi; }
  /// Euclidean projection; requires a non-empty interval.
  double project(double v) const;
  /// Distance to the set, +inf when empty.
  double distance(double v) const;
};

/// Proper, convex, lower semicontinuous function g: R -> R u {+inf}.
///
/// Implementations provide g, its Fenchel conjugate g*, the proximal map
/// prox_{lam g}(z) = argmin_x (x - z)^2 / 2 + lam g(x), and the subdifferentials
/// of g and g*. Potentials are immutable and shared between grid points.
class ScalarPotential : public std::enable_shared_from_this<ScalarPotential> {
 public:
  virtual ~ScalarPotential() = default;

  virtual double eval(double v) const = 0;
  virtual double conj_eval(double p) const = 0;
  virtual double prox(double lam, double z) const = 0;
  /// dg*(p): the maximizers of p x - g(x).
  virtual Interval conj_subdiff(double p) const = 0;
  /// dg(v).
  virtual Interval subdiff(double v) const = 0;

  /// The potential v -> k g(v / h), with k, h > 0. The default wraps *this,
  /// which must then be owned by a shared_ptr.
  virtual std::shared_ptr<const ScalarPotential> scaled(double k, double h) const;

  virtual bool is_zero() const { return false; }
  virtual std::string describe() const = 0;

  /// eval() at the nearest point of the domain when v lies within `tol` of it.
  virtual double eval_tolerant(double v, double tol) const;
};

using PotentialPtr = std::shared_ptr<const ScalarPotential>;

/// g(x) = (c/2)(x - r)^2 + indicator of [lo, hi], c >= 0, lo <= hi (bounds may be infinite).
class QuadBox final : public ScalarPotential {
 public:
  QuadBox(double c, double r, double lo, double hi);

  double c() const { return c_; }
  double r() const { return r_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

  double eval(double v) const override;
  double conj_eval(double p) const override;
  double prox(double lam, double z) const override;
  Interval conj_subdiff(double p) const override;
  Interval subdiff(double v) const override;
  std::shared_ptr<const ScalarPotential> scaled(double k, double h) const override;
  bool is_zero() const override { return c_ == 0.0 && lo_ == -kInf && hi_ == kInf; }
  std::string describe() const override;
  double eval_tolerant(double v, double tol) const override;

 private:
  double c_, r_, lo_, hi_;
};

/// g = 0. Its conjugate is the indicator of {0}.
class ZeroPotential final : public ScalarPotential {
 public:
  double eval(double) const override { return 0.0; }
  double conj_eval(double p) const override { return p == 0.0 ? 0.0 : kInf; }
  double prox(double, double z) const override { return z; }
  Interval conj_subdiff(double p) const override {
    return p == 0.0 ? Interval::whole_line() : Interval::none();
  }
  Interval subdiff(double) const override { return Interval::point(0.0); }
  std::shared_ptr<const ScalarPotential> scaled(double, double) const override;
  bool is_zero() const override { return true; }
  std::string describe() const override { return "zero"; }
};

PotentialPtr make_quadbox(double c, double r, double lo, double hi);
PotentialPtr make_zero();

}  // namespace dpmfg
