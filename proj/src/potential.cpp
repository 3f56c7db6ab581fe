#include "dpmfg/potential.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dpmfg {

double Interval::project(double v) const {
  if (empty) throw std::logic_error("projection onto an empty interval");
  return std::clamp(v, lo, hi);
}

double Interval::distance(double v) const {
  if (empty) return kInf;
  if (v < lo) return lo - v;
  if (v > hi) return v - hi;
  return 0.0;
}

namespace {

// v -> k g(v / h) for an arbitrary base potential.
class ScaledPotential final : public ScalarPotential {
 public:
  ScaledPotential(PotentialPtr base, double k, double h) : base_(std::move(base)), k_(k), h_(h) {}

  double eval(double v) const override { return k_ * base_->eval(v / h_); }
  double conj_eval(double p) const override { return k_ * base_->conj_eval(p * h_ / k_); }
  double prox(double lam, double z) const override {
    return h_ * base_->prox(lam * k_ / (h_ * h_), z / h_);
  }
  Interval conj_subdiff(double p) const override {
    return scale(base_->conj_subdiff(p * h_ / k_), h_);
  }
  Interval subdiff(double v) const override { return scale(base_->subdiff(v / h_), k_ / h_); }
  double eval_tolerant(double v, double tol) const override {
    return k_ * base_->eval_tolerant(v / h_, tol / h_);
  }
  std::string describe() const override {
    std::ostringstream os;
    os << "scaled(" << base_->describe() << ", k=" << k_ << ", h=" << h_ << ")";
    return os.str();
  }

 private:
  static Interval scale(Interval i, double f) {
    if (i.empty) return i;
    return {i.lo * f, i.hi * f, false};
  }
  PotentialPtr base_;
  double k_, h_;
};

}  // namespace

PotentialPtr ScalarPotential::scaled(double k, double h) const {
  if (!(k > 0.0) || !(h > 0.0)) throw std::invalid_argument("potential scaling must be positive");
  return std::make_shared<ScaledPotential>(shared_from_this(), k, h);
}

double ScalarPotential::eval_tolerant(double v, double) const { return eval(v); }

QuadBox::QuadBox(double c, double r, double lo, double hi) : c_(c), r_(r), lo_(lo), hi_(hi) {
  if (!(c >= 0.0) || !std::isfinite(c)) throw std::invalid_argument("QuadBox: c must be finite and >= 0");
  if (!std::isfinite(r)) throw std::invalid_argument("QuadBox: r must be finite");
  if (std::isnan(lo) || std::isnan(hi) || lo > hi || lo == kInf || hi == -kInf)
    throw std::invalid_argument("QuadBox: need lo <= hi");
}

double QuadBox::eval(double v) const {
  if (v < lo_ || v > hi_) return kInf;
  return 0.5 * c_ * (v - r_) * (v - r_);
}

double QuadBox::eval_tolerant(double v, double tol) const {
  if (v < lo_ - tol || v > hi_ + tol) return kInf;
  return eval(std::clamp(v, lo_, hi_));
}

double QuadBox::conj_eval(double p) const {
  if (c_ > 0.0) {
    const double x = std::clamp(r_ + p / c_, lo_, hi_);
    return p * x - 0.5 * c_ * (x - r_) * (x - r_);
  }
  if (p > 0.0) return hi_ == kInf ? kInf : p * hi_;
  if (p < 0.0) return lo_ == -kInf ? kInf : p * lo_;
  return 0.0;
}

double QuadBox::prox(double lam, double z) const {
  return std::clamp((z + lam * c_ * r_) / (1.0 + lam * c_), lo_, hi_);
}

Interval QuadBox::conj_subdiff(double p) const {
  if (c_ > 0.0) return Interval::point(std::clamp(r_ + p / c_, lo_, hi_));
  if (p > 0.0) return hi_ == kInf ? Interval::none() : Interval::point(hi_);
  if (p < 0.0) return lo_ == -kInf ? Interval::none() : Interval::point(lo_);
  return {lo_, hi_, false};
}

Interval QuadBox::subdiff(double v) const {
  if (v < lo_ || v > hi_) return Interval::none();
  const double g = c_ * (v - r_);
  if (lo_ == hi_) return Interval::whole_line();
  if (v == lo_) return {-kInf, g, false};
  if (v == hi_) return {g, kInf, false};
  return Interval::point(g);
}

PotentialPtr QuadBox::scaled(double k, double h) const {
  if (!(k > 0.0) || !(h > 0.0)) throw std::invalid_argument("potential scaling must be positive");
  // k (c/2)(v/h - r)^2 = (k c / h^2)/2 (v - r h)^2 ; box scales by h.
  return std::make_shared<QuadBox>(k * c_ / (h * h), r_ * h, lo_ * h, hi_ * h);
}

std::string QuadBox::describe() const {
  std::ostringstream os;
  os << "quadbox(c=" << c_ << ", r=" << r_ << ", lo=" << lo_ << ", hi=" << hi_ << ")";
  return os.str();
}

PotentialPtr ZeroPotential::scaled(double k, double h) const {
  if (!(k > 0.0) || !(h > 0.0)) throw std::invalid_argument("potential scaling must be positive");
  return make_zero();
}

PotentialPtr make_quadbox(double c, double r, double lo, double hi) {
  return std::make_shared<QuadBox>(c, r, lo, hi);
}

PotentialPtr make_zero() {
  static const PotentialPtr zero = std::make_shared<ZeroPotential>();
  return zero;
}

}  // namespace dpmfg
