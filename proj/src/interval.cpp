#include "reachverify/interval.hpp"

#include <algorithm>
#include <limits>

namespace reachverify {

namespace {

using rounding::down;
using rounding::down2;
using rounding::up;
using rounding::up2;

Interval make_checked(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    throw DomainError("interval operation overflowed to infinity");
  }
  return Interval(lo, hi);
}

}  // namespace

Interval operator+(Interval a, Interval b) {
  return make_checked(down(a.lo + b.lo), up(a.hi + b.hi));
}

Interval operator-(Interval a, Interval b) {
  return make_checked(down(a.lo - b.hi), up(a.hi - b.lo));
}

Interval operator-(Interval a) { return Interval(-a.hi, -a.lo); }

Interval operator*(Interval a, Interval b) {
  const double c[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
  const double lo = std::min(std::min(c[0], c[1]), std::min(c[2], c[3]));
  const double hi = std::max(std::max(c[0], c[1]), std::max(c[2], c[3]));
  return make_checked(down(lo), up(hi));
}

Interval operator/(Interval a, Interval b) {
  if (b.contains(0.0)) {
    throw DomainError("division by interval containing zero");
  }
  const double c[4] = {a.lo / b.lo, a.lo / b.hi, a.hi / b.lo, a.hi / b.hi};
  const double lo = std::min(std::min(c[0], c[1]), std::min(c[2], c[3]));
  const double hi = std::max(std::max(c[0], c[1]), std::max(c[2], c[3]));
  return make_checked(down(lo), up(hi));
}

Interval exp(Interval a) {
  double lo = down2(std::exp(a.lo));
  if (lo < 0.0) lo = 0.0;
  return make_checked(lo, up2(std::exp(a.hi)));
}

Interval log(Interval a) {
  if (a.lo <= 0.0) {
    throw DomainError("log of interval with non-positive lower bound");
  }
  return make_checked(down2(std::log(a.lo)), up2(std::log(a.hi)));
}

namespace {

// x^n for x >= 0, n >= 1, by binary exponentiation with directed rounding.
double pow_pos_down(double x, int n) {
  double acc = 1.0;
  double base = x;
  while (n > 0) {
    if (n & 1) acc = std::max(0.0, down(acc * base));
    n >>= 1;
    if (n) base = std::max(0.0, down(base * base));
  }
  return acc;
}

double pow_pos_up(double x, int n) {
  double acc = 1.0;
  double base = x;
  while (n > 0) {
    if (n & 1) acc = up(acc * base);
    n >>= 1;
    if (n) base = up(base * base);
  }
  return acc;
}

}  // namespace

Interval pow_int(Interval a, int n) {
  if (n == 0) return Interval::point(1.0);
  if (n < 0) return Interval::point(1.0) / pow_int(a, -n);
  if (n == 1) return a;
  if (n % 2 == 0) {
    const double m = a.mag();
    const double s = a.mig();
    return make_checked(pow_pos_down(s, n), pow_pos_up(m, n));
  }
  // Odd powers are monotone.
  const double lo = a.lo >= 0.0 ? pow_pos_down(a.lo, n) : -pow_pos_up(-a.lo, n);
  const double hi = a.hi >= 0.0 ? pow_pos_up(a.hi, n) : -pow_pos_down(-a.hi, n);
  return make_checked(lo, hi);
}

Interval hull(Interval a, Interval b) {
  return Interval(std::min(a.lo, b.lo), std::max(a.hi, b.hi));
}

Interval intersect(Interval a, Interval b) {
  const double lo = std::max(a.lo, b.lo);
  const double hi = std::min(a.hi, b.hi);
  if (lo > hi) throw DomainError("empty interval intersection");
  return Interval(lo, hi);
}

Box hull(const Box& a, const Box& b) {
  if (a.size() != b.size()) throw DomainError("box dimension mismatch in hull");
  Box out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = hull(a[i], b[i]);
  return out;
}

bool contains(const Box& outer, const Box& inner) {
  if (outer.size() != inner.size()) return false;
  for (size_t i = 0; i < outer.size(); ++i) {
    if (!outer[i].contains(inner[i])) return false;
  }
  return true;
}

bool contains(const Box& box, const Eigen::VectorXd& point) {
  if (static_cast<Eigen::Index>(box.size()) != point.size()) return false;
  for (size_t i = 0; i < box.size(); ++i) {
    if (!box[i].contains(point[static_cast<Eigen::Index>(i)])) return false;
  }
  return true;
}

Box inflate(const Box& b, double r) {
  Box out(b.size());
  for (size_t i = 0; i < b.size(); ++i) out[i] = b[i].inflated(r);
  return out;
}

Box box_around(const Eigen::VectorXd& center, double radius) {
  Box out(static_cast<size_t>(center.size()));
  for (Eigen::Index i = 0; i < center.size(); ++i) {
    out[static_cast<size_t>(i)] =
        Interval(center[i] - radius, center[i] + radius);
  }
  return out;
}

Eigen::VectorXd box_center(const Box& b) {
  Eigen::VectorXd c(static_cast<Eigen::Index>(b.size()));
  for (size_t i = 0; i < b.size(); ++i) c[static_cast<Eigen::Index>(i)] = b[i].mid();
  return c;
}

Eigen::VectorXd box_widths(const Box& b) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(b.size()));
  for (size_t i = 0; i < b.size(); ++i) w[static_cast<Eigen::Index>(i)] = b[i].width();
  return w;
}

double box_diameter(const Box& b) { return box_widths(b).norm(); }

IntervalMatrix::IntervalMatrix(Eigen::MatrixXd lo, Eigen::MatrixXd up)
    : lower(std::move(lo)), upper(std::move(up)) {
  if (lower.rows() != upper.rows() || lower.cols() != upper.cols()) {
    throw DomainError("interval matrix bound shapes differ");
  }
  if (((upper - lower).array() < 0.0).any()) {
    throw DomainError("interval matrix has lower > upper entry");
  }
}

bool IntervalMatrix::contains(const Eigen::MatrixXd& a, double tol) const {
  return ((a - lower).array() >= -tol).all() &&
         ((upper - a).array() >= -tol).all();
}

}  // namespace reachverify
