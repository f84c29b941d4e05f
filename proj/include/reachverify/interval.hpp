#ifndef REACHVERIFY_INTERVAL_HPP
#define REACHVERIFY_INTERVAL_HPP

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace reachverify {

// Raised when an operation leaves its mathematical domain (log of a
// non-positive interval, division by an interval containing zero, overflow
// to infinity). Callers treat it as "the enclosing box must shrink".
class DomainError : public std::runtime_error {
 public:
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

namespace rounding {
// One-ULP outward steps. Round-to-nearest results are within 1/2 ULP of the
// exact value, so a single step in each direction yields a sound enclosure
// for +,-,*,/. libm exp/log are faithful (<1 ULP) and get two steps.
inline double down(double x) {
  return std::nextafter(x, -std::numeric_limits<double>::infinity());
}
inline double up(double x) {
  return std::nextafter(x, std::numeric_limits<double>::infinity());
}
inline double down2(double x) { return down(down(x)); }
inline double up2(double x) { return up(up(x)); }
}  // namespace rounding

// Closed interval [lo, hi] with finite bounds. All arithmetic widens
// outward so the result encloses the exact-arithmetic image.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  Interval() = default;
  Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
    if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
      throw DomainError("invalid interval [" + std::to_string(lo_) + ", " +
                        std::to_string(hi_) + "]");
    }
  }
  static Interval point(double v) { return Interval(v, v); }

  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
  double rad() const { return 0.5 * (hi - lo); }
  // Largest absolute value of any member.
  double mag() const { return std::max(std::fabs(lo), std::fabs(hi)); }
  // Smallest absolute value of any member.
  double mig() const {
    if (lo > 0.0) return lo;
    if (hi < 0.0) return -hi;
    return 0.0;
  }

  bool contains(double v) const { return lo <= v && v <= hi; }
  bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
  bool intersects(const Interval& o) const { return lo <= o.hi && o.lo <= hi; }

  Interval inflated(double r) const {
    if (r == 0.0) return *this;
    return Interval(rounding::down(lo - r), rounding::up(hi + r));
  }
};

Interval operator+(Interval a, Interval b);
Interval operator-(Interval a, Interval b);
Interval operator-(Interval a);
Interval operator*(Interval a, Interval b);
Interval operator/(Interval a, Interval b);
Interval exp(Interval a);
Interval log(Interval a);
Interval pow_int(Interval a, int n);
Interval hull(Interval a, Interval b);
Interval intersect(Interval a, Interval b);  // throws DomainError if empty

// Axis-aligned box: one interval per coordinate.
using Box = std::vector<Interval>;

Box hull(const Box& a, const Box& b);
bool contains(const Box& outer, const Box& inner);
bool contains(const Box& box, const Eigen::VectorXd& point);
Box inflate(const Box& b, double r);
Box box_around(const Eigen::VectorXd& center, double radius);
Eigen::VectorXd box_center(const Box& b);
Eigen::VectorXd box_widths(const Box& b);
// l2 diameter: norm of the per-axis width vector.
double box_diameter(const Box& b);

// Element-wise bounds on a set of matrices: every A with
// lower(i,j) <= A(i,j) <= upper(i,j) is a member.
struct IntervalMatrix {
  Eigen::MatrixXd lower;
  Eigen::MatrixXd upper;

  IntervalMatrix() = default;
  IntervalMatrix(Eigen::MatrixXd lo, Eigen::MatrixXd up);

  Eigen::Index rows() const { return lower.rows(); }
  Eigen::Index cols() const { return lower.cols(); }
  Eigen::MatrixXd center() const { return 0.5 * (lower + upper); }
  Eigen::MatrixXd half_width() const { return 0.5 * (upper - lower); }
  // Entry-wise max |member|, used for norm bounds.
  Eigen::MatrixXd magnitude() const {
    return lower.cwiseAbs().cwiseMax(upper.cwiseAbs());
  }
  bool contains(const Eigen::MatrixXd& a, double tol = 0.0) const;
};

}  // namespace reachverify

#endif  // REACHVERIFY_INTERVAL_HPP
