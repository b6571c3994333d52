// Piecewise-linear marginal functions with one-sided limits and exact
// integrals. This is the single representation used for link-cost
// derivatives, pricing curves, aggregated competitor curves and node
// outgoing-cost derivatives.
#ifndef NETPRICING_MARGINAL_HPP
#define NETPRICING_MARGINAL_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace netpricing {

// One linear piece: value runs from y_lo at x_lo to y_hi at x_hi.
// Jumps live only between adjacent segments.
struct Segment {
  double x_lo = 0.0;
  double x_hi = 0.0;
  double y_lo = 0.0;
  double y_hi = 0.0;

  double length() const { return x_hi - x_lo; }
  double slope() const { return (y_hi - y_lo) / (x_hi - x_lo); }
  double at(double x) const {
    if (x_hi == x_lo) return y_lo;
    return y_lo + (x - x_lo) * slope();
  }
};

// Piecewise-linear, possibly discontinuous function on [0, domain_hi].
// Evaluation at an interior breakpoint returns the right limit; at
// domain_hi it returns the left limit.
class MarginalFn {
 public:
  MarginalFn() = default;

  explicit MarginalFn(std::vector<Segment> segs) : segs_(std::move(segs)) {
    if (segs_.empty()) throw std::invalid_argument("MarginalFn: no segments");
    if (segs_.front().x_lo != 0.0)
      throw std::invalid_argument("MarginalFn: domain must start at 0");
    for (std::size_t k = 0; k < segs_.size(); ++k) {
      const Segment& s = segs_[k];
      if (!(s.x_lo < s.x_hi))
        throw std::invalid_argument("MarginalFn: empty segment");
      if (!std::isfinite(s.y_lo) || !std::isfinite(s.y_hi) ||
          !std::isfinite(s.x_lo) || !std::isfinite(s.x_hi))
        throw std::invalid_argument("MarginalFn: non-finite value");
      if (k > 0 && segs_[k - 1].x_hi != s.x_lo)
        throw std::invalid_argument("MarginalFn: segments must tile the domain");
    }
  }

  static MarginalFn constant(double c, double hi) {
    return MarginalFn({Segment{0.0, hi, c, c}});
  }

  // a + b*x on [0, hi]
  static MarginalFn linear(double a, double b, double hi) {
    return MarginalFn({Segment{0.0, hi, a, a + b * hi}});
  }

  // Polyline through (x, y) points; a repeated x introduces a jump.
  static MarginalFn from_points(const std::vector<std::pair<double, double>>& pts) {
    if (pts.size() < 2) throw std::invalid_argument("from_points: need >= 2 points");
    std::vector<Segment> segs;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
      const auto& [x0, y0] = pts[k];
      const auto& [x1, y1] = pts[k + 1];
      if (x1 < x0) throw std::invalid_argument("from_points: x not nondecreasing");
      if (x1 == x0) continue;  // jump: next segment starts at the new y
      segs.push_back(Segment{x0, x1, y0, y1});
    }
    return MarginalFn(std::move(segs));
  }

  // Samples a callable into `pieces` chords over [0, hi].
  template <class F>
  static MarginalFn sample(F&& f, double hi, int pieces) {
    if (pieces < 1) throw std::invalid_argument("sample: pieces < 1");
    std::vector<Segment> segs;
    segs.reserve(pieces);
    double x_prev = 0.0, y_prev = f(0.0);
    for (int k = 1; k <= pieces; ++k) {
      double x = hi * static_cast<double>(k) / pieces;
      double y = f(x);
      segs.push_back(Segment{x_prev, x, y_prev, y});
      x_prev = x;
      y_prev = y;
    }
    return MarginalFn(std::move(segs));
  }

  double domain_hi() const { return segs_.back().x_hi; }
  const std::vector<Segment>& segments() const { return segs_; }

  std::vector<double> breakpoints() const {
    std::vector<double> xs;
    xs.reserve(segs_.size() + 1);
    xs.push_back(0.0);
    for (const Segment& s : segs_) xs.push_back(s.x_hi);
    return xs;
  }

  // Right-limit convention; the upper domain end evaluates to its left limit.
  double value(double x) const {
    check_domain(x);
    if (x >= domain_hi()) return segs_.back().y_hi;
    return segs_[index_right(x)].at(x);
  }

  double left_limit(double x) const {
    check_domain(x);
    if (x <= 0.0) throw std::invalid_argument("left_limit at domain start");
    std::size_t k = index_right(x);
    if (segs_[k].x_lo == x) return segs_[k - 1].y_hi;  // k > 0 since x > 0
    return segs_[k].at(x);
  }

  double right_limit(double x) const {
    check_domain(x);
    if (x >= domain_hi()) throw std::invalid_argument("right_limit at domain end");
    return segs_[index_right(x)].at(x);
  }

  // g(r) = f(R - r) on [0, R]; mirrored segment structure, jumps preserved.
  MarginalFn reflect(double R) const {
    if (R <= 0.0 || R > domain_hi() + kDomainSlack)
      throw std::invalid_argument("reflect: R outside domain");
    std::vector<Segment> out;
    for (auto it = segs_.rbegin(); it != segs_.rend(); ++it) {
      if (it->x_lo >= R) continue;
      double hi = std::min(it->x_hi, R);
      out.push_back(Segment{R - hi, R - it->x_lo, it->at(hi), it->y_lo});
    }
    return MarginalFn(std::move(out));
  }

  // g(t) = f(t + c) on [0, domain_hi - c].
  MarginalFn shifted(double c) const {
    if (c < 0.0 || c >= domain_hi())
      throw std::invalid_argument("shifted: offset outside domain");
    if (c == 0.0) return *this;
    std::vector<Segment> out;
    for (const Segment& s : segs_) {
      if (s.x_hi <= c) continue;
      double lo = std::max(s.x_lo, c);
      out.push_back(Segment{lo - c, s.x_hi - c, s.at(lo), s.y_hi});
    }
    return MarginalFn(std::move(out));
  }

  // Restriction to [0, hi].
  MarginalFn restricted(double hi) const {
    if (hi <= 0.0 || hi > domain_hi() + kDomainSlack)
      throw std::invalid_argument("restricted: bad upper end");
    std::vector<Segment> out;
    for (const Segment& s : segs_) {
      if (s.x_lo >= hi) break;
      double x1 = std::min(s.x_hi, hi);
      out.push_back(Segment{s.x_lo, x1, s.y_lo, s.at(x1)});
    }
    return MarginalFn(std::move(out));
  }

  // Extends the final segment's line out to new_hi.
  MarginalFn extended(double new_hi) const {
    if (new_hi <= domain_hi()) return restricted(new_hi);
    std::vector<Segment> out = segs_;
    const Segment& last = out.back();
    double slope = last.slope();
    out.push_back(Segment{last.x_hi, new_hi, last.y_hi,
                          last.y_hi + slope * (new_hi - last.x_hi)});
    return MarginalFn(std::move(out));
  }

  MarginalFn raised(double dy) const {
    std::vector<Segment> out = segs_;
    for (Segment& s : out) {
      s.y_lo += dy;
      s.y_hi += dy;
    }
    return MarginalFn(std::move(out));
  }

  bool nondecreasing(double tol = 0.0) const {
    for (std::size_t k = 0; k < segs_.size(); ++k) {
      if (segs_[k].y_hi < segs_[k].y_lo - tol) return false;
      if (k > 0 && segs_[k].y_lo < segs_[k - 1].y_hi - tol) return false;
    }
    return true;
  }

  bool nonincreasing(double tol = 0.0) const {
    for (std::size_t k = 0; k < segs_.size(); ++k) {
      if (segs_[k].y_hi > segs_[k].y_lo + tol) return false;
      if (k > 0 && segs_[k].y_lo > segs_[k - 1].y_hi + tol) return false;
    }
    return true;
  }

  // No flat or falling piece and no downward jump.
  bool strictly_increasing() const {
    for (std::size_t k = 0; k < segs_.size(); ++k) {
      if (!(segs_[k].y_hi > segs_[k].y_lo)) return false;
      if (k > 0 && segs_[k].y_lo < segs_[k - 1].y_hi) return false;
    }
    return true;
  }

  double min_value() const {
    double m = std::numeric_limits<double>::infinity();
    for (const Segment& s : segs_) m = std::min({m, s.y_lo, s.y_hi});
    return m;
  }

  double max_value() const {
    double m = -std::numeric_limits<double>::infinity();
    for (const Segment& s : segs_) m = std::max({m, s.y_lo, s.y_hi});
    return m;
  }

  friend MarginalFn operator+(const MarginalFn& f, const MarginalFn& g) {
    double hi = std::min(f.domain_hi(), g.domain_hi());
    std::vector<double> xs;
    for (double x : f.breakpoints())
      if (x <= hi) xs.push_back(x);
    for (double x : g.breakpoints())
      if (x <= hi) xs.push_back(x);
    xs.push_back(hi);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    std::vector<Segment> out;
    for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
      double a = xs[k], b = xs[k + 1];
      out.push_back(Segment{a, b, f.right_limit(a) + g.right_limit(a),
                            f.left_limit(b) + g.left_limit(b)});
    }
    return MarginalFn(std::move(out));
  }

  static constexpr double kDomainSlack = 1e-9;

 private:
  void check_domain(double x) const {
    if (segs_.empty()) throw std::logic_error("MarginalFn: empty");
    if (x < -kDomainSlack || x > domain_hi() + kDomainSlack)
      throw std::out_of_range("MarginalFn: x outside [0, domain_hi]");
  }

  // Segment holding the right limit at x (the one starting at or covering x).
  std::size_t index_right(double x) const {
    if (x <= 0.0) return 0;
    std::size_t lo = 0, hi = segs_.size() - 1;
    while (lo < hi) {
      std::size_t mid = (lo + hi + 1) / 2;
      if (segs_[mid].x_lo <= x)
        lo = mid;
      else
        hi = mid - 1;
    }
    return lo;
  }

  std::vector<Segment> segs_;
};

// Exact trapezoid integral of f over [a, b].
inline double integrate(const MarginalFn& f, double a, double b) {
  if (a > b) throw std::invalid_argument("integrate: a > b");
  if (a < -MarginalFn::kDomainSlack || b > f.domain_hi() + MarginalFn::kDomainSlack)
    throw std::out_of_range("integrate: bounds outside domain");
  double sum = 0.0;
  for (const Segment& s : f.segments()) {
    double lo = std::max(a, s.x_lo), hi = std::min(b, s.x_hi);
    if (lo >= hi) continue;
    sum += (hi - lo) * 0.5 * (s.at(lo) + s.at(hi));
  }
  return sum;
}

// A marginal function together with its cumulative integral: B(t) = int_0^t f.
// B is continuous and piecewise quadratic; evaluation is exact.
class CostIntegral {
 public:
  CostIntegral() = default;

  explicit CostIntegral(MarginalFn f) : f_(std::move(f)) {
    cum_.reserve(f_.segments().size() + 1);
    cum_.push_back(0.0);
    double acc = 0.0;
    for (const Segment& s : f_.segments()) {
      acc += s.length() * 0.5 * (s.y_lo + s.y_hi);
      cum_.push_back(acc);
    }
  }

  const MarginalFn& marginal() const { return f_; }
  double domain_hi() const { return f_.domain_hi(); }

  double value(double t) const {
    const auto& segs = f_.segments();
    if (t <= 0.0) {
      if (t < -MarginalFn::kDomainSlack) throw std::out_of_range("CostIntegral: t < 0");
      return 0.0;
    }
    if (t >= domain_hi()) {
      if (t > domain_hi() + MarginalFn::kDomainSlack)
        throw std::out_of_range("CostIntegral: t > domain_hi");
      return cum_.back();
    }
    std::size_t lo = 0, hi = segs.size() - 1;
    while (lo < hi) {
      std::size_t mid = (lo + hi + 1) / 2;
      if (segs[mid].x_lo <= t)
        lo = mid;
      else
        hi = mid - 1;
    }
    const Segment& s = segs[lo];
    return cum_[lo] + (t - s.x_lo) * 0.5 * (s.y_lo + s.at(t));
  }

  double integrate(double a, double b) const { return value(b) - value(a); }
  double total() const { return cum_.back(); }

 private:
  MarginalFn f_;
  std::vector<double> cum_;
};

}  // namespace netpricing

#endif  // NETPRICING_MARGINAL_HPP
