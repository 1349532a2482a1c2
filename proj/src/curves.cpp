#include "semflow/curves.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "semflow/reference_element.hpp"

namespace semflow {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

const poly::Rule1D& gl16() {
  static const poly::Rule1D rule = poly::gauss_legendre(16);
  return rule;
}

Point rotate(const Point& p, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * p.x() - s * p.y(), s * p.x() + c * p.y()};
}

}  // namespace

BoundaryCurve BoundaryCurve::circle(Point center, double radius) {
  if (!(radius > 0)) throw InputError("circle: radius must be positive");
  BoundaryCurve c;
  c.kind_ = Kind::circle;
  c.center_ = center;
  c.radius_ = radius;
  return c;
}

BoundaryCurve BoundaryCurve::naca0012(double chord, double alpha_deg, Point leading_edge) {
  if (!(chord > 0)) throw InputError("naca0012: chord must be positive");
  BoundaryCurve c;
  c.kind_ = Kind::naca0012;
  c.chord_ = chord;
  c.alpha_ = alpha_deg * std::numbers::pi / 180.0;
  c.center_ = leading_edge;
  c.corners_ = {0.0};
  return c;
}

BoundaryCurve BoundaryCurve::bump(double height, double length, double x_offset, double base_depth) {
  return bump(height, length, x_offset, base_depth, x_offset, x_offset + length);
}

BoundaryCurve BoundaryCurve::bump(double height, double length, double x_offset, double base_depth,
                                  double x_begin, double x_end) {
  if (!(length > 0)) throw InputError("bump: length must be positive");
  if (!(x_end > x_begin)) throw InputError("bump: empty x range");
  BoundaryCurve c;
  c.kind_ = Kind::bump;
  c.height_ = height;
  c.length_ = length;
  c.x_offset_ = x_offset;
  c.base_ = base_depth;
  c.x_begin_ = x_begin;
  c.x_end_ = x_end;
  for (double x : {x_offset, x_offset + length}) {
    const double t = (x - x_begin) / (x_end - x_begin);
    if (t > 0 && t < 1) c.corners_.push_back(t);
  }
  return c;
}

BoundaryCurve BoundaryCurve::polyline(std::vector<Point> points, bool closed) {
  if (points.size() < 2) throw InputError("polyline: need at least two points");
  BoundaryCurve c;
  c.kind_ = Kind::polyline;
  c.closed_ = closed;
  c.points_ = std::move(points);
  if (closed) c.points_.push_back(c.points_.front());
  c.cumulative_.assign(c.points_.size(), 0.0);
  for (std::size_t i = 1; i < c.points_.size(); ++i) {
    c.cumulative_[i] = c.cumulative_[i - 1] + (c.points_[i] - c.points_[i - 1]).norm();
  }
  const double total = c.cumulative_.back();
  if (!(total > 0)) throw InputError("polyline: zero length");
  for (auto& s : c.cumulative_) s /= total;
  for (std::size_t i = closed ? 0 : 1; i + 1 < c.points_.size(); ++i) c.corners_.push_back(c.cumulative_[i]);
  return c;
}

double BoundaryCurve::bump_height(double x) const {
  if (kind_ != Kind::bump) throw InputError("bump_height: not a bump curve");
  const double xl = x - x_offset_;
  if (xl <= 0 || xl >= length_) return base_;
  return base_ + 6.75 * height_ / (length_ * length_ * length_) * xl * (xl - length_) * (xl - length_);
}

Point BoundaryCurve::eval(double t) const {
  if (!(t >= 0.0 && t <= 1.0)) throw InputError("curve parameter " + std::to_string(t) + " outside [0, 1]");
  return eval_any(t);
}

Point BoundaryCurve::derivative(double t) const {
  if (!(t >= 0.0 && t <= 1.0)) throw InputError("curve parameter " + std::to_string(t) + " outside [0, 1]");
  return deriv_any(t);
}

Point BoundaryCurve::eval_any(double t) const {
  if (closed()) {
    t -= std::floor(t);
  } else {
    t = std::clamp(t, 0.0, 1.0);
  }
  switch (kind_) {
    case Kind::circle: {
      const double a = kTwoPi * t;
      return center_ + radius_ * Point(std::cos(a), std::sin(a));
    }
    case Kind::naca0012: {
      const double c = std::cos(std::numbers::pi * t);
      const double x = c * c;
      const double tail = -0.1260 * x - 0.3516 * x * x + 0.2843 * x * x * x - 0.1036 * x * x * x * x;
      const double y = 0.6 * (0.2969 * c + std::copysign(1.0, c) * tail);
      return center_ + rotate(chord_ * Point(x, y), -alpha_);
    }
    case Kind::bump: {
      const double x = x_begin_ + t * (x_end_ - x_begin_);
      return {x, bump_height(x)};
    }
    case Kind::polyline: {
      const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), t);
      const std::size_t i = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - cumulative_.begin(), 1),
                                                  cumulative_.size() - 1);
      const double w = (t - cumulative_[i - 1]) / (cumulative_[i] - cumulative_[i - 1]);
      return (1.0 - w) * points_[i - 1] + w * points_[i];
    }
  }
  return {};
}

Point BoundaryCurve::deriv_any(double t) const {
  if (closed()) {
    t -= std::floor(t);
  } else {
    t = std::clamp(t, 0.0, 1.0);
  }
  switch (kind_) {
    case Kind::circle: {
      const double a = kTwoPi * t;
      return kTwoPi * radius_ * Point(-std::sin(a), std::cos(a));
    }
    case Kind::naca0012: {
      const double pi = std::numbers::pi;
      const double c = std::cos(pi * t);
      const double dc = -pi * std::sin(pi * t);
      const double x = c * c;
      const double dx = 2.0 * c * dc;
      const double dtail = -0.1260 - 0.7032 * x + 0.8529 * x * x - 0.4144 * x * x * x;
      const double dy = 0.6 * (0.2969 * dc + std::copysign(1.0, c) * dtail * dx);
      return rotate(chord_ * Point(dx, dy), -alpha_);
    }
    case Kind::bump: {
      const double w = x_end_ - x_begin_;
      const double xl = x_begin_ + t * w - x_offset_;
      double dydx = 0.0;
      if (xl > 0 && xl < length_) {
        dydx = 6.75 * height_ / (length_ * length_ * length_) * (xl - length_) * (3.0 * xl - length_);
      }
      return {w, w * dydx};
    }
    case Kind::polyline: {
      const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), t);
      const std::size_t i = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - cumulative_.begin(), 1),
                                                  cumulative_.size() - 1);
      return (points_[i] - points_[i - 1]) / (cumulative_[i] - cumulative_[i - 1]);
    }
  }
  return {};
}

double BoundaryCurve::arc_length_piece(double a, double b) const {
  const auto& rule = gl16();
  const int n = std::max(1, static_cast<int>(std::ceil(std::abs(b - a) * 64.0)));
  const double h = (b - a) / n;
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    const double lo = a + k * h;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double t = lo + 0.5 * h * (rule.points[q] + 1.0);
      sum += rule.weights[q] * deriv_any(t).norm();
    }
  }
  return 0.5 * h * sum;
}

double BoundaryCurve::arc_length(double t0, double t1) const {
  if (t1 < t0) return -arc_length(t1, t0);
  if (!closed()) {
    t0 = std::clamp(t0, 0.0, 1.0);
    t1 = std::clamp(t1, 0.0, 1.0);
  }
  // Split at every break point so each piece is smooth.
  std::vector<double> breaks;
  std::vector<double> base = corners_;
  if (kind_ == Kind::naca0012) base.push_back(0.5);
  for (double c : base) {
    for (double k = std::floor(t0) - 1; k <= std::ceil(t1) + 1; k += 1.0) {
      const double b = c + k;
      if (b > t0 && b < t1) breaks.push_back(b);
    }
  }
  std::sort(breaks.begin(), breaks.end());
  double sum = 0.0, lo = t0;
  for (double b : breaks) {
    sum += arc_length_piece(lo, b);
    lo = b;
  }
  return sum + arc_length_piece(lo, t1);
}

double BoundaryCurve::param_at_arc_length(double t0, double s) const {
  if (s == 0.0) return t0;
  double lo, hi;
  if (closed()) {
    lo = s > 0 ? t0 : t0 - 1.0;
    hi = s > 0 ? t0 + 1.0 : t0;
  } else {
    lo = s > 0 ? t0 : 0.0;
    hi = s > 0 ? 1.0 : t0;
  }
  auto f = [&](double t) { return arc_length(t0, t) - s; };
  if (f(lo) > 0 || f(hi) < 0) throw InputError("param_at_arc_length: arc length exceeds the curve");
  const double total = std::abs(arc_length(lo, hi));
  double t = t0 + s / std::max(total, 1e-300) * (hi - lo);
  t = std::clamp(t, lo, hi);
  for (int it = 0; it < 100; ++it) {
    const double r = f(t);
    if (r == 0.0) return t;
    if (r > 0) {
      hi = t;
    } else {
      lo = t;
    }
    const double speed = deriv_any(t).norm();
    double next = speed > 0 ? t - r / speed : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) <= 1e-16 * std::max(1.0, std::abs(t))) return next;
    t = next;
    if (hi - lo < 1e-16) break;
  }
  return t;
}

double BoundaryCurve::project(const Point& p, double* distance) const {
  double best_t = 0.0;
  if (kind_ == Kind::circle) {
    const Point d = p - center_;
    double a = std::atan2(d.y(), d.x()) / kTwoPi;
    if (a < 0) a += 1.0;
    best_t = a >= 1.0 ? 0.0 : a;
  } else if (kind_ == Kind::polyline) {
    double best = 1e300;
    for (std::size_t i = 1; i < points_.size(); ++i) {
      const Point seg = points_[i] - points_[i - 1];
      const double w = std::clamp((p - points_[i - 1]).dot(seg) / seg.squaredNorm(), 0.0, 1.0);
      const double d = (points_[i - 1] + w * seg - p).norm();
      if (d < best) {
        best = d;
        best_t = cumulative_[i - 1] + w * (cumulative_[i] - cumulative_[i - 1]);
      }
    }
  } else {
    constexpr int kSamples = 4096;
    double best = 1e300;
    auto consider = [&](double t) {
      const double d = (eval_any(t) - p).squaredNorm();
      if (d < best) {
        best = d;
        best_t = t;
      }
    };
    for (int i = 0; i <= kSamples; ++i) consider(static_cast<double>(i) / kSamples);
    for (double c : corners_) consider(c);
    const double h = 1.0 / kSamples;
    double lo = best_t - h, hi = best_t + h;
    if (!closed()) {
      lo = std::max(lo, 0.0);
      hi = std::min(hi, 1.0);
    }
    double t = best_t;
    for (int it = 0; it < 50; ++it) {
      const Point r = eval_any(t) - p;
      const Point d1 = deriv_any(t);
      const double eps = 1e-7;
      const Point d2 = (deriv_any(t + eps) - deriv_any(t - eps)) / (2 * eps);
      const double g = r.dot(d1);
      const double gp = d1.squaredNorm() + r.dot(d2);
      if (!(gp > 0)) break;
      double next = std::clamp(t - g / gp, lo, hi);
      if ((eval_any(next) - p).squaredNorm() > (eval_any(t) - p).squaredNorm()) break;
      const bool done = std::abs(next - t) < 1e-16;
      t = next;
      if (done) break;
    }
    consider(t);
    if (closed()) best_t -= std::floor(best_t);
  }
  if (distance) *distance = (eval_any(best_t) - p).norm();
  return best_t;
}

}  // namespace semflow
