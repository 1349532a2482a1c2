#pragma once

#include <vector>

#include "semflow/common.hpp"

namespace semflow {

/// Parametric boundary curve t in [0, 1] -> (x, y).
///
/// circle:   counter-clockwise from angle 0, t = angle / 2pi.
/// naca0012: closed trailing edge; t = 0 at the trailing edge, over the upper
///           surface to the leading edge at t = 1/2, back along the lower
///           surface. Rotated about the leading edge by the angle of attack.
/// bump:     graph y = base + (27/4)(H/L^3) xl (xl - L)^2 for local
///           xl = x - x_offset in [0, L], flat at y = base elsewhere; the
///           parameter spans [x_begin, x_end] linearly in x.
/// polyline: piecewise linear, parameterized by cumulative length.
class BoundaryCurve {
 public:
  enum class Kind { circle, naca0012, bump, polyline };

  static BoundaryCurve circle(Point center, double radius);
  static BoundaryCurve naca0012(double chord, double alpha_deg, Point leading_edge);
  static BoundaryCurve bump(double height, double length, double x_offset, double base_depth);
  static BoundaryCurve bump(double height, double length, double x_offset, double base_depth,
                            double x_begin, double x_end);
  static BoundaryCurve polyline(std::vector<Point> points, bool closed = false);

  Kind kind() const { return kind_; }
  bool closed() const { return kind_ == Kind::circle || kind_ == Kind::naca0012 || closed_; }

  /// Point on the curve; throws InputError for t outside [0, 1].
  Point eval(double t) const;
  Point derivative(double t) const;

  /// Parameters where the curve is only C0 (sorted, within [0, 1)).
  const std::vector<double>& corners() const { return corners_; }

  /// Parameter of the nearest curve point; `distance` receives the gap.
  double project(const Point& p, double* distance = nullptr) const;

  /// Signed arc length between t0 and t1. On closed curves t may leave [0, 1]
  /// and wraps periodically.
  double arc_length(double t0, double t1) const;

  /// Parameter reached after arc length s from t0 (s may be negative).
  double param_at_arc_length(double t0, double s) const;

  /// Height of the bump profile at world x (bump curves only).
  double bump_height(double x) const;

 private:
  Point eval_any(double t) const;
  Point deriv_any(double t) const;
  double arc_length_piece(double a, double b) const;

  Kind kind_ = Kind::polyline;
  Point center_{0, 0};
  double radius_ = 0, chord_ = 1, alpha_ = 0;
  double height_ = 0, length_ = 1, x_offset_ = 0, base_ = 0, x_begin_ = 0, x_end_ = 1;
  std::vector<Point> points_;
  std::vector<double> cumulative_;
  bool closed_ = false;
  std::vector<double> corners_;
};

}  // namespace semflow
