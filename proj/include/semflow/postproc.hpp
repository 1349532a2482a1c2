#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "semflow/assembly.hpp"

namespace semflow {

struct ForceResult {
  double fx = 0.0, fy = 0.0;  // force exerted by the fluid on the body
  double cd = 0.0, cl = 0.0;  // normalized by 0.5 U^2 L
  double u_ref = 1.0, length = 1.0;
};

/// Integrates sigma = -p_d I + (1/Re)(grad u + grad u^T) over the `tag`
/// facets. The reported force is the one acting on the body, so drag is
/// positive along +x and lift along +y.
ForceResult body_forces(const NavierStokesProblem& problem, const Eigen::VectorXd& x, BoundaryTag tag,
                        double length = 1.0, double u_ref = 1.0);

/// Arc length of the `tag` facets of the (curvilinear) coordinate field.
double boundary_length(const CoordinateField& field, BoundaryTag tag);
/// Sum of w det J over the domain.
double enclosed_area(const CoordinateField& field);

/// Volume flux int u.n over the `tag` facets (n outward from the fluid).
double boundary_flux(const NavierStokesProblem& problem, const Eigen::VectorXd& x, BoundaryTag tag);

/// L2 norm of the velocity error against `exact`, with the volume quadrature.
double velocity_l2_error(const NavierStokesProblem& problem, const Eigen::VectorXd& x,
                         const std::function<Point(const Point&)>& exact);

/// Locates points in an isoparametric mesh: walking from a start cell, then a
/// global search; each candidate is inverted by Newton (tol 1e-12, 20 steps).
class PointLocator {
 public:
  explicit PointLocator(const CoordinateField& field);
  struct Hit {
    bool inside = false;
    int cell = -1;
    Point rs = Point::Zero();
  };
  Hit locate(const Point& p, int start_cell = -1) const;
  /// Newton inversion of the map of `cell`; returns false when it does not converge.
  bool invert(int cell, const Point& p, Point& rs) const;

 private:
  const CoordinateField* field_;
  std::vector<Eigen::Vector4d> boxes_;  // xmin, xmax, ymin, ymax
};

struct Sample {
  Point x = Point::Zero();
  bool inside = false;
  double u = 0.0, v = 0.0, p = 0.0;
};

/// Evaluates the discrete fields at arbitrary points; outside points are flagged (values NaN).
std::vector<Sample> sample_points(const NavierStokesProblem& problem, const Eigen::VectorXd& x,
                                  const std::vector<Point>& points);
/// `n` equally spaced points from a to b inclusive.
std::vector<Sample> sample_line(const NavierStokesProblem& problem, const Eigen::VectorXd& x, const Point& a,
                                const Point& b, int n);

void write_samples_csv(std::ostream& os, const std::vector<Sample>& samples);

struct SurfaceProfile {
  std::vector<double> x;
  std::vector<double> eta;
};

void write_profile_csv(std::ostream& os, const SurfaceProfile& profile);
SurfaceProfile read_profile_csv(std::istream& is);
void write_profile_csv(const std::string& path, const SurfaceProfile& profile);
SurfaceProfile read_profile_csv(const std::string& path);

/// Linear interpolation of a profile at x (clamped to its ends).
double interpolate_profile(const SurfaceProfile& profile, double x);
/// Piecewise degree-`order` Lagrange interpolation, nodes grouped into
/// consecutive elements of order + 1 points sharing their end nodes.
double interpolate_profile(const SurfaceProfile& profile, double x, int order);

}  // namespace semflow
