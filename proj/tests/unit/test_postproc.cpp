#include "doctest.h"

#include <cmath>
#include <numbers>
#include <sstream>

#include "semflow/mesh_generators.hpp"
#include "semflow/postproc.hpp"

using namespace semflow;

namespace {

constexpr double kPi = std::numbers::pi;

struct Cyl {
  std::shared_ptr<const Mesh2D> mesh;
  MixedSpace space;
  CoordinateField coords;
  Cyl(int refinements, int p) : mesh(make_mesh(refinements)), space(mesh, p), coords(mesh, p) {
    blend_to_curve(coords, BoundaryCurve::circle({0, 0}, 0.5), BoundaryTag::body);
  }
  static std::shared_ptr<const Mesh2D> make_mesh(int k) {
    Mesh2D m = gen_body_channel({});
    for (int i = 0; i < k; ++i) m = snap_to_curve(refine_uniform(m), BoundaryCurve::circle({0, 0}, 0.5), BoundaryTag::body);
    return std::make_shared<const Mesh2D>(std::move(m));
  }
  BCSet bcs() const {
    BCSet b;
    b.set(BoundaryTag::inflow, BoundaryCondition::dirichlet(Point(1, 0)))
        .set(BoundaryTag::wall, BoundaryCondition::free_slip())
        .set(BoundaryTag::body, BoundaryCondition::no_slip())
        .set(BoundaryTag::outflow, BoundaryCondition::traction_free());
    return b;
  }
};

}  // namespace

TEST_CASE("square length and area are exact") {
  auto mesh = std::make_shared<const Mesh2D>(gen_rectangle(0, 2, 0, 3, 3, 4));
  CoordinateField f(mesh, 4);
  CHECK(std::abs(enclosed_area(f) - 6) <= 1e-14 * 6);
  CHECK(std::abs(boundary_length(f, BoundaryTag::wall) - 4) <= 1e-14 * 4);
  CHECK(std::abs(boundary_length(f, BoundaryTag::inflow) - 3) <= 1e-14 * 3);
  CHECK_THROWS_AS(boundary_length(f, BoundaryTag::body), InputError);
}

TEST_CASE("cylinder perimeter at P=8 on Mesh 1") {
  Cyl c(1, 8);
  CHECK(std::abs(boundary_length(c.coords, BoundaryTag::body) - kPi) < 1e-11);
  CoordinateField affine(c.mesh, 8);
  const double defect = 16 * std::sin(kPi / 16);  // inscribed 16-gon of diameter 1
  CHECK(boundary_length(affine, BoundaryTag::body) == doctest::Approx(defect).epsilon(1e-13));
}

TEST_CASE("uniform pressure gives zero force on a closed body") {
  Cyl c(0, 4);
  NavierStokesProblem prob(c.space, c.coords, c.bcs(), 15.0);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(prob.size());
  interpolate_pressure(c.space, c.coords, [](const Point&) { return 2.5; }, x);
  const auto f = body_forces(prob, x, BoundaryTag::body);
  CHECK(std::abs(f.fx) < 1e-12);
  CHECK(std::abs(f.fy) < 1e-12);
  // Linear pressure p = -x pushes the body towards -x with force = area (pi/4).
  Cyl fine(1, 8);
  NavierStokesProblem fprob(fine.space, fine.coords, fine.bcs(), 15.0);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(fprob.size());
  interpolate_pressure(fine.space, fine.coords, [](const Point& q) { return q.x(); }, y);
  const auto g = body_forces(fprob, y, BoundaryTag::body, 2.0);
  CHECK(std::abs(g.fx + kPi / 4) < 1e-10);
  CHECK(std::abs(g.fy) < 1e-12);
  CHECK(g.cd == doctest::Approx(g.fx / (0.5 * 2.0)));
  CHECK(body_forces(fprob, y, BoundaryTag::body).fx == g.fx);
}

TEST_CASE("viscous force from a rigid rotation is zero, shear is not") {
  Cyl c(0, 4);
  NavierStokesProblem prob(c.space, c.coords, c.bcs(), 2.0);
  Eigen::VectorXd x = interpolate_velocity(c.space, c.coords, [](const Point& q) { return Point(-q.y(), q.x()); });
  const auto f = body_forces(prob, x, BoundaryTag::body);
  CHECK(std::abs(f.fx) < 1e-12);
  CHECK(std::abs(f.fy) < 1e-12);
}

TEST_CASE("sampling reproduces polynomials and flags outside points") {
  Cyl c(0, 3);
  NavierStokesProblem prob(c.space, c.coords, c.bcs(), 1.0);
  Eigen::VectorXd x = interpolate_velocity(c.space, c.coords, [](const Point& q) { return Point(q.x() + 2 * q.y(), q.x() * q.y()); });
  interpolate_pressure(c.space, c.coords, [](const Point& q) { return 1 - q.x() + q.y() * q.y(); }, x);
  std::vector<Point> pts = {{-1.7, -1.3}, {0.6, 0.1}, {3.9, 1.9}, {0.0, 0.0}, {5.0, 0.0}, {-1, -1}, {0.36, 0.36}};
  const auto s = sample_points(prob, x, pts);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Point& q = pts[i];
    const bool expect_inside = q.norm() > 0.5 && std::abs(q.x()) < 4.5;
    CHECK(s[i].inside == expect_inside);
    if (!expect_inside) {
      CHECK(std::isnan(s[i].u));
      continue;
    }
    CHECK(std::abs(s[i].u - (q.x() + 2 * q.y())) <= 1e-12);
    CHECK(std::abs(s[i].v - q.x() * q.y()) <= 1e-12);
    CHECK(std::abs(s[i].p - (1 - q.x() + q.y() * q.y())) <= 1e-12);
  }
  const auto line = sample_line(prob, x, {-2, 1}, {4, 1}, 13);
  CHECK(line.size() == 13);
  for (const auto& smp : line) CHECK(smp.inside);
  std::ostringstream os;
  write_samples_csv(os, line);
  CHECK(os.str().rfind("x,y,u,v,p_d\n", 0) == 0);
}

TEST_CASE("surface profile CSV round-trips bitwise") {
  SurfaceProfile p;
  for (int i = 0; i < 50; ++i) {
    p.x.push_back(-8 + 0.4 * i + 1e-17 * i);
    p.eta.push_back(std::sin(0.1 * i) / 3.0);
  }
  std::stringstream ss;
  write_profile_csv(ss, p);
  const auto q = read_profile_csv(ss);
  CHECK(q.x == p.x);
  CHECK(q.eta == p.eta);
  std::istringstream bad("x,eta\n1,2\n3;4\n");
  CHECK_THROWS_AS(read_profile_csv(bad), InputError);
  std::istringstream header("x,y\n");
  CHECK_THROWS_AS(read_profile_csv(header), InputError);
  CHECK(interpolate_profile(q, -100) == q.eta.front());
}

TEST_CASE("piecewise high-order profile interpolation reproduces polynomials") {
  SurfaceProfile p;
  const auto gll = poly::gll_points(4);
  for (int e = 0; e < 5; ++e)
    for (int j = (e == 0 ? 0 : 1); j <= 4; ++j) {
      const double x = -2 + e + 0.5 * (gll[j] + 1);
      p.x.push_back(x);
      p.eta.push_back(0.1 * x * x * x * x - x * x + 0.3);
    }
  for (double x : {-1.99, -0.4, 0.0, 1.37, 2.5, 2.999}) {
    const double exact = 0.1 * x * x * x * x - x * x + 0.3;
    CHECK(std::abs(interpolate_profile(p, x, 4) - exact) < 1e-12);
  }
  CHECK_THROWS_AS(interpolate_profile(p, 0.0, 3), InputError);
  CHECK(interpolate_profile(p, 0.5, 1) == doctest::Approx(interpolate_profile(p, 0.5)));
}

TEST_CASE("boundary flux of a uniform stream balances") {
  auto mesh = std::make_shared<const Mesh2D>(gen_rectangle(0, 3, -1, 1, 3, 2));
  MixedSpace space(mesh, 2);
  CoordinateField coords(mesh, 2);
  BCSet bcs;
  bcs.set(BoundaryTag::inflow, BoundaryCondition::dirichlet(Point(1, 0)))
      .set(BoundaryTag::wall, BoundaryCondition::free_slip())
      .set(BoundaryTag::outflow, BoundaryCondition::traction_free());
  NavierStokesProblem prob(space, coords, bcs, 1.0);
  const Eigen::VectorXd x = interpolate_velocity(space, coords, [](const Point&) { return Point(1, 0); });
  CHECK(boundary_flux(prob, x, BoundaryTag::inflow) == doctest::Approx(-2.0));
  CHECK(boundary_flux(prob, x, BoundaryTag::outflow) == doctest::Approx(2.0));
  CHECK(velocity_l2_error(prob, x, [](const Point&) { return Point(1, 0); }) < 1e-14);
}
