#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "semflow/assembly.hpp"
#include "semflow/mesh_generators.hpp"

using namespace semflow;

namespace {

struct Setup {
  std::shared_ptr<const Mesh2D> mesh;
  std::unique_ptr<MixedSpace> space;
  std::unique_ptr<CoordinateField> coords;
};

Setup make(Mesh2D m, int p) {
  Setup s;
  s.mesh = std::make_shared<const Mesh2D>(std::move(m));
  s.space = std::make_unique<MixedSpace>(s.mesh, p);
  s.coords = std::make_unique<CoordinateField>(s.mesh, p);
  return s;
}

// Channel [0, 3] x [-1, 1] with u = 1 - y^2, p = -2 x / Re + 2 * 3 / Re.
BCSet poiseuille_bcs(double re) {
  BCSet bcs;
  bcs.set(BoundaryTag::inflow, BoundaryCondition::dirichlet([](const Point& x) { return Point(1 - x.y() * x.y(), 0); }));
  bcs.set(BoundaryTag::wall, BoundaryCondition::no_slip());
  bcs.set(BoundaryTag::outflow,
          BoundaryCondition::traction([re](const Point& x) { return Point(0, -2 * x.y() / re); }));
  return bcs;
}

Eigen::VectorXd random_state(int n, unsigned seed, double scale = 1.0) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> d(-scale, scale);
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x[i] = d(gen);
  return x;
}

double fd_check(NavierStokesProblem& prob, const Eigen::VectorXd& x, unsigned seed) {
  const SparseMatrix j = prob.jacobian(x);
  double worst = 0;
  for (unsigned k = 0; k < 5; ++k) {
    Eigen::VectorXd d = random_state(prob.size(), seed + k);
    d /= d.norm();
    const double h = 1e-7 * std::max(1.0, x.norm());
    const Eigen::VectorXd fd = (prob.residual(x + h * d) - prob.residual(x - h * d)) / (2 * h);
    const Eigen::VectorXd jd = j * d;
    worst = std::max(worst, (fd - jd).norm() / jd.norm());
  }
  return worst;
}

}  // namespace

TEST_CASE("mixed space sizes and ordering") {
  auto s = make(gen_rectangle(0, 1, 0, 1, 2, 2), 3);
  const auto& sp = *s.space;
  CHECK(sp.pressure_order() == 2);
  CHECK(sp.n_velocity_nodes() == 7 * 7);
  CHECK(sp.n_pressure_nodes() == 5 * 5);
  CHECK(sp.n_dofs() == 2 * 49 + 25);
  CHECK(sp.v(0) == 49);
  CHECK(sp.p(0) == 98);
  CHECK_THROWS_AS(MixedSpace(s.mesh, 1), InputError);
}

TEST_CASE("Poiseuille interpolant is a discrete solution") {
  for (int p : {2, 3, 4}) {
    const double re = 1.0;
    auto s = make(gen_rectangle(0, 3, -1, 1, 3, 2), p);
    NavierStokesProblem prob(*s.space, *s.coords, poiseuille_bcs(re), re);
    Eigen::VectorXd x = interpolate_velocity(*s.space, *s.coords, [](const Point& q) { return Point(1 - q.y() * q.y(), 0); });
    interpolate_pressure(*s.space, *s.coords, [re](const Point& q) { return 2 * (3 - q.x()) / re; }, x);
    CHECK(prob.residual(x).lpNorm<Eigen::Infinity>() < 1e-10);
  }
}

TEST_CASE("zero state with homogeneous data has zero residual") {
  auto s = make(gen_structured_square(3, false), 3);
  BCSet bcs;
  bcs.set(BoundaryTag::wall, BoundaryCondition::no_slip());
  NavierStokesProblem prob(*s.space, *s.coords, bcs, 10.0);
  prob.set_pressure_pin(std::make_pair(0, 0.0));
  CHECK(prob.residual(Eigen::VectorXd::Zero(prob.size())).norm() == 0.0);
}

TEST_CASE("Jacobian matches finite differences") {
  SUBCASE("cavity") {
    auto s = make(gen_structured_square(3, true), 3);
    BCSet bcs;
    bcs.set(BoundaryTag::wall, BoundaryCondition::no_slip());
    bcs.set(BoundaryTag::lid, BoundaryCondition::dirichlet(Point(1, 0)));
    NavierStokesProblem prob(*s.space, *s.coords, bcs, 100.0);
    prob.set_pressure_pin(std::make_pair(0, 0.0));
    CHECK(fd_check(prob, random_state(prob.size(), 7), 100) < 1e-6);
  }
  SUBCASE("curved cylinder channel with free slip") {
    auto s = make(gen_body_channel({}), 4);
    blend_to_curve(*s.coords, BoundaryCurve::circle({0, 0}, 0.5), BoundaryTag::body);
    BCSet bcs;
    bcs.set(BoundaryTag::inflow, BoundaryCondition::dirichlet(Point(1, 0)));
    bcs.set(BoundaryTag::wall, BoundaryCondition::free_slip());
    bcs.set(BoundaryTag::body, BoundaryCondition::no_slip());
    bcs.set(BoundaryTag::outflow, BoundaryCondition::traction_free());
    NavierStokesProblem prob(*s.space, *s.coords, bcs, 15.0);
    CHECK(fd_check(prob, random_state(prob.size(), 3), 200) < 1e-6);
  }
  SUBCASE("bump channel with a loaded free surface") {
    BumpChannelSpec spec;
    spec.dx = 0.5;
    spec.ny = 3;
    auto s = make(gen_bump_channel(spec), 3);
    blend_to_curve(*s.coords, bump_bed_curve(spec), BoundaryTag::bed);
    BCSet bcs;
    bcs.set(BoundaryTag::inflow, BoundaryCondition::dirichlet(Point(1, 0)));
    bcs.set(BoundaryTag::bed, BoundaryCondition::free_slip());
    bcs.set(BoundaryTag::free_surface, BoundaryCondition::free_surface());
    bcs.set(BoundaryTag::outflow, BoundaryCondition::traction_free());
    NavierStokesProblem prob(*s.space, *s.coords, bcs, 100.0, 0.43);
    std::vector<double> eta(prob.surface_nodes().size());
    for (std::size_t i = 0; i < eta.size(); ++i) eta[i] = 0.01 * std::sin(0.3 * static_cast<double>(i));
    prob.set_surface_elevation(eta);
    CHECK(fd_check(prob, random_state(prob.size(), 5), 300) < 1e-6);
  }
}

TEST_CASE("surface load scales with 1/Fr^2") {
  BumpChannelSpec spec;
  spec.dx = 1.0;
  spec.ny = 2;
  auto s = make(gen_bump_channel(spec), 3);
  BCSet bcs;
  bcs.set(BoundaryTag::inflow, BoundaryCondition::dirichlet(Point(1, 0)));
  bcs.set(BoundaryTag::bed, BoundaryCondition::free_slip());
  bcs.set(BoundaryTag::free_surface, BoundaryCondition::free_surface());
  bcs.set(BoundaryTag::outflow, BoundaryCondition::traction_free());
  NavierStokesProblem prob(*s.space, *s.coords, bcs, 100.0, 0.43);
  const Eigen::VectorXd x = random_state(prob.size(), 11);
  const Eigen::VectorXd base = prob.raw_residual(x);
  std::vector<double> eta(prob.surface_nodes().size());
  for (std::size_t i = 0; i < eta.size(); ++i) eta[i] = 0.02 * std::cos(0.2 * static_cast<double>(i));
  prob.set_surface_elevation(eta);
  const Eigen::VectorXd load1 = prob.raw_residual(x) - base;
  prob.set_froude(0.86);
  const Eigen::VectorXd load2 = prob.raw_residual(x) - base;
  CHECK(load1.norm() > 0);
  CHECK((load2 - 0.25 * load1).norm() <= 1e-12 * load1.norm());
  // Constant eta = 1 integrates to the length-weighted normal: sum over u rows is the x-projection.
  prob.set_froude(1.0);
  prob.set_surface_elevation(std::vector<double>(eta.size(), 1.0));
  const Eigen::VectorXd unit = prob.raw_residual(x) - base;
  const int nv = s.space->n_velocity_nodes();
  CHECK(unit.segment(nv, nv).sum() == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(std::abs(unit.head(nv).sum()) < 1e-12);
  CHECK_THROWS_AS(prob.set_surface_elevation({1.0}), InputError);
}

TEST_CASE("free-slip constraint is objective under rotation") {
  const double theta = 0.7;
  const Eigen::Matrix2d q = Eigen::Rotation2Dd(theta).toRotationMatrix();
  const Mesh2D base = gen_bump_channel([] {
    BumpChannelSpec spec;
    spec.dx = 1.0;
    spec.ny = 2;
    spec.top = BoundaryTag::wall;
    return spec;
  }());
  std::vector<Point> rotated = base.vertices();
  for (auto& v : rotated) v = q * v;
  auto flow = [](const Point& x) { return Point(std::cos(x.y()) + 0.3 * x.x(), std::sin(x.x()) * x.y()); };

  double norms[2];
  for (int k = 0; k < 2; ++k) {
    auto s = make(k == 0 ? base : Mesh2D(rotated, base.cells(), base.boundary_edges()), 3);
    const Eigen::Matrix2d rot = k == 0 ? Eigen::Matrix2d::Identity() : q;
    BCSet bcs;
    bcs.set(BoundaryTag::inflow, BoundaryCondition::dirichlet([rot](const Point&) { return Point(rot * Point(1, 0)); }));
    bcs.set(BoundaryTag::bed, BoundaryCondition::free_slip());
    bcs.set(BoundaryTag::wall, BoundaryCondition::free_slip());
    bcs.set(BoundaryTag::outflow, BoundaryCondition::traction_free());
    NavierStokesProblem prob(*s.space, *s.coords, bcs, 50.0);
    Eigen::VectorXd x = interpolate_velocity(*s.space, *s.coords, [&](const Point& p) {
      return Point(rot * flow(rot.transpose() * p));
    });
    interpolate_pressure(*s.space, *s.coords, [&](const Point& p) { return (rot.transpose() * p).x(); }, x);
    norms[k] = prob.residual(x).norm();
    if (k == 1) {
      for (const auto& fs : prob.free_slip()) CHECK(std::abs(fs.normal.norm() - 1) < 1e-14);
    }
  }
  CHECK(std::abs(norms[0] - norms[1]) <= 1e-10 * norms[0]);
}

TEST_CASE("Dirichlet priority and conflicts") {
  auto s = make(gen_structured_square(2, true), 2);
  BCSet bcs;
  bcs.set(BoundaryTag::wall, BoundaryCondition::no_slip());
  bcs.set(BoundaryTag::lid, BoundaryCondition::dirichlet(Point(1, 0)));
  NavierStokesProblem prob(*s.space, *s.coords, bcs, 1.0);
  const Eigen::VectorXd x = prob.initial_guess();
  for (int i = 0; i < s.space->n_velocity_nodes(); ++i) {
    const Point& p = s.coords->nodes()[i];
    if (std::abs(p.y() - 1) < 1e-14) {
      const bool corner = std::abs(p.x()) < 1e-14 || std::abs(p.x() - 1) < 1e-14;
      CHECK(x[s.space->u(i)] == (corner ? 0.0 : 1.0));
    }
  }

  BCSet clash;
  clash.set(BoundaryTag::wall, BoundaryCondition::dirichlet(Point(0, 0)));
  clash.set(BoundaryTag::lid, BoundaryCondition::dirichlet(Point(1, 0)));
  CHECK_THROWS_AS(NavierStokesProblem(*s.space, *s.coords, clash, 1.0), InputError);

  BCSet missing;
  missing.set(BoundaryTag::wall, BoundaryCondition::no_slip());
  CHECK_THROWS_AS(NavierStokesProblem(*s.space, *s.coords, missing, 1.0), InputError);
}
