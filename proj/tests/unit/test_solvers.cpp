#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "semflow/mesh_generators.hpp"
#include "semflow/solvers.hpp"

using namespace semflow;

namespace {

SparseMatrix dense_to_sparse(const Eigen::MatrixXd& a) { return a.sparseView(); }

struct Cavity {
  std::shared_ptr<const Mesh2D> mesh;
  MixedSpace space;
  CoordinateField coords;
  NavierStokesProblem prob;
  Cavity(int n, int p, double re)
      : mesh(std::make_shared<const Mesh2D>(gen_structured_square(n, true))),
        space(mesh, p),
        coords(mesh, p),
        prob(space, coords,
             BCSet()
                 .set(BoundaryTag::wall, BoundaryCondition::no_slip())
                 .set(BoundaryTag::lid, BoundaryCondition::dirichlet(Point(1, 0))),
             re) {
    prob.set_pressure_pin(std::make_pair(0, 0.0));
  }
};

struct Channel {
  std::shared_ptr<const Mesh2D> mesh;
  MixedSpace space;
  CoordinateField coords;
  NavierStokesProblem prob;
  explicit Channel(int p)
      : mesh(std::make_shared<const Mesh2D>(gen_rectangle(0, 3, -1, 1, 3, 2))),
        space(mesh, p),
        coords(mesh, p),
        prob(space, coords,
             BCSet()
                 .set(BoundaryTag::inflow,
                      BoundaryCondition::dirichlet([](const Point& x) { return Point(1 - x.y() * x.y(), 0); }))
                 .set(BoundaryTag::wall, BoundaryCondition::no_slip())
                 .set(BoundaryTag::outflow,
                      BoundaryCondition::traction([](const Point& x) { return Point(0, -2 * x.y()); })),
             1.0) {}
};

}  // namespace

TEST_CASE("identity system returns the right-hand side") {
  Eigen::MatrixXd id = Eigen::MatrixXd::Identity(10, 10);
  const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(10, -1, 2);
  for (auto kind : {LinearSolverKind::sparse_direct, LinearSolverKind::gmres}) {
    LinearSolverOptions o;
    o.kind = kind;
    CHECK((linear_solve(dense_to_sparse(id), b, o) - b).norm() <= 1e-14);
  }
}

TEST_CASE("random SPD system against a dense factorization") {
  std::mt19937 gen(42);
  std::normal_distribution<double> d;
  Eigen::MatrixXd m(50, 50);
  for (int i = 0; i < 50; ++i)
    for (int j = 0; j < 50; ++j) m(i, j) = d(gen);
  const Eigen::MatrixXd a = m * m.transpose() + 50 * Eigen::MatrixXd::Identity(50, 50);
  Eigen::VectorXd b(50);
  for (int i = 0; i < 50; ++i) b[i] = d(gen);
  const Eigen::VectorXd ref = a.ldlt().solve(b);
  for (auto kind : {LinearSolverKind::sparse_direct, LinearSolverKind::gmres}) {
    LinearSolverOptions o;
    o.kind = kind;
    o.tolerance = 1e-13;
    CHECK((linear_solve(dense_to_sparse(a), b, o) - ref).norm() <= 1e-10 * ref.norm());
  }
}

TEST_CASE("gmres agrees with the direct solver on a cavity Jacobian") {
  Cavity c(4, 3, 1.0);
  const Eigen::VectorXd x = c.prob.initial_guess();
  const SparseMatrix j = c.prob.jacobian(x);
  const Eigen::VectorXd r = c.prob.residual(x);
  const Eigen::VectorXd direct = linear_solve(j, r);
  LinearSolverOptions o;
  o.kind = LinearSolverKind::gmres;
  LinearSolver s(o);
  s.factorize(j);
  const Eigen::VectorXd it = s.solve(r);
  CHECK(s.last_residual() <= 1e-8);
  CHECK((it - direct).norm() <= 1e-7 * direct.norm());
  CHECK(s.description() == "gmres(200)+ilut(1)");
}

TEST_CASE("singular matrix is reported") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
  a(0, 0) = 1;
  CHECK_THROWS_AS(linear_solve(dense_to_sparse(a), Eigen::VectorXd::Ones(3)), SolverError);
}

TEST_CASE("Newton reproduces Poiseuille flow in at most two steps") {
  for (int p : {2, 3}) {
    Channel ch(p);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(ch.prob.size());
    const auto res = newton_solve(ch.prob, x, {});
    CHECK(res.converged);
    CHECK(res.iterations <= 2);
    double err = 0;
    for (int i = 0; i < ch.space.n_velocity_nodes(); ++i) {
      const Point& q = ch.coords.nodes()[i];
      err = std::max({err, std::abs(x[ch.space.u(i)] - (1 - q.y() * q.y())), std::abs(x[ch.space.v(i)])});
    }
    CHECK(err <= 1e-9);
    for (std::size_t k = 2; k < res.history.size(); ++k) CHECK(res.history[k].residual <= res.history[k - 1].residual);
  }
}

TEST_CASE("Newton from a converged state does nothing") {
  Channel ch(2);
  Eigen::VectorXd x = ch.prob.initial_guess();
  newton_solve(ch.prob, x, {});
  const auto again = newton_solve(ch.prob, x, {});
  CHECK(again.iterations <= 1);
  CHECK(again.final_residual <= 1e-10);
}

TEST_CASE("continuation") {
  Cavity c(3, 3, 1.0);
  SUBCASE("single stage equals plain Newton bitwise") {
    Eigen::VectorXd a = c.prob.initial_guess();
    Eigen::VectorXd b = a;
    c.prob.set_reynolds(1.0);
    newton_solve(c.prob, a, {}, "Re=1");
    continuation_solve(c.prob, b, {1.0});
    CHECK(a == b);
  }
  SUBCASE("repeated runs are bitwise identical") {
    Eigen::VectorXd a = c.prob.initial_guess();
    Eigen::VectorXd b = a;
    const auto ra = continuation_solve(c.prob, a, {1, 10, 100});
    const auto rb = continuation_solve(c.prob, b, {1, 10, 100});
    CHECK(a == b);
    CHECK(ra.total_iterations == rb.total_iterations);
    CHECK(ra.stages.size() == 3);
  }
  SUBCASE("failure names the Reynolds number") {
    Eigen::VectorXd a = c.prob.initial_guess();
    NewtonOptions o;
    o.max_iterations = 1;
    try {
      continuation_solve(c.prob, a, {1, 400}, o);
      FAIL("expected failure");
    } catch (const SolverError& e) {
      CHECK(std::string(e.what()).find("Re=") != std::string::npos);
    }
  }
  CHECK_THROWS_AS(validate_schedule({1, 1}), InputError);
  CHECK_THROWS_AS(validate_schedule({}), InputError);
  CHECK(doubling_schedule(10) == std::vector<double>{1, 2, 4, 8, 10});
  CHECK(doubling_schedule(8) == std::vector<double>{1, 2, 4, 8});
}

TEST_CASE("iteration records are line oriented") {
  std::ostringstream os;
  os << IterationRecord{"Re=100", 3, 1.5e-7, 0.25};
  CHECK(os.str() == "Re=100 3 1.500000e-07 0.2500");
}
