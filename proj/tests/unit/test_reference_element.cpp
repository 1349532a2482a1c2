#include "doctest.h"

#include <cmath>
#include <random>

#include "semflow/reference_element.hpp"

using namespace semflow;

namespace {

// Legendre P_n and P_n' by the three-term recurrence.
std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0, p1 = x, d0 = 0.0, d1 = 1.0;
  if (n == 0) return {1.0, 0.0};
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    const double d2 = d0 + (2.0 * k - 1.0) * p1;
    p0 = p1;
    p1 = p2;
    d0 = d1;
    d1 = d2;
  }
  return {p1, d1};
}

// Interior GLL points are roots of P_n'; Newton from Chebyshev-Gauss-Lobatto guesses.
std::vector<double> gll_oracle(int n) {
  std::vector<double> x(n + 1);
  x[0] = -1.0;
  x[n] = 1.0;
  for (int j = 1; j < n; ++j) {
    double t = -std::cos(M_PI * j / n);
    for (int it = 0; it < 100; ++it) {
      const double h = 1e-6;
      const double f = legendre(n, t).second;
      const double fp = (legendre(n, t + h).second - legendre(n, t - h).second) / (2 * h);
      const double dt = f / fp;
      t -= dt;
      if (std::abs(dt) < 1e-16) break;
    }
    x[j] = t;
  }
  return x;
}

double factorial(int n) { return std::tgamma(n + 1.0); }

double monomial_integral(int a, int b) { return factorial(a) * factorial(b) / factorial(a + b + 2); }

Eigen::VectorXd sample(const std::vector<Point>& nodes, auto&& f) {
  Eigen::VectorXd v(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) v[i] = f(nodes[i].x(), nodes[i].y());
  return v;
}

}  // namespace

TEST_CASE("node counts") {
  CHECK(build_nodes(1).size() == 3);
  CHECK(build_nodes(4).size() == 15);
  for (int p = 1; p <= max_reference_order; ++p) {
    CHECK(build_nodes(p).size() == static_cast<std::size_t>(nodes_per_triangle(p)));
  }
  CHECK_THROWS_AS(build_nodes(0), InputError);
  CHECK_THROWS_AS(build_nodes(13), InputError);
}

TEST_CASE("linear nodes are the vertices") {
  const auto n = build_nodes(1);
  CHECK(n[0].isApprox(Point(0, 0)));
  CHECK(n[1].isApprox(Point(1, 0)));
  CHECK(n[2].isApprox(Point(0, 1)));
}

TEST_CASE("edge nodes coincide with GLL points") {
  for (int p : {2, 3, 6, 9, 12}) {
    const ReferenceTriangle ref(p);
    const auto oracle = gll_oracle(p);
    for (int e = 0; e < 3; ++e) {
      const auto& idx = ref.edge_nodes(e);
      REQUIRE(idx.size() == static_cast<std::size_t>(p + 1));
      for (int j = 0; j <= p; ++j) {
        const Point expect = ReferenceTriangle::edge_point(e, 0.5 * (oracle[j] + 1.0));
        CHECK((ref.nodes()[idx[j]] - expect).norm() < 1e-12);
      }
    }
  }
}

TEST_CASE("1D GLL rule") {
  const auto oracle = gll_oracle(7);
  const auto pts = poly::gll_points(7);
  for (int j = 0; j <= 7; ++j) CHECK(pts[j] == doctest::Approx(oracle[j]).epsilon(1e-14));
  const auto rule = poly::gauss_lobatto(7);
  for (int k = 0; k <= 13; ++k) {
    double s = 0;
    for (std::size_t j = 0; j < rule.points.size(); ++j) s += rule.weights[j] * std::pow(rule.points[j], k);
    const double exact = k % 2 ? 0.0 : 2.0 / (k + 1);
    CHECK(std::abs(s - exact) < 1e-14);
  }
}

TEST_CASE("node set is invariant under the rotation of the triangle") {
  const auto nodes = build_nodes(7);
  for (const auto& n : nodes) {
    const Point rot(n.y(), 1.0 - n.x() - n.y());
    double best = 1e9;
    for (const auto& m : nodes) best = std::min(best, (m - rot).norm());
    CHECK(best < 1e-12);
  }
}

TEST_CASE("derivative matrices") {
  const ReferenceTriangle ref(3);
  const auto& x = ref.nodes();
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(x.size());
  CHECK((ref.d_r() * sample(x, [](double r, double) { return r; }) - one).norm() < 1e-12);
  CHECK((ref.d_r() * one).norm() < 1e-12);
  const auto f = sample(x, [](double r, double s) { return r * r * s; });
  const auto df = sample(x, [](double r, double) { return r * r; });
  CHECK((ref.d_s() * f - df).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("interpolate then differentiate is exact on random polynomials") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> coef(-1, 1);
  for (int p : {2, 5, 8, 10}) {
    const ReferenceTriangle ref(p);
    std::vector<std::array<double, 3>> terms;  // c, a, b
    for (int a = 0; a <= p; ++a) {
      for (int b = 0; a + b <= p; ++b) terms.push_back({coef(rng), double(a), double(b)});
    }
    auto f = [&](double r, double s) {
      double v = 0;
      for (auto [c, a, b] : terms) v += c * std::pow(r, a) * std::pow(s, b);
      return v;
    };
    auto fr = [&](double r, double s) {
      double v = 0;
      for (auto [c, a, b] : terms) {
        if (a > 0) v += c * a * std::pow(r, a - 1) * std::pow(s, b);
      }
      return v;
    };
    auto fs = [&](double r, double s) {
      double v = 0;
      for (auto [c, a, b] : terms) {
        if (b > 0) v += c * b * std::pow(r, a) * std::pow(s, b - 1);
      }
      return v;
    };
    const auto& x = ref.nodes();
    const auto u = sample(x, f);
    CHECK((ref.d_r() * u - sample(x, fr)).lpNorm<Eigen::Infinity>() < 1e-11);
    CHECK((ref.d_s() * u - sample(x, fs)).lpNorm<Eigen::Infinity>() < 1e-11);
  }
}

TEST_CASE("Lagrange cardinality and condition number") {
  for (int p = 1; p <= max_reference_order; ++p) {
    const ReferenceTriangle ref(p);
    const Eigen::MatrixXd id = ref.vandermonde() * ref.inverse_vandermonde();
    CHECK((id - Eigen::MatrixXd::Identity(id.rows(), id.cols())).lpNorm<Eigen::Infinity>() < 1e-12);
    for (int i = 0; i < ref.n_nodes(); ++i) {
      const auto phi = ref.basis(ref.nodes()[i]);
      Eigen::VectorXd e = Eigen::VectorXd::Zero(ref.n_nodes());
      e[i] = 1.0;
      CHECK((phi - e).lpNorm<Eigen::Infinity>() < 1e-12);
    }
    CHECK(std::isfinite(ref.condition_number()));
  }
}

TEST_CASE("operators reject a singular node set") {
  std::vector<Point> bad = build_nodes(2);
  bad[5] = bad[3];
  CHECK_THROWS_AS(build_operators(bad, 2), Error);
}

TEST_CASE("quadrature exactness and positivity") {
  for (int deg = 1; deg <= 36; ++deg) {
    const auto q = build_quadrature(deg);
    double sum = 0;
    for (double w : q.weights) {
      CHECK(w > 0.0);
      sum += w;
    }
    CHECK(sum == doctest::Approx(0.5).epsilon(1e-14));
    for (int a = 0; a <= deg; ++a) {
      for (int b = 0; a + b <= deg; ++b) {
        double s = 0;
        for (std::size_t i = 0; i < q.points.size(); ++i) {
          s += q.weights[i] * std::pow(q.points[i].x(), a) * std::pow(q.points[i].y(), b);
        }
        CHECK(std::abs(s - monomial_integral(a, b)) < 1e-14);
      }
    }
  }
  const auto q = build_quadrature(2);
  double rs = 0;
  for (std::size_t i = 0; i < q.points.size(); ++i) rs += q.weights[i] * q.points[i].x() * q.points[i].y();
  CHECK(std::abs(rs - 1.0 / 24.0) < 1e-14);
  CHECK_THROWS_AS(build_quadrature(0), InputError);
}

TEST_CASE("default quadrature degree is 3P") {
  CHECK(ReferenceTriangle(4).quadrature().degree == 12);
  CHECK(&reference_triangle(3) == &reference_triangle(3, 9));
}
