#include "semflow/reference_element.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace semflow {
namespace poly {

double jacobi_p(double x, double alpha, double beta, int n) {
  const double gamma0 = std::pow(2.0, alpha + beta + 1.0) / (alpha + beta + 1.0) *
                        std::tgamma(alpha + 1.0) * std::tgamma(beta + 1.0) /
                        std::tgamma(alpha + beta + 1.0);
  double p_prev = 1.0 / std::sqrt(gamma0);
  if (n == 0) return p_prev;
  const double gamma1 = (alpha + 1.0) * (beta + 1.0) / (alpha + beta + 3.0) * gamma0;
  double p = ((alpha + beta + 2.0) * x / 2.0 + (alpha - beta) / 2.0) / std::sqrt(gamma1);
  if (n == 1) return p;

  double a_old = 2.0 / (2.0 + alpha + beta) *
                 std::sqrt((alpha + 1.0) * (beta + 1.0) / (alpha + beta + 3.0));
  for (int i = 1; i < n; ++i) {
    const double h1 = 2.0 * i + alpha + beta;
    const double a_new = 2.0 / (h1 + 2.0) *
                         std::sqrt((i + 1.0) * (i + 1.0 + alpha + beta) * (i + 1.0 + alpha) *
                                   (i + 1.0 + beta) / (h1 + 1.0) / (h1 + 3.0));
    const double b_new = -(alpha * alpha - beta * beta) / h1 / (h1 + 2.0);
    const double p_next = (-a_old * p_prev + (x - b_new) * p) / a_new;
    p_prev = p;
    p = p_next;
    a_old = a_new;
  }
  return p;
}

double grad_jacobi_p(double x, double alpha, double beta, int n) {
  if (n == 0) return 0.0;
  return std::sqrt(n * (n + alpha + beta + 1.0)) * jacobi_p(x, alpha + 1.0, beta + 1.0, n - 1);
}

Rule1D gauss_jacobi(int n_points, double alpha, double beta) {
  if (n_points < 1) throw InputError("gauss_jacobi: need at least one point");
  Rule1D rule;
  if (n_points == 1) {
    rule.points = {(alpha - beta) / (alpha + beta + 2.0)};
    rule.weights = {std::pow(2.0, alpha + beta + 1.0) * std::tgamma(alpha + 1.0) *
                    std::tgamma(beta + 1.0) / std::tgamma(alpha + beta + 2.0)};
    return rule;
  }
  const int n = n_points - 1;
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n_points, n_points);
  for (int i = 0; i <= n; ++i) {
    const double h1 = 2.0 * i + alpha + beta;
    jac(i, i) = -0.5 * (alpha * alpha - beta * beta) / (h1 + 2.0) / h1;
    if (i < n) {
      const double k = i + 1.0;
      const double off = 2.0 / (h1 + 2.0) *
                         std::sqrt(k * (k + alpha + beta) * (k + alpha) * (k + beta) /
                                   (h1 + 1.0) / (h1 + 3.0));
      jac(i, i + 1) = off;
      jac(i + 1, i) = off;
    }
  }
  if (alpha + beta < 10 * std::numeric_limits<double>::epsilon()) jac(0, 0) = 0.0;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jac);
  const double scale = std::pow(2.0, alpha + beta + 1.0) / (alpha + beta + 1.0) *
                       std::tgamma(alpha + 1.0) * std::tgamma(beta + 1.0) /
                       std::tgamma(alpha + beta + 1.0);
  rule.points.resize(n_points);
  rule.weights.resize(n_points);
  for (int i = 0; i < n_points; ++i) {
    rule.points[i] = eig.eigenvalues()(i);
    const double v0 = eig.eigenvectors()(0, i);
    rule.weights[i] = v0 * v0 * scale;
  }
  return rule;
}

Rule1D gauss_legendre(int n_points) {
  Rule1D rule = gauss_jacobi(n_points, 0.0, 0.0);
  // Symmetrize to remove eigen-solver round-off.
  const int n = n_points;
  for (int i = 0; i < n / 2; ++i) {
    const double x = 0.5 * (rule.points[n - 1 - i] - rule.points[i]);
    const double w = 0.5 * (rule.weights[n - 1 - i] + rule.weights[i]);
    rule.points[i] = -x;
    rule.points[n - 1 - i] = x;
    rule.weights[i] = rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.points[n / 2] = 0.0;
  return rule;
}

std::vector<double> gll_points(int order) {
  if (order < 1) throw InputError("gll_points: order must be >= 1");
  std::vector<double> x(order + 1);
  x.front() = -1.0;
  x.back() = 1.0;
  if (order >= 2) {
    const Rule1D interior = gauss_jacobi(order - 1, 1.0, 1.0);
    for (int i = 0; i < order - 1; ++i) x[i + 1] = interior.points[i];
  }
  for (int i = 0; i <= order / 2; ++i) {
    const double v = 0.5 * (x[order - i] - x[i]);
    x[i] = -v;
    x[order - i] = v;
  }
  if (order % 2 == 0) x[order / 2] = 0.0;
  return x;
}

Rule1D gauss_lobatto(int order) {
  Rule1D rule;
  rule.points = gll_points(order);
  rule.weights.resize(rule.points.size());
  // w_i = 2 / (N (N+1) L_N(x_i)^2), with L_N the classical Legendre polynomial.
  const double norm = std::sqrt(2.0 / (2.0 * order + 1.0));
  for (std::size_t i = 0; i < rule.points.size(); ++i) {
    const double ln = jacobi_p(rule.points[i], 0.0, 0.0, order) * norm;
    rule.weights[i] = 2.0 / (order * (order + 1.0) * ln * ln);
  }
  return rule;
}

Eigen::VectorXd lagrange_values(std::span<const double> nodes, double x) {
  const auto n = static_cast<Eigen::Index>(nodes.size());
  Eigen::VectorXd l = Eigen::VectorXd::Ones(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index m = 0; m < n; ++m) {
      if (m != j) l(j) *= (x - nodes[m]) / (nodes[j] - nodes[m]);
    }
  }
  return l;
}

Eigen::VectorXd lagrange_derivatives(std::span<const double> nodes, double x) {
  const auto n = static_cast<Eigen::Index>(nodes.size());
  Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double denom = 1.0;
    for (Eigen::Index m = 0; m < n; ++m) {
      if (m != j) denom *= nodes[j] - nodes[m];
    }
    double sum = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (k == j) continue;
      double prod = 1.0;
      for (Eigen::Index m = 0; m < n; ++m) {
        if (m != j && m != k) prod *= x - nodes[m];
      }
      sum += prod;
    }
    d(j) = sum / denom;
  }
  return d;
}

}  // namespace poly

QuadratureRule build_quadrature(int degree) {
  if (degree < 1 || degree > 80) {
    throw InputError("build_quadrature: unsupported degree " + std::to_string(degree));
  }
  const int n = (degree + 3) / 2;  // ceil((degree + 2) / 2)
  const poly::Rule1D gl = poly::gauss_legendre(n);
  QuadratureRule rule;
  rule.degree = degree;
  rule.points.reserve(n * n);
  rule.weights.reserve(n * n);
  for (int j = 0; j < n; ++j) {
    const double b = gl.points[j];
    for (int i = 0; i < n; ++i) {
      const double a = gl.points[i];
      rule.points.emplace_back(0.25 * (1.0 + a) * (1.0 - b), 0.5 * (1.0 + b));
      rule.weights.push_back(gl.weights[i] * gl.weights[j] * (1.0 - b) / 8.0);
    }
  }
  return rule;
}

namespace {

constexpr std::array<double, 15> kAlphaOpt = {0.0000, 0.0000, 1.4152, 0.1001, 0.2751,
                                              0.9800, 1.0999, 1.2832, 1.3648, 1.4773,
                                              1.4959, 1.5743, 1.5770, 1.6223, 1.6258};

// Equispaced-to-GLL warp on [-1, 1], divided by the edge blend (1 - r^2).
Eigen::VectorXd warp_factor(int order, const Eigen::VectorXd& r_out) {
  const std::vector<double> gll = poly::gll_points(order);
  const int n = order + 1;
  Eigen::MatrixXd v_eq(n, n);
  for (int i = 0; i < n; ++i) {
    const double req = -1.0 + 2.0 * i / order;
    for (int j = 0; j < n; ++j) v_eq(i, j) = poly::jacobi_p(req, 0.0, 0.0, j);
  }
  Eigen::MatrixXd p_mat(n, r_out.size());
  for (int j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < r_out.size(); ++k) {
      p_mat(j, k) = poly::jacobi_p(r_out(k), 0.0, 0.0, j);
    }
  }
  const Eigen::MatrixXd l_mat = v_eq.transpose().partialPivLu().solve(p_mat);
  Eigen::VectorXd shift(n);
  for (int i = 0; i < n; ++i) shift(i) = gll[i] - (-1.0 + 2.0 * i / order);
  Eigen::VectorXd warp = l_mat.transpose() * shift;
  for (Eigen::Index k = 0; k < r_out.size(); ++k) {
    const double r = r_out(k);
    if (std::abs(r) < 1.0 - 1e-10) warp(k) /= 1.0 - r * r;
    // At the end points the warp itself vanishes; the blend factor is then zero too.
  }
  return warp;
}

// Collapsed coordinates of (r, s) in the [-1,1] biunit triangle.
std::pair<double, double> rs_to_ab(double r, double s) {
  const double a = (std::abs(s - 1.0) > 1e-14) ? 2.0 * (1.0 + r) / (1.0 - s) - 1.0 : -1.0;
  return {a, s};
}

}  // namespace

std::vector<Point> build_nodes(int order) {
  if (order < 1 || order > max_reference_order) {
    throw InputError("build_nodes: order " + std::to_string(order) + " outside [1, " +
                     std::to_string(max_reference_order) + "]");
  }
  const int np = nodes_per_triangle(order);
  const double alpha = kAlphaOpt[order - 1];

  Eigen::VectorXd l1(np), l2(np), l3(np);
  std::vector<std::array<int, 2>> lattice(np);
  int sk = 0;
  for (int n = 0; n <= order; ++n) {
    for (int m = 0; m <= order - n; ++m) {
      l1(sk) = static_cast<double>(n) / order;
      l3(sk) = static_cast<double>(m) / order;
      ++sk;
    }
  }
  l2 = Eigen::VectorXd::Ones(np) - l1 - l3;

  const double sqrt3 = std::sqrt(3.0);
  Eigen::VectorXd x = -l2 + l3;
  Eigen::VectorXd y = (-l2 - l3 + 2.0 * l1) / sqrt3;

  const Eigen::VectorXd blend1 = 4.0 * l2.cwiseProduct(l3);
  const Eigen::VectorXd blend2 = 4.0 * l1.cwiseProduct(l3);
  const Eigen::VectorXd blend3 = 4.0 * l1.cwiseProduct(l2);
  const Eigen::VectorXd warpf1 = warp_factor(order, l3 - l2);
  const Eigen::VectorXd warpf2 = warp_factor(order, l1 - l3);
  const Eigen::VectorXd warpf3 = warp_factor(order, l2 - l1);

  const auto alpha_term = [alpha](const Eigen::VectorXd& l) {
    return (Eigen::VectorXd::Ones(l.size()) + (alpha * l).array().square().matrix());
  };
  const Eigen::VectorXd warp1 = blend1.cwiseProduct(warpf1).cwiseProduct(alpha_term(l1));
  const Eigen::VectorXd warp2 = blend2.cwiseProduct(warpf2).cwiseProduct(alpha_term(l2));
  const Eigen::VectorXd warp3 = blend3.cwiseProduct(warpf3).cwiseProduct(alpha_term(l3));

  const double c2 = std::cos(2.0 * std::numbers::pi / 3.0), s2 = std::sin(2.0 * std::numbers::pi / 3.0);
  const double c4 = std::cos(4.0 * std::numbers::pi / 3.0), s4 = std::sin(4.0 * std::numbers::pi / 3.0);
  x += warp1 + c2 * warp2 + c4 * warp3;
  y += s2 * warp2 + s4 * warp3;

  // Equilateral -> biunit (r, s) -> unit triangle.
  std::vector<Point> raw(np);
  for (int i = 0; i < np; ++i) {
    const double b1 = (sqrt3 * y(i) + 1.0) / 3.0;
    const double b2 = (-3.0 * x(i) - sqrt3 * y(i) + 2.0) / 6.0;
    const double b3 = (3.0 * x(i) - sqrt3 * y(i) + 2.0) / 6.0;
    const double r = -b2 + b3 - b1;
    const double s = -b2 - b3 + b1;
    raw[i] = Point(0.5 * (r + 1.0), 0.5 * (s + 1.0));
  }

  // Reorder: vertices, edges (from start vertex), interior.
  // Lattice: n indexes s (l1), m indexes r (l3).
  std::vector<int> perm;
  perm.reserve(np);
  std::vector<int> index_of(np);
  auto lat_index = [order](int i_r, int j_s) {
    // sk ordering: n = j_s outer, m = i_r inner.
    int idx = 0;
    for (int n = 0; n < j_s; ++n) idx += order + 1 - n;
    return idx + i_r;
  };
  perm.push_back(lat_index(0, 0));
  perm.push_back(lat_index(order, 0));
  perm.push_back(lat_index(0, order));
  for (int k = 1; k < order; ++k) perm.push_back(lat_index(k, 0));          // edge 0: v0 -> v1
  for (int k = 1; k < order; ++k) perm.push_back(lat_index(order - k, k));  // edge 1: v1 -> v2
  for (int k = 1; k < order; ++k) perm.push_back(lat_index(0, order - k));  // edge 2: v2 -> v0
  for (int j = 1; j < order; ++j) {
    for (int i = 1; i + j < order; ++i) perm.push_back(lat_index(i, j));
  }

  std::vector<Point> nodes(np);
  for (int i = 0; i < np; ++i) nodes[i] = raw[perm[i]];

  // Snap exact zeros/ones that the warp produces up to round-off.
  for (auto& p : nodes) {
    for (int c = 0; c < 2; ++c) {
      if (std::abs(p(c)) < 1e-15) p(c) = 0.0;
    }
  }
  return nodes;
}

Eigen::VectorXd modal_basis(int order, const Point& rs) {
  const double r = 2.0 * rs.x() - 1.0;
  const double s = 2.0 * rs.y() - 1.0;
  const auto [a, b] = rs_to_ab(r, s);
  Eigen::VectorXd psi(nodes_per_triangle(order));
  int sk = 0;
  for (int i = 0; i <= order; ++i) {
    for (int j = 0; j <= order - i; ++j) {
      const double h1 = poly::jacobi_p(a, 0.0, 0.0, i);
      const double h2 = poly::jacobi_p(b, 2.0 * i + 1.0, 0.0, j);
      // sqrt(2) normalization on the biunit triangle; times 2 for the unit triangle (area 1/2).
      psi(sk++) = 2.0 * std::sqrt(2.0) * h1 * h2 * std::pow(1.0 - b, i);
    }
  }
  return psi;
}

Eigen::MatrixX2d modal_basis_gradient(int order, const Point& rs) {
  const double r = 2.0 * rs.x() - 1.0;
  const double s = 2.0 * rs.y() - 1.0;
  const auto [a, b] = rs_to_ab(r, s);
  Eigen::MatrixX2d grad(nodes_per_triangle(order), 2);
  int sk = 0;
  for (int id = 0; id <= order; ++id) {
    for (int jd = 0; jd <= order - id; ++jd) {
      const double fa = poly::jacobi_p(a, 0.0, 0.0, id);
      const double dfa = poly::grad_jacobi_p(a, 0.0, 0.0, id);
      const double gb = poly::jacobi_p(b, 2.0 * id + 1.0, 0.0, jd);
      const double dgb = poly::grad_jacobi_p(b, 2.0 * id + 1.0, 0.0, jd);

      double dr = dfa * gb;
      if (id > 0) dr *= std::pow(0.5 * (1.0 - b), id - 1);
      double ds = dfa * (gb * (0.5 * (1.0 + a)));
      if (id > 0) ds *= std::pow(0.5 * (1.0 - b), id - 1);
      double tmp = dgb * std::pow(0.5 * (1.0 - b), id);
      if (id > 0) tmp -= 0.5 * id * gb * std::pow(0.5 * (1.0 - b), id - 1);
      ds += fa * tmp;

      const double norm = std::pow(2.0, id + 0.5);
      // Chain rule biunit -> unit (factor 2) and unit-triangle normalization (factor 2).
      grad(sk, 0) = 4.0 * norm * dr;
      grad(sk, 1) = 4.0 * norm * ds;
      ++sk;
    }
  }
  return grad;
}

NodalOperators build_operators(std::span<const Point> nodes, int order) {
  const int np = nodes_per_triangle(order);
  if (static_cast<int>(nodes.size()) != np) {
    throw InputError("build_operators: expected " + std::to_string(np) + " nodes, got " +
                     std::to_string(nodes.size()));
  }
  NodalOperators ops;
  ops.vandermonde.resize(np, np);
  Eigen::MatrixXd vr(np, np), vs(np, np);
  for (int i = 0; i < np; ++i) {
    ops.vandermonde.row(i) = modal_basis(order, nodes[i]).transpose();
    const Eigen::MatrixX2d g = modal_basis_gradient(order, nodes[i]);
    vr.row(i) = g.col(0).transpose();
    vs.row(i) = g.col(1).transpose();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(ops.vandermonde);
  const auto& sv = svd.singularValues();
  ops.condition_number = sv(0) / sv(sv.size() - 1);
  if (!std::isfinite(ops.condition_number) || ops.condition_number > 1e12) {
    throw InputError("build_operators: Vandermonde matrix is numerically singular (cond = " +
                     std::to_string(ops.condition_number) +
                     "); use a unisolvent node set such as warp-and-blend nodes");
  }
  const Eigen::MatrixXd v_inv = ops.vandermonde.partialPivLu().inverse();
  ops.d_r = vr * v_inv;
  ops.d_s = vs * v_inv;
  return ops;
}

ReferenceTriangle::ReferenceTriangle(int order, int quadrature_degree)
    : order_(order), nodes_(build_nodes(order)), ops_(build_operators(nodes_, order)) {
  v_inv_ = ops_.vandermonde.inverse();
  quad_ = build_quadrature(quadrature_degree > 0 ? quadrature_degree : 3 * order);

  const int nq = static_cast<int>(quad_.points.size());
  const int np = n_nodes();
  phi_q_.resize(nq, np);
  dphi_dr_q_.resize(nq, np);
  dphi_ds_q_.resize(nq, np);
  for (int q = 0; q < nq; ++q) {
    phi_q_.row(q) = basis(quad_.points[q]).transpose();
    const Eigen::MatrixX2d g = basis_gradient(quad_.points[q]);
    dphi_dr_q_.row(q) = g.col(0).transpose();
    dphi_ds_q_.row(q) = g.col(1).transpose();
  }

  const int ne = order - 1;
  for (int e = 0; e < 3; ++e) {
    auto& list = edge_nodes_[e];
    list.push_back(e);
    for (int k = 0; k < ne; ++k) list.push_back(3 + e * ne + k);
    list.push_back((e + 1) % 3);
  }

  lattice_.resize(np);
  {
    int k = 0;
    lattice_[k++] = {0, 0};
    lattice_[k++] = {order, 0};
    lattice_[k++] = {0, order};
    for (int m = 1; m < order; ++m) lattice_[k++] = {m, 0};
    for (int m = 1; m < order; ++m) lattice_[k++] = {order - m, m};
    for (int m = 1; m < order; ++m) lattice_[k++] = {0, order - m};
    for (int j = 1; j < order; ++j) {
      for (int i = 1; i + j < order; ++i) lattice_[k++] = {i, j};
    }
  }

  const std::vector<double> gll = poly::gll_points(order);
  edge_params_.resize(gll.size());
  for (std::size_t i = 0; i < gll.size(); ++i) edge_params_[i] = 0.5 * (gll[i] + 1.0);
}

Eigen::VectorXd ReferenceTriangle::basis(const Point& rs) const {
  // phi^T = psi^T V^{-1}
  return v_inv_.transpose() * modal_basis(order_, rs);
}

Eigen::MatrixX2d ReferenceTriangle::basis_gradient(const Point& rs) const {
  return v_inv_.transpose() * modal_basis_gradient(order_, rs);
}

Point ReferenceTriangle::edge_point(int e, double t) {
  switch (e) {
    case 0: return {t, 0.0};
    case 1: return {1.0 - t, t};
    default: return {0.0, 1.0 - t};
  }
}

const ReferenceTriangle& reference_triangle(int order, int quadrature_degree) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::unique_ptr<ReferenceTriangle>> cache;
  const int degree = quadrature_degree > 0 ? quadrature_degree : 3 * order;
  const std::lock_guard lock(mutex);
  auto& slot = cache[{order, degree}];
  if (!slot) slot = std::make_unique<ReferenceTriangle>(order, degree);
  return *slot;
}

}  // namespace semflow
