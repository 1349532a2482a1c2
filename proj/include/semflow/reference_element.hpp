#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "semflow/common.hpp"

namespace semflow {

/// One-dimensional polynomial machinery on [-1, 1].
namespace poly {

/// Orthonormal Jacobi polynomial P_n^{(alpha,beta)} evaluated at x.
double jacobi_p(double x, double alpha, double beta, int n);

/// Derivative of the orthonormal Jacobi polynomial.
double grad_jacobi_p(double x, double alpha, double beta, int n);

struct Rule1D {
  std::vector<double> points;
  std::vector<double> weights;
};

/// Gauss-Jacobi rule with n_points nodes (Golub-Welsch on the Jacobi matrix).
Rule1D gauss_jacobi(int n_points, double alpha, double beta);

/// Gauss-Legendre rule with n_points nodes, exact for degree 2n-1.
Rule1D gauss_legendre(int n_points);

/// The order+1 Gauss-Lobatto-Legendre points on [-1, 1], ascending.
std::vector<double> gll_points(int order);

/// GLL points together with their quadrature weights (exact to degree 2*order-1).
Rule1D gauss_lobatto(int order);

/// Lagrange cardinal functions through `nodes`, evaluated at x.
Eigen::VectorXd lagrange_values(std::span<const double> nodes, double x);

/// Derivatives of the Lagrange cardinal functions through `nodes` at x.
Eigen::VectorXd lagrange_derivatives(std::span<const double> nodes, double x);

}  // namespace poly

/// Quadrature rule on the unit reference triangle {(r,s): r,s >= 0, r+s <= 1}.
struct QuadratureRule {
  int degree = 0;
  std::vector<Point> points;
  std::vector<double> weights;
};

/// Collapsed-coordinate tensor Gauss rule, exact for total degree <= `degree`.
QuadratureRule build_quadrature(int degree);

/// Warp-and-blend nodes of order P on the unit reference triangle.
///
/// Ordering: the three vertices, then the interior nodes of edge 0 (v0->v1),
/// edge 1 (v1->v2) and edge 2 (v2->v0), each running from the edge's start
/// vertex, then the element interior nodes.
std::vector<Point> build_nodes(int order);

struct NodalOperators {
  Eigen::MatrixXd vandermonde;
  Eigen::MatrixXd d_r;
  Eigen::MatrixXd d_s;
  double condition_number = 0.0;
};

/// Modal-to-nodal operators for the orthonormal triangle basis on `nodes`.
NodalOperators build_operators(std::span<const Point> nodes, int order);

/// Orthonormal modal basis values at (r, s); size (P+1)(P+2)/2.
Eigen::VectorXd modal_basis(int order, const Point& rs);

/// Gradients of the modal basis at (r, s): columns d/dr and d/ds.
Eigen::MatrixX2d modal_basis_gradient(int order, const Point& rs);

inline constexpr int max_reference_order = 12;

inline constexpr int nodes_per_triangle(int order) { return (order + 1) * (order + 2) / 2; }

/// Order-P nodal reference triangle with operators and tabulated quadrature.
class ReferenceTriangle {
 public:
  /// Builds with the quadrature degree defaulting to 3P.
  explicit ReferenceTriangle(int order, int quadrature_degree = -1);

  int order() const { return order_; }
  int n_nodes() const { return static_cast<int>(nodes_.size()); }
  const std::vector<Point>& nodes() const { return nodes_; }
  const Eigen::MatrixXd& vandermonde() const { return ops_.vandermonde; }
  const Eigen::MatrixXd& inverse_vandermonde() const { return v_inv_; }
  const Eigen::MatrixXd& d_r() const { return ops_.d_r; }
  const Eigen::MatrixXd& d_s() const { return ops_.d_s; }
  double condition_number() const { return ops_.condition_number; }

  const QuadratureRule& quadrature() const { return quad_; }
  /// Basis values at quadrature points, (n_quad x n_nodes).
  const Eigen::MatrixXd& basis_at_quadrature() const { return phi_q_; }
  const Eigen::MatrixXd& dr_at_quadrature() const { return dphi_dr_q_; }
  const Eigen::MatrixXd& ds_at_quadrature() const { return dphi_ds_q_; }

  /// Local node indices along edge `e`, from its start vertex to its end vertex (P+1 entries).
  const std::vector<int>& edge_nodes(int e) const { return edge_nodes_[e]; }
  /// Lattice index (i, j) of each node, i along r, j along s; used for sub-triangulation.
  const std::vector<std::array<int, 2>>& lattice() const { return lattice_; }
  /// The 1D GLL points mapped to [0, 1]; these are the edge node parameters.
  const std::vector<double>& edge_parameters() const { return edge_params_; }

  Eigen::VectorXd basis(const Point& rs) const;
  /// Gradient of every nodal basis function at rs, (n_nodes x 2).
  Eigen::MatrixX2d basis_gradient(const Point& rs) const;

  /// Reference point on edge `e` at parameter t in [0, 1].
  static Point edge_point(int e, double t);

 private:
  int order_;
  std::vector<Point> nodes_;
  NodalOperators ops_;
  Eigen::MatrixXd v_inv_;
  QuadratureRule quad_;
  Eigen::MatrixXd phi_q_, dphi_dr_q_, dphi_ds_q_;
  std::array<std::vector<int>, 3> edge_nodes_;
  std::vector<std::array<int, 2>> lattice_;
  std::vector<double> edge_params_;
};

/// Process-wide cache of reference triangles keyed by (order, quadrature degree).
const ReferenceTriangle& reference_triangle(int order, int quadrature_degree = -1);

}  // namespace semflow
