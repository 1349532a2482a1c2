#pragma once

#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "semflow/curves.hpp"
#include "semflow/mesh.hpp"
#include "semflow/reference_element.hpp"

namespace semflow {

/// Global numbering of order-P Lagrange nodes on a triangle mesh.
///
/// Vertex nodes first (same ids as mesh vertices), then the P-1 interior
/// nodes of every edge ordered from its lower to its higher vertex id, then
/// the interior nodes of every cell. Per-cell lists follow the reference
/// node ordering, so shared edge nodes are single-valued.
class DofMap {
 public:
  DofMap() = default;
  DofMap(const Mesh2D& mesh, int order);

  int order() const { return order_; }
  int n_dofs() const { return n_dofs_; }
  int n_local() const { return n_local_; }
  int n_cells() const { return n_cells_; }

  std::span<const int> cell_dofs(int cell) const {
    return {cell_dofs_.data() + static_cast<std::size_t>(cell) * n_local_, static_cast<std::size_t>(n_local_)};
  }
  /// Interior node j (0 <= j < P-1) of `edge`, counted from its lower vertex.
  int edge_dof(int edge, int j) const { return n_vertices_ + edge * (order_ - 1) + j; }
  /// Sorted unique node ids on every boundary edge with this tag.
  std::vector<int> boundary_dofs(const Mesh2D& mesh, BoundaryTag tag) const;

 private:
  int order_ = 0, n_dofs_ = 0, n_local_ = 0, n_cells_ = 0, n_vertices_ = 0;
  std::vector<int> cell_dofs_;
};

/// Isoparametric order-P coordinate field: one physical point per node of
/// an order-P DofMap.
class CoordinateField {
 public:
  CoordinateField() = default;
  /// Straight-sided (affine) field interpolating the mesh vertices.
  CoordinateField(std::shared_ptr<const Mesh2D> mesh, int order);

  const Mesh2D& mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh2D> mesh_ptr() const { return mesh_; }
  const DofMap& dofs() const { return dofs_; }
  int order() const { return dofs_.order(); }
  const ReferenceTriangle& reference() const { return reference_triangle(order()); }

  const std::vector<Point>& nodes() const { return nodes_; }
  std::vector<Point>& nodes() { return nodes_; }

  /// Element-local node coordinates (n_local x 2).
  Eigen::MatrixX2d cell_nodes(int cell) const;
  /// Physical point and Jacobian [x_r x_s; y_r y_s] at reference point rs.
  Point map(int cell, const Point& rs) const;
  Eigen::Matrix2d jacobian(int cell, const Point& rs) const;

 private:
  std::shared_ptr<const Mesh2D> mesh_;
  DofMap dofs_;
  std::vector<Point> nodes_;
};

/// Moves the high-order nodes of every `tag` edge onto `curve` and extends the
/// edge displacement into the adjacent cell as a degree-P edge bubble, so the
/// other two edges stay straight and the map stays polynomial.
///
/// Edge nodes land at arc-length-proportional GLL parameters between the
/// edge's endpoint parameters. Displacements are taken relative to the
/// current nodes, so a second application changes nothing. Throws MeshError
/// when an endpoint is farther than `tolerance` from the curve and
/// InvertedElementError when a blended cell has det J <= 0.
void blend_to_curve(CoordinateField& field, const BoundaryCurve& curve, BoundaryTag tag,
                    double tolerance = 1e-10);

/// Copy of `mesh` with every vertex on a `tag` edge moved to its nearest curve point.
Mesh2D snap_to_curve(const Mesh2D& mesh, const BoundaryCurve& curve, BoundaryTag tag);

/// Boundary facet: local edge `local_edge` of `cell`, carrying `tag`.
struct BoundaryFacet {
  int cell;
  int local_edge;
  int edge;
  BoundaryTag tag;
};

std::vector<BoundaryFacet> boundary_facets(const Mesh2D& mesh, BoundaryTag tag);

struct FacetPoint {
  Point rs;         // reference coordinates in the cell
  Point x;          // physical position
  Point normal;     // outward unit normal
  double weight;    // quadrature weight times |dx/dxi| (xi in [0, 1])
};

/// Gauss-Legendre points along a boundary facet, oriented as the cell traverses it.
std::vector<FacetPoint> facet_points(const CoordinateField& field, const BoundaryFacet& facet,
                                     const poly::Rule1D& rule);

/// Jacobians, determinants and inverse Jacobians at the volume quadrature points.
///
/// Built from the coordinate field with the quadrature of `quadrature_degree`
/// (default 3P). Throws InvertedElementError listing every cell with a
/// non-positive determinant.
class Geometry {
 public:
  Geometry() = default;
  explicit Geometry(const CoordinateField& field, int quadrature_degree = -1);

  int n_cells() const { return n_cells_; }
  int n_quad() const { return n_quad_; }
  int quadrature_degree() const { return degree_; }

  double det(int cell, int q) const { return det_[idx(cell, q)]; }
  const Eigen::Matrix2d& inv_jacobian(int cell, int q) const { return inv_[idx(cell, q)]; }
  const Point& point(int cell, int q) const { return x_[idx(cell, q)]; }
  /// Quadrature weight times det J.
  double jxw(int cell, int q) const { return jxw_[idx(cell, q)]; }

  double min_det() const;
  double area() const;

 private:
  std::size_t idx(int cell, int q) const { return static_cast<std::size_t>(cell) * n_quad_ + q; }
  int n_cells_ = 0, n_quad_ = 0, degree_ = 0;
  std::vector<double> det_, jxw_;
  std::vector<Eigen::Matrix2d> inv_;
  std::vector<Point> x_;
};

/// Cells with det J <= 0 at any quadrature point of `degree`.
std::vector<int> inverted_cells(const CoordinateField& field, int quadrature_degree = -1);

}  // namespace semflow
