#include "semflow/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace semflow {

DofMap::DofMap(const Mesh2D& mesh, int order)
    : order_(order),
      n_local_(nodes_per_triangle(order)),
      n_cells_(static_cast<int>(mesh.n_cells())),
      n_vertices_(static_cast<int>(mesh.n_vertices())) {
  if (order < 1 || order > max_reference_order) throw InputError("DofMap: unsupported order");
  const int pe = order - 1;
  const int n_int = (order - 1) * (order - 2) / 2;
  const int edge_base = n_vertices_;
  const int cell_base = edge_base + static_cast<int>(mesh.n_edges()) * pe;
  n_dofs_ = cell_base + n_cells_ * n_int;
  cell_dofs_.resize(static_cast<std::size_t>(n_cells_) * n_local_);
  for (int c = 0; c < n_cells_; ++c) {
    int* d = cell_dofs_.data() + static_cast<std::size_t>(c) * n_local_;
    const auto& v = mesh.cells()[c];
    for (int k = 0; k < 3; ++k) d[k] = v[k];
    for (int k = 0; k < 3; ++k) {
      const int e = mesh.cell_edge(c, k);
      const bool forward = v[k] < v[(k + 1) % 3];
      for (int j = 0; j < pe; ++j) {
        d[3 + k * pe + j] = edge_base + e * pe + (forward ? j : pe - 1 - j);
      }
    }
    for (int j = 0; j < n_int; ++j) d[3 + 3 * pe + j] = cell_base + c * n_int + j;
  }
}

std::vector<int> DofMap::boundary_dofs(const Mesh2D& mesh, BoundaryTag tag) const {
  std::vector<int> out;
  const int pe = order_ - 1;
  for (std::size_t e = 0; e < mesh.n_edges(); ++e) {
    const auto& edge = mesh.edges()[e];
    if (edge.tag != tag) continue;
    out.push_back(edge.vertices[0]);
    out.push_back(edge.vertices[1]);
    for (int j = 0; j < pe; ++j) out.push_back(n_vertices_ + static_cast<int>(e) * pe + j);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

CoordinateField::CoordinateField(std::shared_ptr<const Mesh2D> mesh, int order)
    : mesh_(std::move(mesh)), dofs_(*mesh_, order), nodes_(dofs_.n_dofs(), Point::Zero()) {
  const auto& ref = reference_triangle(order);
  for (int c = 0; c < static_cast<int>(mesh_->n_cells()); ++c) {
    const auto& v = mesh_->cells()[c];
    const Point& a = mesh_->vertices()[v[0]];
    const Point& b = mesh_->vertices()[v[1]];
    const Point& d = mesh_->vertices()[v[2]];
    const auto dofs = dofs_.cell_dofs(c);
    for (int i = 0; i < ref.n_nodes(); ++i) {
      const Point& rs = ref.nodes()[i];
      nodes_[dofs[i]] = a + rs.x() * (b - a) + rs.y() * (d - a);
    }
  }
  // Vertices exactly as stored in the mesh.
  for (std::size_t i = 0; i < mesh_->n_vertices(); ++i) nodes_[i] = mesh_->vertices()[i];
}

Eigen::MatrixX2d CoordinateField::cell_nodes(int cell) const {
  const auto dofs = dofs_.cell_dofs(cell);
  Eigen::MatrixX2d x(dofs.size(), 2);
  for (std::size_t i = 0; i < dofs.size(); ++i) x.row(i) = nodes_[dofs[i]].transpose();
  return x;
}

Point CoordinateField::map(int cell, const Point& rs) const {
  return cell_nodes(cell).transpose() * reference().basis(rs);
}

Eigen::Matrix2d CoordinateField::jacobian(int cell, const Point& rs) const {
  return cell_nodes(cell).transpose() * reference().basis_gradient(rs);
}

namespace {

std::vector<int> check_cells(const CoordinateField& field, const std::vector<int>& cells, int degree) {
  const auto& ref = reference_triangle(field.order(), degree);
  std::vector<int> bad;
  for (int c : cells) {
    const Eigen::MatrixX2d x = field.cell_nodes(c);
    const Eigen::MatrixX2d xr = ref.dr_at_quadrature() * x;
    const Eigen::MatrixX2d xs = ref.ds_at_quadrature() * x;
    for (Eigen::Index q = 0; q < xr.rows(); ++q) {
      if (!(xr(q, 0) * xs(q, 1) - xs(q, 0) * xr(q, 1) > 0.0)) {
        bad.push_back(c);
        break;
      }
    }
  }
  return bad;
}

std::string cell_list(const std::vector<int>& cells) {
  std::string s;
  for (std::size_t i = 0; i < cells.size() && i < 20; ++i) s += (i ? ", " : "") + std::to_string(cells[i]);
  if (cells.size() > 20) s += ", ...";
  return s;
}

}  // namespace

std::vector<int> inverted_cells(const CoordinateField& field, int quadrature_degree) {
  std::vector<int> all(field.mesh().n_cells());
  for (std::size_t c = 0; c < all.size(); ++c) all[c] = static_cast<int>(c);
  return check_cells(field, all, quadrature_degree);
}

void blend_to_curve(CoordinateField& field, const BoundaryCurve& curve, BoundaryTag tag, double tolerance) {
  const Mesh2D& mesh = field.mesh();
  const auto& ref = field.reference();
  const int p = field.order();
  const int pe = p - 1;
  const int n_edge_nodes = 3 + 3 * pe;
  const auto& xi = ref.edge_parameters();
  const auto& dofs = field.dofs();
  auto& nodes = field.nodes();

  std::vector<int> touched;
  for (std::size_t ei = 0; ei < mesh.n_edges(); ++ei) {
    const auto& e = mesh.edges()[ei];
    if (e.tag != tag) continue;
    const int a = e.vertices[0], b = e.vertices[1];
    double da = 0, db = 0;
    const double ta = curve.project(mesh.vertices()[a], &da);
    double tb = curve.project(mesh.vertices()[b], &db);
    if (da > tolerance || db > tolerance) {
      throw MeshError("blend_to_curve: endpoint of edge (" + std::to_string(a) + ", " + std::to_string(b) +
                      ") is off the curve by " + std::to_string(std::max(da, db)));
    }
    if (curve.closed()) tb -= std::round(tb - ta);
    const double length = curve.arc_length(ta, tb);

    // Displacement of each edge node (global orientation a -> b), zero at the ends.
    std::vector<Point> disp(p + 1, Point::Zero());
    std::vector<int> edge_nodes(p + 1);
    edge_nodes[0] = a;
    edge_nodes[p] = b;
    for (int j = 1; j < p; ++j) {
      edge_nodes[j] = mesh.n_vertices() + static_cast<int>(ei) * pe + (j - 1);
      double t = curve.param_at_arc_length(ta, xi[j] * length);
      t = curve.closed() ? t - std::floor(t) : std::clamp(t, 0.0, 1.0);
      const Point target = curve.eval(t);
      disp[j] = target - nodes[edge_nodes[j]];
    }

    const int c = e.cells[0];
    const int k = e.local_index[0];
    const auto cd = dofs.cell_dofs(c);
    const bool forward = cd[k] == a;
    auto disp_local = [&](int j) { return forward ? disp[j] : disp[p - j]; };

    for (int j = 1; j < p; ++j) nodes[edge_nodes[j]] += disp[j];

    // Edge-bubble extension la lb kappa(s), s = (1 + lb - la) / 2, with kappa of
    // degree P-2 matching d(s) / (s (1 - s)) at the interior edge nodes.
    if (p >= 3) {
      const std::vector<double> inner(xi.begin() + 1, xi.begin() + p);
      for (int i = n_edge_nodes; i < ref.n_nodes(); ++i) {
        const Point& rs = ref.nodes()[i];
        const double lambda[3] = {1.0 - rs.x() - rs.y(), rs.x(), rs.y()};
        const double la = lambda[k], lb = lambda[(k + 1) % 3];
        const Eigen::VectorXd l = poly::lagrange_values(inner, 0.5 * (1.0 + lb - la));
        Point d = Point::Zero();
        for (int j = 1; j < p; ++j) d += l[j - 1] * disp_local(j) / (xi[j] * (1.0 - xi[j]));
        nodes[cd[i]] += la * lb * d;
      }
    }
    touched.push_back(c);
  }
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
  const auto bad = check_cells(field, touched, -1);
  if (!bad.empty()) {
    throw InvertedElementError("blend_to_curve: det J <= 0 in element(s) " + cell_list(bad), bad);
  }
}

Mesh2D snap_to_curve(const Mesh2D& mesh, const BoundaryCurve& curve, BoundaryTag tag) {
  std::vector<Point> v = mesh.vertices();
  for (const auto& be : mesh.boundary_edges()) {
    if (be.tag != tag) continue;
    for (int id : be.vertices) v[id] = curve.eval(curve.project(mesh.vertices()[id]));
  }
  return Mesh2D(std::move(v), mesh.cells(), mesh.boundary_edges());
}

std::vector<BoundaryFacet> boundary_facets(const Mesh2D& mesh, BoundaryTag tag) {
  std::vector<BoundaryFacet> out;
  for (std::size_t e = 0; e < mesh.n_edges(); ++e) {
    const auto& edge = mesh.edges()[e];
    if (edge.tag == tag) out.push_back({edge.cells[0], edge.local_index[0], static_cast<int>(e), tag});
  }
  return out;
}

std::vector<FacetPoint> facet_points(const CoordinateField& field, const BoundaryFacet& facet,
                                     const poly::Rule1D& rule) {
  static const Point kDir[3] = {Point(1, 0), Point(-1, 1), Point(0, -1)};
  const Eigen::MatrixX2d x = field.cell_nodes(facet.cell);
  const auto& ref = field.reference();
  std::vector<FacetPoint> out;
  out.reserve(rule.points.size());
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const double t = 0.5 * (rule.points[q] + 1.0);
    FacetPoint fp;
    fp.rs = ReferenceTriangle::edge_point(facet.local_edge, t);
    fp.x = x.transpose() * ref.basis(fp.rs);
    const Eigen::Matrix2d j = x.transpose() * ref.basis_gradient(fp.rs);
    const Point tangent = j * kDir[facet.local_edge];
    const double len = tangent.norm();
    fp.normal = Point(tangent.y(), -tangent.x()) / len;
    fp.weight = 0.5 * rule.weights[q] * len;
    out.push_back(fp);
  }
  return out;
}

Geometry::Geometry(const CoordinateField& field, int quadrature_degree)
    : n_cells_(static_cast<int>(field.mesh().n_cells())) {
  const auto& ref = reference_triangle(field.order(), quadrature_degree);
  degree_ = ref.quadrature().degree;
  n_quad_ = static_cast<int>(ref.quadrature().points.size());
  const std::size_t total = static_cast<std::size_t>(n_cells_) * n_quad_;
  det_.resize(total);
  jxw_.resize(total);
  inv_.resize(total);
  x_.resize(total);
  std::vector<int> bad;
  for (int c = 0; c < n_cells_; ++c) {
    const Eigen::MatrixX2d x = field.cell_nodes(c);
    const Eigen::MatrixX2d xq = ref.basis_at_quadrature() * x;
    const Eigen::MatrixX2d xr = ref.dr_at_quadrature() * x;
    const Eigen::MatrixX2d xs = ref.ds_at_quadrature() * x;
    bool ok = true;
    for (int q = 0; q < n_quad_; ++q) {
      Eigen::Matrix2d j;
      j << xr(q, 0), xs(q, 0), xr(q, 1), xs(q, 1);
      const double d = j.determinant();
      const std::size_t i = idx(c, q);
      det_[i] = d;
      jxw_[i] = d * ref.quadrature().weights[q];
      inv_[i] = j.inverse();
      x_[i] = xq.row(q).transpose();
      if (!(d > 0.0)) ok = false;
    }
    if (!ok) bad.push_back(c);
  }
  if (!bad.empty()) {
    throw InvertedElementError("geometry: det J <= 0 in element(s) " + cell_list(bad), bad);
  }
}

double Geometry::min_det() const {
  return det_.empty() ? 0.0 : *std::min_element(det_.begin(), det_.end());
}

double Geometry::area() const {
  double s = 0.0;
  for (double w : jxw_) s += w;
  return s;
}

}  // namespace semflow
