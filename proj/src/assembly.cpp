#include "semflow/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace semflow {

namespace {

const Point kEdgeDir[3] = {Point(1, 0), Point(-1, 1), Point(0, -1)};

int rank_of(BCKind k) {
  switch (k) {
    case BCKind::no_slip: return 3;
    case BCKind::dirichlet: return 2;
    case BCKind::free_slip: return 1;
    default: return 0;
  }
}

poly::Rule1D facet_rule(int order) { return poly::gauss_legendre((3 * order + 2) / 2 + 1); }

}  // namespace

std::string_view to_string(BCKind kind) {
  switch (kind) {
    case BCKind::no_slip: return "no_slip";
    case BCKind::dirichlet: return "dirichlet";
    case BCKind::free_slip: return "free_slip";
    case BCKind::traction_free: return "traction_free";
    case BCKind::traction: return "traction";
    case BCKind::free_surface: return "free_surface";
  }
  return "?";
}

void BCSet::validate(const Mesh2D& mesh) const {
  for (auto tag : mesh.tags_present()) {
    const auto* bc = find(tag);
    if (!bc) throw InputError("no boundary condition for tag '" + std::string(to_string(tag)) + "'");
    if ((bc->kind == BCKind::dirichlet || bc->kind == BCKind::traction) && !bc->value)
      throw InputError("boundary condition on '" + std::string(to_string(tag)) + "' has no value");
  }
}

MixedSpace::MixedSpace(std::shared_ptr<const Mesh2D> mesh, int velocity_order) : mesh_(std::move(mesh)) {
  if (velocity_order < 2 || velocity_order > max_reference_order)
    throw InputError("velocity order must be in [2, " + std::to_string(max_reference_order) + "], got " +
                     std::to_string(velocity_order));
  velocity_ = DofMap(*mesh_, velocity_order);
  pressure_ = DofMap(*mesh_, velocity_order - 1);
}

NavierStokesProblem::NavierStokesProblem(const MixedSpace& space, const CoordinateField& coords, BCSet bcs,
                                         double re, double fr)
    : space_(&space), coords_(&coords), bcs_(std::move(bcs)), re_(re), fr_(fr) {
  if (coords.order() != space.velocity_order())
    throw InputError("coordinate field order " + std::to_string(coords.order()) +
                     " differs from velocity order " + std::to_string(space.velocity_order()));
  if (&coords.mesh() != &space.mesh()) throw InputError("coordinate field and space use different meshes");
  set_reynolds(re);
  bcs_.validate(space.mesh());
  bool has_surface = false;
  for (const auto& [tag, bc] : bcs_.entries()) has_surface |= bc.kind == BCKind::free_surface;
  if (has_surface) {
    for (const auto& [tag, bc] : bcs_.entries()) {
      if (bc.kind != BCKind::free_surface) continue;
      const auto ids = space.velocity().boundary_dofs(space.mesh(), tag);
      surface_nodes_.insert(surface_nodes_.end(), ids.begin(), ids.end());
    }
    std::sort(surface_nodes_.begin(), surface_nodes_.end(), [&](int a, int b) {
      const double xa = coords.nodes()[a].x(), xb = coords.nodes()[b].x();
      return xa != xb ? xa < xb : a < b;
    });
    surface_nodes_.erase(std::unique(surface_nodes_.begin(), surface_nodes_.end()), surface_nodes_.end());
    eta_.assign(surface_nodes_.size(), 0.0);
  }
  build_pattern();
  update_geometry();
}

void NavierStokesProblem::set_reynolds(double re) {
  if (!(re > 0) || !std::isfinite(re)) throw InputError("Reynolds number must be positive, got " + std::to_string(re));
  re_ = re;
}

void NavierStokesProblem::set_froude(double fr) {
  if (!(fr >= 0) || !std::isfinite(fr)) throw InputError("Froude number must be non-negative");
  fr_ = fr;
}

void NavierStokesProblem::set_surface_elevation(std::vector<double> eta) {
  if (eta.size() != surface_nodes_.size())
    throw InputError("eta trace length " + std::to_string(eta.size()) + " does not match " +
                     std::to_string(surface_nodes_.size()) + " surface nodes");
  eta_ = std::move(eta);
}

void NavierStokesProblem::update_geometry() {
  geometry_ = Geometry(*coords_);
  build_constraints();
}

void NavierStokesProblem::build_pattern() {
  const auto& vel = space_->velocity();
  const auto& pre = space_->pressure();
  const int n = vel.n_local(), np = pre.n_local();
  local_size_ = 2 * n + np;
  const int m = local_size_;
  const int n_cells = vel.n_cells();
  const int N = space_->n_dofs();

  std::vector<int> g(m);
  auto gather = [&](int c) {
    const auto dv = vel.cell_dofs(c);
    const auto dp = pre.cell_dofs(c);
    for (int i = 0; i < n; ++i) {
      g[i] = space_->u(dv[i]);
      g[n + i] = space_->v(dv[i]);
    }
    for (int k = 0; k < np; ++k) g[2 * n + k] = space_->p(dp[k]);
  };

  std::vector<std::vector<int>> rows(N);
  for (int c = 0; c < n_cells; ++c) {
    gather(c);
    for (int a = 0; a < m; ++a) rows[g[a]].insert(rows[g[a]].end(), g.begin(), g.end());
  }
  std::vector<int> outer(N + 1, 0);
  for (int r = 0; r < N; ++r) {
    auto& row = rows[r];
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    outer[r + 1] = outer[r] + static_cast<int>(row.size());
  }
  jac_.resize(N, N);
  jac_.resizeNonZeros(outer[N]);
  std::copy(outer.begin(), outer.end(), jac_.outerIndexPtr());
  for (int r = 0; r < N; ++r) {
    std::copy(rows[r].begin(), rows[r].end(), jac_.innerIndexPtr() + outer[r]);
    std::vector<int>().swap(rows[r]);
  }
  std::fill(jac_.valuePtr(), jac_.valuePtr() + outer[N], 0.0);

  positions_.resize(static_cast<std::size_t>(n_cells) * m * m);
  const int* inner = jac_.innerIndexPtr();
  for (int c = 0; c < n_cells; ++c) {
    gather(c);
    int* pos = positions_.data() + static_cast<std::size_t>(c) * m * m;
    for (int a = 0; a < m; ++a) {
      const int* begin = inner + outer[g[a]];
      const int* end = inner + outer[g[a] + 1];
      for (int b = 0; b < m; ++b) pos[a * m + b] = static_cast<int>(std::lower_bound(begin, end, g[b]) - inner);
    }
  }
}

void NavierStokesProblem::build_constraints() {
  const auto& mesh = space_->mesh();
  const auto& vel = space_->velocity();
  const int nv = vel.n_dofs();
  const auto& nodes = coords_->nodes();

  std::vector<int> rank(nv, 0);
  std::vector<Point> value(nv, Point::Zero());
  std::vector<BoundaryTag> source(nv, BoundaryTag::wall);
  for (const auto& [tag, bc] : bcs_.entries()) {
    const int r = rank_of(bc.kind);
    if (r == 0) continue;
    for (int node : vel.boundary_dofs(mesh, tag)) {
      Point g = Point::Zero();
      if (bc.kind == BCKind::dirichlet) g = bc.value(nodes[node]);
      if (r > rank[node]) {
        rank[node] = r;
        value[node] = g;
        source[node] = tag;
      } else if (r == rank[node] && r >= 2 && (g - value[node]).norm() > 1e-12) {
        std::ostringstream os;
        os << "conflicting Dirichlet values at node " << node << " (" << nodes[node].x() << ", "
           << nodes[node].y() << ") between tags '" << to_string(source[node]) << "' and '" << to_string(tag)
           << "'";
        throw InputError(os.str());
      }
    }
  }

  dirichlet_.clear();
  for (int node = 0; node < nv; ++node) {
    if (rank[node] < 2) continue;
    dirichlet_.push_back({space_->u(node), value[node].x()});
    dirichlet_.push_back({space_->v(node), value[node].y()});
  }

  // Node normals for free-slip nodes: facet-length weighted average of unit normals.
  std::vector<Point> normal(nv, Point::Zero());
  const auto& ref = coords_->reference();
  const auto rule = facet_rule(vel.order());
  for (const auto& [tag, bc] : bcs_.entries()) {
    if (bc.kind != BCKind::free_slip) continue;
    for (const auto& facet : boundary_facets(mesh, tag)) {
      double length = 0;
      for (const auto& fp : facet_points(*coords_, facet, rule)) length += fp.weight;
      const auto d = vel.cell_dofs(facet.cell);
      const auto& en = ref.edge_nodes(facet.local_edge);
      for (int j = 0; j < static_cast<int>(en.size()); ++j) {
        const int node = d[en[j]];
        if (rank[node] != 1) continue;
        const Point rs = ReferenceTriangle::edge_point(facet.local_edge, ref.edge_parameters()[j]);
        const Point t = coords_->jacobian(facet.cell, rs) * kEdgeDir[facet.local_edge];
        normal[node] += length * Point(t.y(), -t.x()) / t.norm();
      }
    }
  }
  free_slip_.clear();
  for (int node = 0; node < nv; ++node) {
    if (rank[node] != 1) continue;
    const double len = normal[node].norm();
    if (len < 1e-300) throw MeshError("degenerate free-slip normal at node " + std::to_string(node));
    free_slip_.push_back({node, normal[node] / len});
  }
}

Eigen::VectorXd NavierStokesProblem::initial_guess() const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(size());
  for (const auto& d : dirichlet_) x[d.dof] = d.value;
  if (pin_) x[space_->p(pin_->first)] = pin_->second;
  return x;
}

void NavierStokesProblem::assemble(const Eigen::VectorXd& x, Eigen::VectorXd* r, bool want_jacobian) {
  if (x.size() != size())
    throw InputError("state size " + std::to_string(x.size()) + " does not match " + std::to_string(size()));
  const auto& vel = space_->velocity();
  const auto& pre = space_->pressure();
  const auto& rv = reference_triangle(vel.order(), geometry_.quadrature_degree());
  const auto& rp = reference_triangle(pre.order(), geometry_.quadrature_degree());
  const int n = vel.n_local(), np = pre.n_local(), m = local_size_;
  const int nq = geometry_.n_quad();
  const double nu = 1.0 / re_;
  const Eigen::MatrixXd& phi = rv.basis_at_quadrature();
  const Eigen::MatrixXd& psi = rp.basis_at_quadrature();
  const Eigen::MatrixXd& dr = rv.dr_at_quadrature();
  const Eigen::MatrixXd& ds = rv.ds_at_quadrature();

  if (r) r->setZero(size());
  double* values = jac_.valuePtr();
  if (want_jacobian) std::fill(values, values + jac_.nonZeros(), 0.0);

  Eigen::MatrixXd gx(nq, n), gy(nq, n);
  Eigen::VectorXd w(nq), ul(n), vl(n), pl(np);
  Eigen::MatrixXd local(m, m);
  Eigen::MatrixXd wgx(nq, n), wgy(nq, n), wphi(nq, n), conv(nq, n);
  const int nu_off = space_->n_velocity_nodes();

  for (int c = 0; c < vel.n_cells(); ++c) {
    const auto dv = vel.cell_dofs(c);
    const auto dp = pre.cell_dofs(c);
    for (int i = 0; i < n; ++i) {
      ul[i] = x[dv[i]];
      vl[i] = x[nu_off + dv[i]];
    }
    for (int k = 0; k < np; ++k) pl[k] = x[space_->p(dp[k])];
    for (int q = 0; q < nq; ++q) {
      const Eigen::Matrix2d& ij = geometry_.inv_jacobian(c, q);
      // d/dx = r_x d/dr + s_x d/ds, with inv J = [r_x r_y; s_x s_y].
      gx.row(q) = ij(0, 0) * dr.row(q) + ij(1, 0) * ds.row(q);
      gy.row(q) = ij(0, 1) * dr.row(q) + ij(1, 1) * ds.row(q);
      w[q] = geometry_.jxw(c, q);
    }
    const Eigen::VectorXd uq = phi * ul, vq = phi * vl, pq = psi * pl;
    const Eigen::VectorXd ux = gx * ul, uy = gy * ul, vx = gx * vl, vy = gy * vl;

    if (r) {
      const Eigen::VectorXd a = w.cwiseProduct(2 * nu * ux - pq);
      const Eigen::VectorXd b = w.cwiseProduct(nu * (uy + vx));
      const Eigen::VectorXd cu = w.cwiseProduct(uq.cwiseProduct(ux) + vq.cwiseProduct(uy));
      const Eigen::VectorXd cv = w.cwiseProduct(uq.cwiseProduct(vx) + vq.cwiseProduct(vy));
      const Eigen::VectorXd d = w.cwiseProduct(2 * nu * vy - pq);
      const Eigen::VectorXd ru = gx.transpose() * a + gy.transpose() * b + phi.transpose() * cu;
      const Eigen::VectorXd rvv = gx.transpose() * b + gy.transpose() * d + phi.transpose() * cv;
      const Eigen::VectorXd rpp = psi.transpose() * w.cwiseProduct(ux + vy);
      for (int i = 0; i < n; ++i) {
        (*r)[dv[i]] += ru[i];
        (*r)[nu_off + dv[i]] += rvv[i];
      }
      for (int k = 0; k < np; ++k) (*r)[space_->p(dp[k])] += rpp[k];
    }

    if (want_jacobian) {
      wgx = w.asDiagonal() * gx;
      wgy = w.asDiagonal() * gy;
      wphi = w.asDiagonal() * phi;
      conv = uq.asDiagonal() * gx + vq.asDiagonal() * gy;
      const Eigen::MatrixXd axx = gx.transpose() * wgx;
      const Eigen::MatrixXd ayy = gy.transpose() * wgy;
      const Eigen::MatrixXd axy = gx.transpose() * wgy;  // (i, j) = sum w phi_i,x phi_j,y
      const Eigen::MatrixXd adv = phi.transpose() * (w.asDiagonal() * conv);
      local.block(0, 0, n, n) = nu * (2 * axx + ayy) + adv + phi.transpose() * (w.cwiseProduct(ux)).asDiagonal() * phi;
      local.block(0, n, n, n) = nu * axy.transpose() + phi.transpose() * (w.cwiseProduct(uy)).asDiagonal() * phi;
      local.block(n, 0, n, n) = nu * axy + phi.transpose() * (w.cwiseProduct(vx)).asDiagonal() * phi;
      local.block(n, n, n, n) = nu * (axx + 2 * ayy) + adv + phi.transpose() * (w.cwiseProduct(vy)).asDiagonal() * phi;
      local.block(0, 2 * n, n, np) = -wgx.transpose() * psi;
      local.block(n, 2 * n, n, np) = -wgy.transpose() * psi;
      local.block(2 * n, 0, np, n) = psi.transpose() * wgx;
      local.block(2 * n, n, np, n) = psi.transpose() * wgy;
      local.block(2 * n, 2 * n, np, np).setZero();
      const int* pos = positions_.data() + static_cast<std::size_t>(c) * m * m;
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) values[pos[a * m + b]] += local(a, b);
    }
  }
  if (r) add_boundary_loads(*r);
}

void NavierStokesProblem::add_boundary_loads(Eigen::VectorXd& r) const {
  const auto& mesh = space_->mesh();
  const auto& vel = space_->velocity();
  const auto& ref = coords_->reference();
  const auto rule = facet_rule(vel.order());
  const int nu_off = space_->n_velocity_nodes();

  std::vector<int> surface_index;
  if (!surface_nodes_.empty()) {
    surface_index.assign(vel.n_dofs(), -1);
    for (std::size_t i = 0; i < surface_nodes_.size(); ++i) surface_index[surface_nodes_[i]] = static_cast<int>(i);
  }
  const double inv_fr2 = fr_ > 0 ? 1.0 / (fr_ * fr_) : 0.0;
  const auto& params = ref.edge_parameters();

  for (const auto& [tag, bc] : bcs_.entries()) {
    if (bc.kind != BCKind::traction && bc.kind != BCKind::free_surface) continue;
    if (bc.kind == BCKind::free_surface && inv_fr2 == 0.0) continue;
    for (const auto& facet : boundary_facets(mesh, tag)) {
      const auto d = vel.cell_dofs(facet.cell);
      const auto pts = facet_points(*coords_, facet, rule);
      Eigen::VectorXd eta_edge;
      if (bc.kind == BCKind::free_surface) {
        const auto& en = ref.edge_nodes(facet.local_edge);
        eta_edge.resize(static_cast<Eigen::Index>(en.size()));
        for (std::size_t j = 0; j < en.size(); ++j) eta_edge[static_cast<Eigen::Index>(j)] = eta_[surface_index[d[en[j]]]];
      }
      for (std::size_t q = 0; q < pts.size(); ++q) {
        const auto& fp = pts[q];
        Point load;
        if (bc.kind == BCKind::free_surface) {
          const double t = 0.5 * (rule.points[q] + 1.0);
          const double eta = poly::lagrange_values(params, t).dot(eta_edge);
          load = eta * inv_fr2 * fp.normal;
        } else {
          load = -bc.value(fp.x);
        }
        const Eigen::VectorXd b = ref.basis(fp.rs);
        for (int i = 0; i < vel.n_local(); ++i) {
          r[d[i]] += fp.weight * load.x() * b[i];
          r[nu_off + d[i]] += fp.weight * load.y() * b[i];
        }
      }
    }
  }
}

void NavierStokesProblem::apply_constraints(const Eigen::VectorXd& x, Eigen::VectorXd* r, bool matrix) {
  int* outer = jac_.outerIndexPtr();
  int* inner = jac_.innerIndexPtr();
  double* values = jac_.valuePtr();
  auto set_unit_row = [&](int row, int col, double v) {
    std::fill(values + outer[row], values + outer[row + 1], 0.0);
    const int* p = std::lower_bound(inner + outer[row], inner + outer[row + 1], col);
    values[p - inner] = v;
  };

  for (const auto& fs : free_slip_) {
    const int iu = space_->u(fs.node), iv = space_->v(fs.node);
    const Point nrm = fs.normal;
    const Point tan(-nrm.y(), nrm.x());
    const bool u_is_normal = std::abs(nrm.x()) >= std::abs(nrm.y());
    const int normal_row = u_is_normal ? iu : iv;
    const int tangent_row = u_is_normal ? iv : iu;
    if (r) {
      const double rt = tan.x() * (*r)[iu] + tan.y() * (*r)[iv];
      (*r)[normal_row] = nrm.x() * x[iu] + nrm.y() * x[iv];
      (*r)[tangent_row] = rt;
    }
    if (matrix) {
      const int len = outer[iu + 1] - outer[iu];
      if (len != outer[iv + 1] - outer[iv]) throw SolverError("velocity rows with different sparsity");
      double* a = values + outer[iu];
      double* b = values + outer[iv];
      for (int k = 0; k < len; ++k) {
        const double t = tan.x() * a[k] + tan.y() * b[k];
        (u_is_normal ? b : a)[k] = t;
      }
      double* nr = values + outer[normal_row];
      std::fill(nr, nr + len, 0.0);
      const int* cols = inner + outer[normal_row];
      nr[std::lower_bound(cols, cols + len, iu) - cols] = nrm.x();
      nr[std::lower_bound(cols, cols + len, iv) - cols] = nrm.y();
    }
  }
  for (const auto& d : dirichlet_) {
    if (r) (*r)[d.dof] = x[d.dof] - d.value;
    if (matrix) set_unit_row(d.dof, d.dof, 1.0);
  }
  if (pin_) {
    const int row = space_->p(pin_->first);
    if (r) (*r)[row] = x[row] - pin_->second;
    if (matrix) set_unit_row(row, row, 1.0);
  }
}

Eigen::VectorXd NavierStokesProblem::raw_residual(const Eigen::VectorXd& x) {
  Eigen::VectorXd r;
  assemble(x, &r, false);
  return r;
}

Eigen::VectorXd NavierStokesProblem::residual(const Eigen::VectorXd& x) {
  Eigen::VectorXd r;
  assemble(x, &r, false);
  apply_constraints(x, &r, false);
  return r;
}

const SparseMatrix& NavierStokesProblem::jacobian(const Eigen::VectorXd& x) {
  assemble(x, nullptr, true);
  apply_constraints(x, nullptr, true);
  return jac_;
}

Eigen::VectorXd interpolate_velocity(const MixedSpace& space, const CoordinateField& coords,
                                     const std::function<Point(const Point&)>& f) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(space.n_dofs());
  for (int i = 0; i < space.n_velocity_nodes(); ++i) {
    const Point v = f(coords.nodes()[i]);
    x[space.u(i)] = v.x();
    x[space.v(i)] = v.y();
  }
  return x;
}

std::vector<Point> pressure_node_positions(const MixedSpace& space, const CoordinateField& coords) {
  const auto& pre = space.pressure();
  const auto& rp = reference_triangle(pre.order());
  const auto& rv = coords.reference();
  std::vector<Point> out(pre.n_dofs(), Point::Zero());
  Eigen::MatrixXd basis(rp.n_nodes(), rv.n_nodes());
  for (int k = 0; k < rp.n_nodes(); ++k) basis.row(k) = rv.basis(rp.nodes()[k]).transpose();
  for (int c = 0; c < pre.n_cells(); ++c) {
    const Eigen::MatrixX2d xy = basis * coords.cell_nodes(c);
    const auto d = pre.cell_dofs(c);
    for (int k = 0; k < rp.n_nodes(); ++k) out[d[k]] = xy.row(k).transpose();
  }
  return out;
}

void interpolate_pressure(const MixedSpace& space, const CoordinateField& coords,
                          const std::function<double(const Point&)>& g, Eigen::VectorXd& x) {
  const auto pts = pressure_node_positions(space, coords);
  for (std::size_t k = 0; k < pts.size(); ++k) x[space.p(static_cast<int>(k))] = g(pts[k]);
}

}  // namespace semflow
