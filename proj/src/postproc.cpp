#include "semflow/postproc.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace semflow {

namespace {

poly::Rule1D facet_rule(int order) { return poly::gauss_legendre(order + 8); }

void require_tag(const Mesh2D& mesh, BoundaryTag tag) {
  for (auto t : mesh.tags_present())
    if (t == tag) return;
  throw InputError("boundary tag '" + std::string(to_string(tag)) + "' is not present in the mesh");
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

ForceResult body_forces(const NavierStokesProblem& problem, const Eigen::VectorXd& x, BoundaryTag tag,
                        double length, double u_ref) {
  const auto& space = problem.space();
  const auto& mesh = space.mesh();
  require_tag(mesh, tag);
  if (!(length > 0) || !(u_ref > 0)) throw InputError("reference length and velocity must be positive");
  const auto& coords = problem.coordinates();
  const auto& vel = space.velocity();
  const auto& pre = space.pressure();
  const auto& rv = coords.reference();
  const auto& rp = reference_triangle(pre.order());
  const double nu = 1.0 / problem.reynolds();
  const auto rule = facet_rule(vel.order());

  double fx = 0, fy = 0;
  for (const auto& f : boundary_facets(mesh, tag)) {
    const auto dv = vel.cell_dofs(f.cell);
    const auto dp = pre.cell_dofs(f.cell);
    Eigen::VectorXd ul(vel.n_local()), vl(vel.n_local()), pl(pre.n_local());
    for (int i = 0; i < vel.n_local(); ++i) {
      ul[i] = x[space.u(dv[i])];
      vl[i] = x[space.v(dv[i])];
    }
    for (int k = 0; k < pre.n_local(); ++k) pl[k] = x[space.p(dp[k])];
    for (const auto& fp : facet_points(coords, f, rule)) {
      const Eigen::Matrix2d jinv = coords.jacobian(f.cell, fp.rs).inverse();
      const Eigen::MatrixX2d g = rv.basis_gradient(fp.rs) * jinv;  // physical gradients
      const double ux = g.col(0).dot(ul), uy = g.col(1).dot(ul);
      const double vx = g.col(0).dot(vl), vy = g.col(1).dot(vl);
      const double p = rp.basis(fp.rs).dot(pl);
      Eigen::Matrix2d sigma;
      sigma << -p + 2 * nu * ux, nu * (uy + vx), nu * (uy + vx), -p + 2 * nu * vy;
      // fp.normal points out of the fluid; the body feels -sigma n.
      const Point t = -(sigma * fp.normal);
      fx += fp.weight * t.x();
      fy += fp.weight * t.y();
    }
  }
  ForceResult r;
  r.fx = fx;
  r.fy = fy;
  r.length = length;
  r.u_ref = u_ref;
  const double q = 0.5 * u_ref * u_ref * length;
  r.cd = fx / q;
  r.cl = fy / q;
  return r;
}

double boundary_length(const CoordinateField& field, BoundaryTag tag) {
  require_tag(field.mesh(), tag);
  const auto rule = facet_rule(field.order());
  double sum = 0;
  for (const auto& f : boundary_facets(field.mesh(), tag))
    for (const auto& fp : facet_points(field, f, rule)) sum += fp.weight;
  return sum;
}

double enclosed_area(const CoordinateField& field) { return Geometry(field).area(); }

double boundary_flux(const NavierStokesProblem& problem, const Eigen::VectorXd& x, BoundaryTag tag) {
  const auto& space = problem.space();
  require_tag(space.mesh(), tag);
  const auto& coords = problem.coordinates();
  const auto& vel = space.velocity();
  const auto& rv = coords.reference();
  const auto rule = facet_rule(vel.order());
  double sum = 0;
  for (const auto& f : boundary_facets(space.mesh(), tag)) {
    const auto dv = vel.cell_dofs(f.cell);
    for (const auto& fp : facet_points(coords, f, rule)) {
      const Eigen::VectorXd b = rv.basis(fp.rs);
      double u = 0, v = 0;
      for (int i = 0; i < vel.n_local(); ++i) {
        u += b[i] * x[space.u(dv[i])];
        v += b[i] * x[space.v(dv[i])];
      }
      sum += fp.weight * (u * fp.normal.x() + v * fp.normal.y());
    }
  }
  return sum;
}

double velocity_l2_error(const NavierStokesProblem& problem, const Eigen::VectorXd& x,
                         const std::function<Point(const Point&)>& exact) {
  const auto& space = problem.space();
  const auto& geo = problem.geometry();
  const auto& vel = space.velocity();
  const auto& rv = reference_triangle(vel.order(), geo.quadrature_degree());
  const Eigen::MatrixXd& phi = rv.basis_at_quadrature();
  double sum = 0;
  Eigen::VectorXd ul(vel.n_local()), vl(vel.n_local());
  for (int c = 0; c < vel.n_cells(); ++c) {
    const auto dv = vel.cell_dofs(c);
    for (int i = 0; i < vel.n_local(); ++i) {
      ul[i] = x[space.u(dv[i])];
      vl[i] = x[space.v(dv[i])];
    }
    const Eigen::VectorXd uq = phi * ul, vq = phi * vl;
    for (int q = 0; q < geo.n_quad(); ++q) {
      const Point e = exact(geo.point(c, q));
      sum += geo.jxw(c, q) * ((uq[q] - e.x()) * (uq[q] - e.x()) + (vq[q] - e.y()) * (vq[q] - e.y()));
    }
  }
  return std::sqrt(sum);
}

PointLocator::PointLocator(const CoordinateField& field) : field_(&field) {
  const int nc = static_cast<int>(field.mesh().n_cells());
  boxes_.resize(nc);
  for (int c = 0; c < nc; ++c) {
    const Eigen::MatrixX2d xy = field.cell_nodes(c);
    // Curved edges may bulge slightly past their nodes.
    const double pad = 0.05 * (xy.colwise().maxCoeff() - xy.colwise().minCoeff()).norm() + 1e-12;
    boxes_[c] << xy.col(0).minCoeff() - pad, xy.col(0).maxCoeff() + pad, xy.col(1).minCoeff() - pad,
        xy.col(1).maxCoeff() + pad;
  }
}

bool PointLocator::invert(int cell, const Point& p, Point& rs) const {
  const auto& v = field_->mesh().cells()[cell];
  const auto& verts = field_->mesh().vertices();
  const Point a = verts[v[0]];
  Eigen::Matrix2d aff;
  aff.col(0) = verts[v[1]] - a;
  aff.col(1) = verts[v[2]] - a;
  rs = aff.inverse() * (p - a);
  const double scale = std::max(aff.norm(), 1e-300);
  for (int it = 0; it < 20; ++it) {
    const Point f = field_->map(cell, rs) - p;
    if (f.norm() <= 1e-12 * scale) return true;
    const Eigen::Matrix2d j = field_->jacobian(cell, rs);
    rs -= j.inverse() * f;
    if (!rs.allFinite() || rs.norm() > 10) return false;
  }
  return (field_->map(cell, rs) - p).norm() <= 1e-12 * scale;
}

PointLocator::Hit PointLocator::locate(const Point& p, int start_cell) const {
  const auto& mesh = field_->mesh();
  const int nc = static_cast<int>(mesh.n_cells());
  constexpr double tol = 1e-10;
  auto inside = [&](const Point& rs) { return rs.x() >= -tol && rs.y() >= -tol && rs.x() + rs.y() <= 1 + tol; };

  Hit hit;
  Point rs;
  int cell = start_cell >= 0 && start_cell < nc ? start_cell : 0;
  for (int step = 0; step < nc && step < 4096; ++step) {
    if (!invert(cell, p, rs)) break;
    if (inside(rs)) return {true, cell, rs};
    // Cross the edge with the most negative barycentric coordinate.
    const double lam[3] = {1 - rs.x() - rs.y(), rs.x(), rs.y()};
    // Edge k runs from vertex k to k+1 and is opposite vertex k+2.
    int edge = 0;
    double worst = lam[2];
    if (lam[0] < worst) worst = lam[0], edge = 1;
    if (lam[1] < worst) worst = lam[1], edge = 2;
    const auto& e = mesh.edges()[mesh.cell_edge(cell, edge)];
    const int next = e.cells[0] == cell ? e.cells[1] : e.cells[0];
    if (next < 0) break;
    cell = next;
  }
  for (int c = 0; c < nc; ++c) {
    const auto& b = boxes_[c];
    if (p.x() < b[0] || p.x() > b[1] || p.y() < b[2] || p.y() > b[3]) continue;
    if (invert(c, p, rs) && inside(rs)) return {true, c, rs};
  }
  return hit;
}

std::vector<Sample> sample_points(const NavierStokesProblem& problem, const Eigen::VectorXd& x,
                                  const std::vector<Point>& points) {
  const auto& space = problem.space();
  const auto& vel = space.velocity();
  const auto& pre = space.pressure();
  const auto& rv = problem.coordinates().reference();
  const auto& rp = reference_triangle(pre.order());
  const PointLocator locator(problem.coordinates());
  std::vector<Sample> out;
  out.reserve(points.size());
  int last = -1;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& pt : points) {
    Sample s;
    s.x = pt;
    const auto hit = locator.locate(pt, last);
    if (!hit.inside) {
      s.u = s.v = s.p = nan;
      out.push_back(s);
      continue;
    }
    last = hit.cell;
    s.inside = true;
    const Eigen::VectorXd bv = rv.basis(hit.rs);
    const Eigen::VectorXd bp = rp.basis(hit.rs);
    const auto dv = vel.cell_dofs(hit.cell);
    const auto dp = pre.cell_dofs(hit.cell);
    for (int i = 0; i < vel.n_local(); ++i) {
      s.u += bv[i] * x[space.u(dv[i])];
      s.v += bv[i] * x[space.v(dv[i])];
    }
    for (int k = 0; k < pre.n_local(); ++k) s.p += bp[k] * x[space.p(dp[k])];
    out.push_back(s);
  }
  return out;
}

std::vector<Sample> sample_line(const NavierStokesProblem& problem, const Eigen::VectorXd& x, const Point& a,
                                const Point& b, int n) {
  if (n < 2) throw InputError("a sample line needs at least two points");
  std::vector<Point> pts(n);
  for (int i = 0; i < n; ++i) pts[i] = a + (b - a) * (static_cast<double>(i) / (n - 1));
  return sample_points(problem, x, pts);
}

void write_samples_csv(std::ostream& os, const std::vector<Sample>& samples) {
  os << "x,y,u,v,p_d\n";
  for (const auto& s : samples)
    os << format_double(s.x.x()) << ',' << format_double(s.x.y()) << ',' << format_double(s.u) << ','
       << format_double(s.v) << ',' << format_double(s.p) << '\n';
}

void write_profile_csv(std::ostream& os, const SurfaceProfile& profile) {
  if (profile.x.size() != profile.eta.size()) throw InputError("profile columns differ in length");
  os << "x,eta\n";
  for (std::size_t i = 0; i < profile.x.size(); ++i)
    os << format_double(profile.x[i]) << ',' << format_double(profile.eta[i]) << '\n';
}

SurfaceProfile read_profile_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InputError("empty profile file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "x,eta") throw InputError("profile header must be 'x,eta', got '" + line + "'");
  SurfaceProfile p;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    double a = 0, b = 0;
    const char* end = line.data() + line.size();
    const auto r1 = std::from_chars(line.data(), line.data() + (comma == std::string::npos ? 0 : comma), a);
    const auto r2 = comma == std::string::npos ? r1 : std::from_chars(line.data() + comma + 1, end, b);
    if (comma == std::string::npos || r1.ec != std::errc() || r2.ec != std::errc() || r2.ptr != end)
      throw InputError("malformed profile line " + std::to_string(lineno) + ": '" + line + "'");
    p.x.push_back(a);
    p.eta.push_back(b);
  }
  return p;
}

void write_profile_csv(const std::string& path, const SurfaceProfile& profile) {
  std::ofstream f(path);
  if (!f) throw InputError("cannot write " + path);
  write_profile_csv(f, profile);
}

SurfaceProfile read_profile_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot read " + path);
  return read_profile_csv(f);
}

double interpolate_profile(const SurfaceProfile& profile, double x) {
  const auto& xs = profile.x;
  if (xs.empty()) throw InputError("empty profile");
  if (x <= xs.front()) return profile.eta.front();
  if (x >= xs.back()) return profile.eta.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - xs.begin());
  const double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
  return (1 - t) * profile.eta[i - 1] + t * profile.eta[i];
}

double interpolate_profile(const SurfaceProfile& profile, double x, int order) {
  if (order <= 1) return interpolate_profile(profile, x);
  const auto& xs = profile.x;
  if (xs.size() < 2 || (xs.size() - 1) % order) throw InputError("profile length does not match order " + std::to_string(order));
  if (x <= xs.front()) return profile.eta.front();
  if (x >= xs.back()) return profile.eta.back();
  const std::size_t n_el = (xs.size() - 1) / order;
  std::size_t lo = 0, hi = n_el;  // element e spans nodes [e P, (e + 1) P]
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    (xs[mid * order] <= x ? lo : hi) = mid;
  }
  const std::size_t first = lo * order;
  const std::span<const double> nodes(xs.data() + first, order + 1);
  const Eigen::VectorXd l = poly::lagrange_values(nodes, x);
  double v = 0;
  for (int j = 0; j <= order; ++j) v += l[j] * profile.eta[first + j];
  return v;
}

}  // namespace semflow
