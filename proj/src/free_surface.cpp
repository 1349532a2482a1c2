#include "semflow/free_surface.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include <Eigen/SparseLU>

namespace semflow {

double compute_damping(double x, double a, double x_d, double x_out) {
  if (x <= x_d) return 0.0;
  const double s = (x - x_d) / (x_out - x_d);
  return a * s * s;
}

double damping_onset(double x_out, double fr) { return x_out - 2.0 * std::numbers::pi * fr * fr; }

SurfaceMesh::SurfaceMesh(std::vector<double> x, std::vector<std::vector<int>> elements)
    : x_(std::move(x)), elements_(std::move(elements)) {
  if (elements_.empty()) throw InputError("surface mesh has no elements");
  order_ = static_cast<int>(elements_.front().size()) - 1;
  if (order_ < 1) throw InputError("surface elements need at least two nodes");
  const auto gll = poly::gll_points(order_);
  for (const auto& e : elements_) {
    if (static_cast<int>(e.size()) != order_ + 1) throw InputError("surface elements have mixed orders");
    const double xa = x_[e.front()], xb = x_[e.back()];
    if (!(xb > xa)) throw InputError("surface element with non-increasing x");
    for (int j = 0; j <= order_; ++j) {
      const double expect = xa + 0.5 * (gll[j] + 1.0) * (xb - xa);
      if (std::abs(x_[e[j]] - expect) > 1e-9 * (xb - xa))
        throw InputError("surface element nodes are not at GLL positions in x");
    }
  }
  for (std::size_t i = 1; i < x_.size(); ++i)
    if (!(x_[i] > x_[i - 1])) throw InputError("surface nodes must be ordered by increasing x");
}

SurfaceMesh::SurfaceMesh(const NavierStokesProblem& problem) {
  const auto& nodes = problem.surface_nodes();
  if (nodes.empty()) throw InputError("problem has no free-surface boundary");
  const auto& coords = problem.coordinates();
  std::unordered_map<int, int> index;
  std::vector<double> x(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    index[nodes[i]] = static_cast<int>(i);
    x[i] = coords.nodes()[nodes[i]].x();
  }
  std::vector<std::vector<int>> elements;
  const auto& vel = problem.space().velocity();
  const auto& ref = coords.reference();
  for (const auto& [tag, bc] : problem.bcs().entries()) {
    if (bc.kind != BCKind::free_surface) continue;
    for (const auto& f : boundary_facets(problem.space().mesh(), tag)) {
      const auto d = vel.cell_dofs(f.cell);
      std::vector<int> e;
      for (int local : ref.edge_nodes(f.local_edge)) e.push_back(index.at(d[local]));
      if (x[e.front()] > x[e.back()]) std::reverse(e.begin(), e.end());
      elements.push_back(std::move(e));
    }
  }
  std::sort(elements.begin(), elements.end(), [&](const auto& a, const auto& b) { return x[a[0]] < x[b[0]]; });
  *this = SurfaceMesh(std::move(x), std::move(elements));
}

double SurfaceMesh::min_spacing() const {
  double h = std::numeric_limits<double>::infinity();
  for (const auto& e : elements_) h = std::min(h, x_[e.back()] - x_[e.front()]);
  return h;
}

std::vector<double> kinematic_step(const SurfaceMesh& mesh, const std::vector<double>& eta,
                                   const std::vector<double>& u, const std::vector<double>& v, double dt,
                                   const std::function<double(double)>& gamma) {
  const int n = mesh.n_nodes();
  if (static_cast<int>(eta.size()) != n || static_cast<int>(u.size()) != n || static_cast<int>(v.size()) != n)
    throw InputError("surface traces must have one value per surface node");
  if (!(dt > 0)) throw InputError("pseudo-time step must be positive");
  for (int i = 0; i < n; ++i)
    if (!std::isfinite(u[i]) || !std::isfinite(v[i]) || !std::isfinite(eta[i]))
      throw InputError("non-finite surface trace at x = " + std::to_string(mesh.x()[i]));

  const int p = mesh.order();
  const auto rule = poly::gauss_lobatto(p);
  Eigen::MatrixXd d(p + 1, p + 1);  // d(i, j) = l_j'(xi_i) on [-1, 1]
  for (int i = 0; i <= p; ++i) d.row(i) = poly::lagrange_derivatives(rule.points, rule.points[i]).transpose();

  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (const auto& e : mesh.elements()) {
    const double h = mesh.x()[e.back()] - mesh.x()[e.front()];
    const double jac = 0.5 * h;
    for (int i = 0; i <= p; ++i) {
      const int gi = e[i];
      const double w = rule.weights[i] * jac;
      const double xi = mesh.x()[gi];
      trip.emplace_back(gi, gi, w * (1.0 / dt + gamma(xi)));
      for (int j = 0; j <= p; ++j) trip.emplace_back(gi, e[j], w * u[gi] * d(i, j) / jac);
      rhs[gi] += w * (eta[gi] / dt + v[gi]);
    }
  }
  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(trip.begin(), trip.end());
  // eta(x_in) = 0 at node 0.
  for (Eigen::SparseMatrix<double>::InnerIterator it(a, 0); it; ++it) it.valueRef() = 0.0;
  for (int k = 0; k < a.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(a, k); it; ++it)
      if (it.row() == 0) it.valueRef() = it.col() == 0 ? 1.0 : 0.0;
  rhs[0] = 0.0;
  a.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw SolverError("singular kinematic system: " + lu.lastErrorMessage());
  const Eigen::VectorXd sol = lu.solve(rhs);
  if (!sol.allFinite()) throw SolverError("kinematic step produced non-finite elevation");
  return {sol.data(), sol.data() + n};
}

double cfl_timestep(double spacing, const std::vector<double>& u, double cfl, double fallback) {
  if (!(spacing > 0) || !(cfl > 0)) throw InputError("CFL spacing and number must be positive");
  double umax = 0;
  for (double x : u) umax = std::max(umax, std::abs(x));
  if (umax == 0.0) {
    if (!(fallback > 0)) throw InputError("zero surface velocity and no positive fallback step");
    return fallback;
  }
  return cfl * spacing / umax;
}

double surface_change(const std::vector<double>& eta, const std::vector<double>& eta_new) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < eta.size(); ++i) {
    num += (eta_new[i] - eta[i]) * (eta_new[i] - eta[i]);
    den += eta[i] * eta[i];
  }
  num = std::sqrt(num);
  den = std::sqrt(den);
  return den < 1e-14 ? num : num / den;
}

void surface_traces(const NavierStokesProblem& problem, const Eigen::VectorXd& x, std::vector<double>& u,
                    std::vector<double>& v) {
  const auto& nodes = problem.surface_nodes();
  u.resize(nodes.size());
  v.resize(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    u[i] = x[problem.space().u(nodes[i])];
    v[i] = x[problem.space().v(nodes[i])];
  }
}

std::ostream& operator<<(std::ostream& os, const FreeSurfaceStep& s) {
  const auto flags = os.flags();
  os << "tau " << s.tau << " D " << std::scientific << std::setprecision(6) << s.d << " newton "
     << s.newton_iterations << " eta_min " << s.eta_min << " eta_max " << s.eta_max << " dt " << s.dt
     << " time " << std::fixed << std::setprecision(3) << s.seconds;
  os.flags(flags);
  return os;
}

SteadyResult steady_loop(NavierStokesProblem& problem, CoordinateField& coords, Eigen::VectorXd& x,
                         FreeSurfaceState& state, const FreeSurfaceOptions& options,
                         const std::function<void(const FreeSurfaceStep&)>& callback) {
  if (&problem.coordinates() != &coords) throw InputError("problem does not use the given coordinate field");
  if (!(problem.froude() > 0)) throw InputError("free-surface runs need a positive Froude number");
  if (options.max_steps < 1 || !(options.tolerance > 0)) throw InputError("invalid free-surface loop options");
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();

  const SurfaceMesh surface(problem);
  state.x = surface.x();
  if (state.eta.empty()) state.eta.assign(state.x.size(), 0.0);
  if (state.eta.size() != state.x.size()) throw InputError("eta has the wrong length");
  state.x_out = state.x.back();
  state.x_d = damping_onset(state.x_out, problem.froude());
  problem.set_surface_elevation(state.eta);

  MeshMorpher morpher(coords, problem.surface_nodes(), options.y0);
  auto heights = [&](const std::vector<double>& eta) {
    std::vector<double> y(eta.size());
    for (std::size_t i = 0; i < eta.size(); ++i) y[i] = options.level + eta[i];
    return y;
  };
  auto solve_flow = [&](int tau) {
    const auto res = newton_solve(problem, x, options.newton, "tau=" + std::to_string(tau));
    if (!res.converged) {
      std::ostringstream os;
      os << "flow solve failed at pseudo-time step " << tau << ": "
         << (res.message.empty() ? "not converged" : res.message) << " (residual " << res.final_residual << ")";
      throw SolverError(os.str());
    }
    return res.iterations;
  };

  SteadyResult out;
  std::vector<double> us, vs;
  for (int tau = state.tau + 1; tau <= state.tau + options.max_steps; ++tau) {
    const int its = solve_flow(tau);
    surface_traces(problem, x, us, vs);
    state.dt = cfl_timestep(surface.min_spacing(), us, options.cfl, options.fallback_dt);
    state.damping_a = options.damping_c / state.dt;
    const double a = state.damping_a, xd = state.x_d, xo = state.x_out;
    auto eta_new = kinematic_step(surface, state.eta, us, vs, state.dt,
                                  [&](double xx) { return compute_damping(xx, a, xd, xo); });
    const double d = surface_change(state.eta, eta_new);
    morpher.morph(coords, heights(state.eta), heights(eta_new), tau);
    problem.update_geometry();
    problem.set_surface_elevation(eta_new);
    state.eta = std::move(eta_new);

    FreeSurfaceStep step;
    step.tau = tau;
    step.d = d;
    step.newton_iterations = its;
    step.eta_min = *std::min_element(state.eta.begin(), state.eta.end());
    step.eta_max = *std::max_element(state.eta.begin(), state.eta.end());
    step.dt = state.dt;
    step.seconds = std::chrono::duration<double>(clock::now() - t0).count();
    if (callback) callback(step);
    out.report.push_back(step);
    out.steps += 1;
    out.final_d = d;
    if (!std::isfinite(d)) {
      out.message = "non-finite surface change";
      break;
    }
    if (d < options.tolerance) {
      out.converged = true;
      break;
    }
  }
  state.tau += out.steps;
  if (out.converged) {
    solve_flow(state.tau);
  } else if (out.message.empty()) {
    std::ostringstream os;
    os << "no steady surface after " << out.steps << " steps (D = " << out.final_d << ")";
    out.message = os.str();
  }
  return out;
}

}  // namespace semflow
