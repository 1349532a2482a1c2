#pragma once

#include <functional>
#include <string>
#include <vector>

#include "semflow/morph.hpp"
#include "semflow/solvers.hpp"

namespace semflow {

/// gamma(x) = a ((x - x_d)/(x_out - x_d))^2 on [x_d, x_out], zero before x_d.
double compute_damping(double x, double a, double x_d, double x_out);

/// Onset of the damping zone, x_out - 2 pi Fr^2.
double damping_onset(double x_out, double fr);

/// Order-P continuous 1D elements along the free surface, sharing the
/// surface velocity nodes of the 2D mesh. Node 0 is the inflow end.
class SurfaceMesh {
 public:
  SurfaceMesh() = default;
  /// Built from the free-surface facets of `problem`.
  explicit SurfaceMesh(const NavierStokesProblem& problem);
  /// Built directly from element node lists (indices into x, ascending).
  SurfaceMesh(std::vector<double> x, std::vector<std::vector<int>> elements);

  int order() const { return order_; }
  int n_nodes() const { return static_cast<int>(x_.size()); }
  const std::vector<double>& x() const { return x_; }
  const std::vector<std::vector<int>>& elements() const { return elements_; }
  /// Smallest horizontal element extent.
  double min_spacing() const;

 private:
  int order_ = 0;
  std::vector<double> x_;
  std::vector<std::vector<int>> elements_;
};

/// One implicit pseudo-time step of the kinematic condition
///   int [(eta' - eta)/dt + u d(eta')/dx - v + gamma eta'] phi dx = 0,
/// with eta'(x_in) = 0, integrated with the GLL rule on the element nodes
/// (diagonal mass). `gamma` is evaluated at the nodes.
std::vector<double> kinematic_step(const SurfaceMesh& mesh, const std::vector<double>& eta,
                                   const std::vector<double>& u, const std::vector<double>& v, double dt,
                                   const std::function<double(double)>& gamma);

/// dt = cfl * spacing / max|u|; `fallback` when every |u| is zero.
double cfl_timestep(double spacing, const std::vector<double>& u, double cfl = 0.5, double fallback = 0.1);

struct FreeSurfaceOptions {
  double tolerance = 1e-6;
  int max_steps = 500;
  double cfl = 0.5;
  double fallback_dt = 0.1;
  double damping_c = 1.0;
  double level = 0.0;  // still-water surface height
  double y0 = -0.5;    // morph threshold
  NewtonOptions newton;
};

struct FreeSurfaceState {
  std::vector<double> x;
  std::vector<double> eta;
  double dt = 0.0;
  double damping_a = 0.0;
  double x_d = 0.0;
  double x_out = 0.0;
  int tau = 0;
};

struct FreeSurfaceStep {
  int tau = 0;
  double d = 0.0;
  int newton_iterations = 0;
  double eta_min = 0.0;
  double eta_max = 0.0;
  double dt = 0.0;
  double seconds = 0.0;
};

std::ostream& operator<<(std::ostream& os, const FreeSurfaceStep& step);

struct SteadyResult {
  bool converged = false;
  int steps = 0;
  double final_d = 0.0;
  std::string message;
  std::vector<FreeSurfaceStep> report;
};

/// Relative change ||eta_new - eta||/||eta||, absolute when ||eta|| < 1e-14.
double surface_change(const std::vector<double>& eta, const std::vector<double>& eta_new);

/// Pseudo-time iteration to the steady free surface. Each step solves the flow
/// on the current domain, advances eta with kinematic_step, morphs `coords`
/// and refreshes the problem's geometry and surface load. After convergence the
/// flow is solved once more on the final domain so `x` matches the geometry.
/// Throws SolverError if a Newton solve fails and InvertedElementError if the
/// morph inverts a cell.
SteadyResult steady_loop(NavierStokesProblem& problem, CoordinateField& coords, Eigen::VectorXd& x,
                         FreeSurfaceState& state, const FreeSurfaceOptions& options,
                         const std::function<void(const FreeSurfaceStep&)>& callback = {});

/// Velocity components at the problem's surface nodes.
void surface_traces(const NavierStokesProblem& problem, const Eigen::VectorXd& x, std::vector<double>& u,
                    std::vector<double>& v);

}  // namespace semflow
