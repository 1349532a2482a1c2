#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Sparse>

#include "semflow/geometry.hpp"

namespace semflow {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

enum class BCKind { no_slip, dirichlet, free_slip, traction_free, traction, free_surface };

std::string_view to_string(BCKind kind);

/// Boundary condition attached to one tag. `value` is the prescribed velocity
/// (dirichlet) or traction sigma.n (traction) as a function of position.
struct BoundaryCondition {
  BCKind kind = BCKind::traction_free;
  std::function<Point(const Point&)> value;

  static BoundaryCondition no_slip() { return {BCKind::no_slip, nullptr}; }
  static BoundaryCondition dirichlet(Point u) {
    return {BCKind::dirichlet, [u](const Point&) { return u; }};
  }
  static BoundaryCondition dirichlet(std::function<Point(const Point&)> f) { return {BCKind::dirichlet, std::move(f)}; }
  static BoundaryCondition free_slip() { return {BCKind::free_slip, nullptr}; }
  static BoundaryCondition traction_free() { return {BCKind::traction_free, nullptr}; }
  static BoundaryCondition traction(std::function<Point(const Point&)> t) { return {BCKind::traction, std::move(t)}; }
  static BoundaryCondition free_surface() { return {BCKind::free_surface, nullptr}; }
};

/// One boundary condition per tag. Where tags meet, no_slip outranks
/// dirichlet, which outranks free_slip, which outranks the natural kinds.
class BCSet {
 public:
  BCSet& set(BoundaryTag tag, BoundaryCondition bc) {
    bcs_[tag] = std::move(bc);
    return *this;
  }
  const BoundaryCondition* find(BoundaryTag tag) const {
    auto it = bcs_.find(tag);
    return it == bcs_.end() ? nullptr : &it->second;
  }
  const std::map<BoundaryTag, BoundaryCondition>& entries() const { return bcs_; }
  /// Throws InputError naming any mesh tag without a condition.
  void validate(const Mesh2D& mesh) const;

 private:
  std::map<BoundaryTag, BoundaryCondition> bcs_;
};

/// Taylor-Hood P / P-1 space. Unknowns are ordered [u, v, p_d].
class MixedSpace {
 public:
  MixedSpace(std::shared_ptr<const Mesh2D> mesh, int velocity_order);

  const Mesh2D& mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh2D> mesh_ptr() const { return mesh_; }
  int velocity_order() const { return velocity_.order(); }
  int pressure_order() const { return pressure_.order(); }
  const DofMap& velocity() const { return velocity_; }
  const DofMap& pressure() const { return pressure_; }

  int n_velocity_nodes() const { return velocity_.n_dofs(); }
  int n_pressure_nodes() const { return pressure_.n_dofs(); }
  int n_dofs() const { return 2 * velocity_.n_dofs() + pressure_.n_dofs(); }

  int u(int node) const { return node; }
  int v(int node) const { return velocity_.n_dofs() + node; }
  int p(int node) const { return 2 * velocity_.n_dofs() + node; }

 private:
  std::shared_ptr<const Mesh2D> mesh_;
  DofMap velocity_;
  DofMap pressure_;
};

struct FlowState {
  Eigen::VectorXd x;
  double re = 1.0;
  double fr = 0.0;
};

/// Residual/Jacobian pair driven by Newton.
class NonlinearProblem {
 public:
  virtual ~NonlinearProblem() = default;
  virtual int size() const = 0;
  virtual Eigen::VectorXd residual(const Eigen::VectorXd& x) = 0;
  virtual const SparseMatrix& jacobian(const Eigen::VectorXd& x) = 0;
};

/// Steady incompressible Navier-Stokes in the dynamic-pressure form.
///
/// Residual rows (test functions phi, q):
///   (2/Re)(D(u), D(phi)) + ((u.grad)u, phi) - (p_d, div phi) + <pbar n, phi>_surface - <t, phi>_traction
///   (q, div u)
/// with pbar = eta / Fr^2. Constrained rows are replaced by u - g (Dirichlet)
/// or, at free-slip nodes, by n.u in the row of the dominant normal component
/// and the tangential projection of the momentum residual in the other.
class NavierStokesProblem : public NonlinearProblem {
 public:
  NavierStokesProblem(const MixedSpace& space, const CoordinateField& coords, BCSet bcs, double re,
                      double fr = 0.0);

  int size() const override { return space_->n_dofs(); }
  Eigen::VectorXd residual(const Eigen::VectorXd& x) override;
  const SparseMatrix& jacobian(const Eigen::VectorXd& x) override;
  /// Residual without constraint rows applied (for diagnostics and tests).
  Eigen::VectorXd raw_residual(const Eigen::VectorXd& x);

  const MixedSpace& space() const { return *space_; }
  const CoordinateField& coordinates() const { return *coords_; }
  const Geometry& geometry() const { return geometry_; }
  const BCSet& bcs() const { return bcs_; }

  double reynolds() const { return re_; }
  double froude() const { return fr_; }
  void set_reynolds(double re);
  void set_froude(double fr);

  /// Velocity nodes on the free_surface tag, ordered by x.
  const std::vector<int>& surface_nodes() const { return surface_nodes_; }
  /// Elevation at each surface node (same order as surface_nodes()).
  void set_surface_elevation(std::vector<double> eta);
  const std::vector<double>& surface_elevation() const { return eta_; }

  /// Pins pressure node `node` to `value`; used for enclosed flows.
  void set_pressure_pin(std::optional<std::pair<int, double>> pin) { pin_ = pin; }
  const std::optional<std::pair<int, double>>& pressure_pin() const { return pin_; }

  /// Recomputes geometry factors, normals and constraint values after the
  /// coordinate field moved.
  void update_geometry();

  /// Zero field with every Dirichlet value imposed.
  Eigen::VectorXd initial_guess() const;

  struct Dirichlet {
    int dof;
    double value;
  };
  struct FreeSlip {
    int node;
    Point normal;
  };
  const std::vector<Dirichlet>& dirichlet() const { return dirichlet_; }
  const std::vector<FreeSlip>& free_slip() const { return free_slip_; }

 private:
  void build_pattern();
  void build_constraints();
  void assemble(const Eigen::VectorXd& x, Eigen::VectorXd* r, bool want_jacobian);
  void add_boundary_loads(Eigen::VectorXd& r) const;
  void apply_constraints(const Eigen::VectorXd& x, Eigen::VectorXd* r, bool matrix);

  const MixedSpace* space_;
  const CoordinateField* coords_;
  BCSet bcs_;
  double re_, fr_;
  Geometry geometry_;
  std::vector<int> surface_nodes_;
  std::vector<double> eta_;
  std::optional<std::pair<int, double>> pin_;
  std::vector<Dirichlet> dirichlet_;
  std::vector<FreeSlip> free_slip_;

  SparseMatrix jac_;
  std::vector<int> positions_;  // per cell, row-major local (m x m) -> value index
  int local_size_ = 0;
};

/// Lagrange interpolant of a vector field f on the velocity nodes, packed as [u, v, 0].
Eigen::VectorXd interpolate_velocity(const MixedSpace& space, const CoordinateField& coords,
                                     const std::function<Point(const Point&)>& f);

/// Pressure interpolant of g on the pressure nodes (positions from the geometry map).
void interpolate_pressure(const MixedSpace& space, const CoordinateField& coords,
                          const std::function<double(const Point&)>& g, Eigen::VectorXd& x);

/// Physical coordinates of the pressure nodes.
std::vector<Point> pressure_node_positions(const MixedSpace& space, const CoordinateField& coords);

}  // namespace semflow
