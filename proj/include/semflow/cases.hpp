#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "semflow/config.hpp"
#include "semflow/free_surface.hpp"
#include "semflow/postproc.hpp"

namespace semflow {

/// Closed-form solution attached to the poiseuille and kovasznay cases.
struct ExactSolution {
  std::function<Point(const Point&)> velocity;
  std::function<double(const Point&)> pressure;
  /// sigma.n on a boundary with outward normal +x.
  std::function<Point(const Point&)> outflow_traction;
};

std::optional<ExactSolution> exact_solution(const CaseConfig& config);

/// Mesh of the case before any curving (generator or file, refinements applied).
Mesh2D build_mesh(const CaseConfig& config);

/// Boundary curve of the body (or the bump bed); nullopt when the case has none.
std::optional<BoundaryCurve> case_curve(const CaseConfig& config);

/// Everything needed to solve one case. Not copyable: the problem points into
/// the space and coordinate field.
struct CaseSetup {
  CaseConfig config;
  std::shared_ptr<const Mesh2D> mesh;
  std::unique_ptr<MixedSpace> space;
  std::unique_ptr<CoordinateField> coords;
  std::unique_ptr<NavierStokesProblem> problem;
  std::optional<ExactSolution> exact;
  std::optional<BoundaryCurve> curve;
  BoundaryTag curve_tag = BoundaryTag::body;
  bool free_surface = false;
};

/// Builds mesh, curved coordinates, spaces, BCs and the problem; pins the
/// pressure when no boundary carries a natural condition.
CaseSetup build_case(const CaseConfig& config);

NewtonOptions newton_options(const SolverConfig& solver);
FreeSurfaceOptions free_surface_options(const CaseConfig& config);

struct CaseResult {
  bool converged = false;
  std::string message;
  int dofs = 0;
  MeshStats mesh_stats;
  int newton_iterations = 0;
  double seconds = 0.0;
  std::vector<IterationRecord> history;
  std::optional<ForceResult> forces;
  std::optional<double> l2_error;
  // Free-surface runs only.
  int steps = 0;
  double final_d = 0.0;
  std::vector<FreeSurfaceStep> surface_history;
  SurfaceProfile profile;
  std::map<BoundaryTag, double> fluxes;
};

/// Solves a built case in place (setup.problem and `x` hold the final state).
/// Module errors propagate; non-convergence is reported in the result.
CaseResult solve_case(CaseSetup& setup, Eigen::VectorXd& x, std::ostream* log = nullptr);

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;  // overrides config.output.dir
  std::ostream* log = nullptr;                   // progress lines; null for quiet
};

/// Builds, solves and writes the case artifacts into the output directory:
/// report.txt, history.csv, plus forces.csv, profile.csv, surface_history.csv,
/// midline_u.csv / midline_v.csv and fields.vtk as applicable.
/// Returns 0 when converged and 2 otherwise; errors are rethrown with the case name.
int run_case(const CaseConfig& config, const RunOptions& options = {}, CaseResult* result = nullptr);

struct BenchRecord {
  std::string case_id;
  int mesh_id = 0;
  int order = 0;
  int pressure_order = 0;
  int dofs = 0;
  bool converged = false;
  double value = 0.0;  // metric value (C_L, C_D or L2 error)
  double error = 0.0;  // |value - reference| (L2 error itself for l2)
  double t_mean = 0.0, t_min = 0.0, t_max = 0.0;
  int repeats = 0;
};

struct SpeedupEntry {
  int mesh_id = 0;
  int order = 0;  // minimal passing order on this mesh
  double time = 0.0;
  double speedup = 0.0;  // t_reference / time
};

struct ToleranceRow {
  double tolerance = 0.0;
  bool reachable = false;
  int reference_mesh = -1;
  int reference_order = -1;
  double reference_time = 0.0;
  std::vector<SpeedupEntry> entries;
};

struct SweepResult {
  std::vector<BenchRecord> records;
  std::vector<ToleranceRow> table;
};

/// Speed-up table from existing records: per tolerance, the minimal passing
/// order on each mesh, against the fastest configuration of the lowest
/// passing order.
std::vector<ToleranceRow> speedup_table(const std::vector<BenchRecord>& records, const std::vector<double>& tolerances);

/// Runs every (refinement, order) pair of config.sweep sequentially with
/// `repeat` timed solves each (wall time of build + solve) and builds the table.
SweepResult sweep(const CaseConfig& config, std::ostream* log = nullptr);

void write_records_csv(std::ostream& os, const std::vector<BenchRecord>& records);
void write_speedup_csv(std::ostream& os, const std::vector<ToleranceRow>& table);
/// Writes records.csv and speedup.csv into `dir`.
void write_sweep(const std::filesystem::path& dir, const SweepResult& result);

}  // namespace semflow
