#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "semflow/common.hpp"
#include "semflow/curves.hpp"
#include "semflow/mesh.hpp"

namespace semflow {

enum class CaseKind { cavity, channel_naca, channel_cylinder, bump_fs, naca_fs, custom, poiseuille, kovasznay };

std::string_view to_string(CaseKind kind);
CaseKind parse_case_kind(std::string_view name);
bool is_free_surface(CaseKind kind);

/// Boundary condition kinds accepted in the [bc] table. `exact` and
/// `exact_traction` take their data from the analytic solution of the
/// poiseuille and kovasznay cases.
enum class BCSpecKind { no_slip, dirichlet, free_slip, traction_free, free_surface, exact, exact_traction };

std::string_view to_string(BCSpecKind kind);
BCSpecKind parse_bc_kind(std::string_view name);

struct BCSpec {
  BCSpecKind kind = BCSpecKind::traction_free;
  Point value = Point::Zero();
  bool operator==(const BCSpec&) const = default;
};

struct MeshConfig {
  std::string file;  // Gmsh MSH 2.2; empty selects the case generator
  int refinements = 0;
  int n = 16;  // cells per side for square and rectangle generators
  double dx = 0.25;
  int ny = 6;
  double layer_ratio = 1.0;
  int body_points = 8;
  int layers = 2;
  double layer_growth = 1.0;
  std::vector<double> box{-1.0, 1.0, -1.0, 1.0};
  std::vector<int> blocks{1, 2, 1, 1};  // left, right, bottom, top block resolution
  bool curved = true;
  TagTable tag_names;  // physical-group names of the mesh file
  bool operator==(const MeshConfig&) const = default;
};

struct DomainConfig {
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  bool operator==(const DomainConfig&) const = default;
};

struct FlowConfig {
  int order = 3;
  double re = 100.0;
  double fr = 0.0;
  double alpha = 0.0;  // degrees
  double depth = 1.252;
  double chord = 1.0;
  double bump_height = 0.2;
  double bump_length = 2.0;
  bool operator==(const FlowConfig&) const = default;
};

struct SolverConfig {
  std::string linear = "sparse_direct";
  int gmres_restart = 200;
  int ilu_fill = 1;
  double linear_tolerance = 1e-10;
  double rtol = 1e-8;
  double atol = 1e-10;
  int max_iterations = 50;
  bool step_halving = false;
  double continuation_start = 0.0;  // 0: solve directly at the target Re
  bool operator==(const SolverConfig&) const = default;
};

struct FreeSurfaceConfig {
  double tolerance = 1e-6;
  int max_steps = 500;
  double cfl = 0.5;
  double damping_c = 1.0;
  double level = 0.0;
  double y0 = -0.5;
  bool operator==(const FreeSurfaceConfig&) const = default;
};

struct OutputConfig {
  std::string dir = "out";
  bool fields = true;
  int samples = 129;
  bool operator==(const OutputConfig&) const = default;
};

struct SweepConfig {
  std::vector<int> refinements;
  std::vector<int> orders;
  std::vector<double> tolerances;
  std::string metric = "cl";  // cl, cd or l2 (velocity error against the exact solution)
  double reference = 0.0;
  int repeat = 3;
  bool operator==(const SweepConfig&) const = default;
};

struct CaseConfig {
  CaseKind kind = CaseKind::cavity;
  std::string name;
  MeshConfig mesh;
  DomainConfig domain;
  FlowConfig flow;
  std::map<BoundaryTag, BCSpec> bc;
  SolverConfig solver;
  FreeSurfaceConfig free_surface;
  OutputConfig output;
  SweepConfig sweep;
  bool operator==(const CaseConfig&) const = default;
};

/// Defaults for every field of `kind` (geometry, BC table, solver settings).
CaseConfig default_config(CaseKind kind);

/// Parses TOML text. Keys override default_config(case); unknown keys and
/// inconsistent values raise InputError with the offending key.
CaseConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
CaseConfig load_config(const std::filesystem::path& path);
/// TOML text with every field; parse_config(serialize_config(c)) == c.
std::string serialize_config(const CaseConfig& config);

/// Throws InputError when an invariant fails (order range, Fr for free-surface
/// cases, body outside the domain, missing mesh file for custom cases).
void validate_config(const CaseConfig& config);

}  // namespace semflow
