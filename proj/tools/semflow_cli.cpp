#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "semflow/cases.hpp"
#include "semflow/solvers.hpp"

using namespace semflow;

namespace {

void print_table(std::ostream& os, const SweepResult& s, const std::string& metric) {
  os << "\n  mesh  P-Q     dofs  " << std::setw(12) << metric << "  " << std::setw(10) << "error"
     << "  mean [s]    min [s]    max [s]\n";
  for (const auto& r : s.records) {
    os << std::setw(6) << r.mesh_id << "  " << r.order << "-" << r.pressure_order << std::setw(9) << r.dofs << "  "
       << std::setw(12) << std::setprecision(5) << r.value << "  " << std::setw(10) << std::setprecision(3) << r.error
       << "  " << std::setw(9) << r.t_mean << "  " << std::setw(9) << r.t_min << "  " << std::setw(9) << r.t_max
       << (r.converged ? "" : "  not converged") << '\n';
  }
  for (const auto& row : s.table) {
    os << "\ntolerance " << row.tolerance << ": ";
    if (!row.reachable) {
      os << "unreachable\n";
      continue;
    }
    os << "reference mesh " << row.reference_mesh << " P=" << row.reference_order << " (" << row.reference_time
       << " s)\n";
    for (const auto& e : row.entries)
      os << "  mesh " << e.mesh_id << "  minimal P=" << e.order << "  time " << e.time << " s  speed-up "
         << e.speedup << '\n';
  }
}

int inspect(const std::string& file, const std::vector<std::string>& maps) {
  TagTable names;
  for (const auto& m : maps) {
    const auto eq = m.find('=');
    if (eq == std::string::npos) throw InputError("--tag expects name=tag, got '" + m + "'");
    const auto tag = parse_boundary_tag(m.substr(eq + 1));
    if (!tag) throw InputError("unknown boundary tag in '" + m + "'");
    names[m.substr(0, eq)] = *tag;
  }
  const Mesh2D mesh = read_msh(file, names);
  const MeshStats st = mesh.stats();
  double min_area = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) min_area = std::min(min_area, mesh.signed_area(static_cast<int>(c)));
  std::cout << "vertices " << st.n_nodes << "\ncells " << st.n_elements << "\nedges " << mesh.n_edges() << '\n';
  for (auto& [tag, n] : st.boundary_edges) std::cout << "boundary_edges." << to_string(tag) << ' ' << n << '\n';
  std::cout << std::setprecision(12) << "area " << mesh.total_area() << "\nboundary_loop_area "
            << boundary_loop_area(mesh) << "\nmin_cell_area " << min_area << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Steady incompressible Navier-Stokes spectral element solver"};
  app.require_subcommand(1);
  bool quiet = false;
  std::string out_dir;
  int repeat = 0;
  std::string config_path, mesh_path;
  std::vector<std::string> tag_maps;

  auto* run = app.add_subcommand("run", "Solve one case from a TOML config");
  run->add_option("config", config_path, "Case config")->required()->check(CLI::ExistingFile);
  run->add_option("--out-dir", out_dir, "Output directory (overrides output.dir)");
  run->add_flag("--quiet,-q", quiet, "Suppress progress output");

  auto* sw = app.add_subcommand("sweep", "Mesh x order sweep with timing and speed-up table");
  sw->add_option("config", config_path, "Case config with a [sweep] section")->required()->check(CLI::ExistingFile);
  sw->add_option("--out-dir", out_dir, "Output directory (overrides output.dir)");
  sw->add_option("--repeat", repeat, "Timed repetitions per configuration")->check(CLI::PositiveNumber);
  sw->add_flag("--quiet,-q", quiet, "Suppress progress output");

  auto* ins = app.add_subcommand("inspect-mesh", "Print statistics of a Gmsh 2.2 mesh");
  ins->add_option("file", mesh_path, "Mesh file")->required()->check(CLI::ExistingFile);
  ins->add_option("--tag", tag_maps, "Map a physical name onto a boundary tag (name=tag)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const int threads = configure_threads();
    if (*ins) return inspect(mesh_path, tag_maps);

    CaseConfig config = load_config(config_path);
    std::ostream* log = quiet ? nullptr : &std::cerr;
    if (log) *log << "threads " << threads << ", direct solver " << (direct_uses_umfpack() ? "umfpack" : "sparselu") << '\n';
    if (*run) {
      RunOptions opts;
      if (!out_dir.empty()) opts.out_dir = out_dir;
      opts.log = log;
      CaseResult r;
      const int status = run_case(config, opts, &r);
      std::cout << config.name << ": " << (status == 0 ? "converged" : "not converged");
      if (r.forces) std::cout << std::setprecision(10) << "  C_D " << r.forces->cd << "  C_L " << r.forces->cl;
      if (r.l2_error) std::cout << "  L2 error " << *r.l2_error;
      if (r.steps) std::cout << "  steps " << r.steps << "  D " << r.final_d;
      std::cout << "  (" << r.seconds << " s)\n";
      return status;
    }
    if (repeat > 0) config.sweep.repeat = repeat;
    const SweepResult s = sweep(config, log);
    write_sweep(out_dir.empty() ? std::filesystem::path(config.output.dir) : std::filesystem::path(out_dir), s);
    print_table(std::cout, s, config.sweep.metric);
    for (const auto& r : s.records)
      if (!r.converged) return 2;
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
