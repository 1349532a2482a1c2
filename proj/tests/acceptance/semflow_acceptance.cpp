// Acceptance run: one PASS/FAIL line per criterion.
//
//   semflow_acceptance [--root DIR] [N ...]
//
// DIR holds configs/ and data/reference/ (defaults to the source tree).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "semflow/cases.hpp"
#include "semflow/mesh_generators.hpp"
#include "semflow/morph.hpp"

using namespace semflow;
namespace fs = std::filesystem;

namespace {

fs::path g_root = SEMFLOW_SOURCE_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 3) {
  std::ostringstream os;
  os << std::setprecision(digits) << v;
  return os.str();
}

double now() {
  using clock = std::chrono::steady_clock;
  static const auto t0 = clock::now();
  return std::chrono::duration<double>(clock::now() - t0).count();
}

CaseConfig config(const std::string& name) { return load_config(g_root / "configs" / name); }

std::vector<std::pair<double, double>> read_table(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::vector<std::pair<double, double>> rows;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double a = 0, b = 0;
    char comma = 0;
    std::istringstream is(line);
    if (!(is >> a >> comma >> b) || comma != ',') throw InputError("bad row in " + path.string() + ": " + line);
    rows.emplace_back(a, b);
  }
  return rows;
}

// 1. Curvilinear perimeter of the cylinder on Mesh 1.
Outcome geometry_convergence() {
  const double t0 = now();
  const CaseConfig c = config("cylinder_re15.toml");
  CaseConfig m1 = c;
  m1.mesh.refinements = 1;
  const auto mesh = std::make_shared<const Mesh2D>(build_mesh(m1));
  const auto circle = *case_curve(m1);
  const double perimeter = std::numbers::pi * c.flow.chord;
  std::vector<double> curved, affine;
  for (int p = 2; p <= 8; p += 2) {
    CoordinateField a(mesh, p);
    affine.push_back(std::abs(boundary_length(a, BoundaryTag::body) - perimeter));
    CoordinateField f(mesh, p);
    blend_to_curve(f, circle, BoundaryTag::body);
    curved.push_back(std::abs(boundary_length(f, BoundaryTag::body) - perimeter));
  }
  bool ok = curved.back() < 1e-10;
  for (std::size_t i = 1; i < curved.size(); ++i)
    if (curved[i - 1] >= 1e-10) ok = ok && curved[i - 1] / curved[i] >= 10;
  const auto [lo, hi] = std::minmax_element(affine.begin(), affine.end());
  const double spread = (*hi - *lo) / *lo;
  const double secs = now() - t0;
  ok = ok && spread < 0.05 && secs < 10;
  std::string d = "curved error P2/4/6/8:";
  for (double e : curved) d += " " + fmt(e);
  d += "; affine spread " + fmt(100 * spread) + "%; " + fmt(secs) + " s";
  return {ok, d};
}

// 2. Poiseuille at Re=1 from the zero state, straight and jiggled meshes.
Outcome poiseuille_exactness() {
  const double t0 = now();
  CaseConfig c = config("poiseuille.toml");
  const ExactSolution exact = *exact_solution(c);
  const Mesh2D straight = build_mesh(c);

  std::vector<Point> v = straight.vertices();
  std::mt19937 gen(11);
  const double hx = (c.domain.x1 - c.domain.x0) / c.mesh.n, hy = (c.domain.y1 - c.domain.y0) / c.mesh.ny;
  std::uniform_real_distribution<double> jig(-0.25, 0.25);
  for (auto& p : v) {
    const bool boundary = std::abs(p.x() - c.domain.x0) < 1e-12 || std::abs(p.x() - c.domain.x1) < 1e-12 ||
                          std::abs(p.y() - c.domain.y0) < 1e-12 || std::abs(p.y() - c.domain.y1) < 1e-12;
    if (!boundary) p += Point(jig(gen) * hx, jig(gen) * hy);
  }
  const Mesh2D jiggled(v, straight.cells(), straight.boundary_edges());

  double worst = 0;
  bool converged = true;
  for (const Mesh2D* m : {&straight, &jiggled}) {
    const auto mesh = std::make_shared<const Mesh2D>(*m);
    for (int p = 2; p <= 4; ++p) {
      MixedSpace space(mesh, p);
      CoordinateField coords(mesh, p);
      BCSet bcs;
      bcs.set(BoundaryTag::inflow, BoundaryCondition::dirichlet(exact.velocity));
      bcs.set(BoundaryTag::wall, BoundaryCondition::no_slip());
      bcs.set(BoundaryTag::outflow, BoundaryCondition::traction(exact.outflow_traction));
      NavierStokesProblem prob(space, coords, bcs, c.flow.re);
      Eigen::VectorXd x = Eigen::VectorXd::Zero(prob.size());
      converged = converged && newton_solve(prob, x, newton_options(c.solver)).converged;
      for (int i = 0; i < space.n_velocity_nodes(); ++i) {
        const Point u = exact.velocity(coords.nodes()[i]);
        worst = std::max({worst, std::abs(x[space.u(i)] - u.x()), std::abs(x[space.v(i)] - u.y())});
      }
      const auto pp = pressure_node_positions(space, coords);
      for (int i = 0; i < space.n_pressure_nodes(); ++i)
        worst = std::max(worst, std::abs(x[space.p(i)] - exact.pressure(pp[i])));
    }
  }
  const double secs = now() - t0;
  return {converged && worst <= 1e-9 && secs < 10,
          "max nodal error " + fmt(worst) + " over P=2,3,4 on straight and jiggled meshes; " + fmt(secs) + " s"};
}

// 3. Kovasznay spectral convergence on the 8x8 pattern.
Outcome kovasznay_convergence() {
  const double t0 = now();
  CaseConfig c = config("kovasznay_sweep.toml");
  c.sweep.repeat = 1;
  const SweepResult s = sweep(c);
  std::map<int, double> err;
  bool ok = true;
  for (const auto& r : s.records) {
    err[r.order] = r.value;
    ok = ok && r.converged;
  }
  std::string d = "L2 error";
  for (auto [p, e] : err) {
    d += " P" + std::to_string(p) + "=" + fmt(e, 2);
    if (err.count(p + 2) && e >= 1e-9) ok = ok && e / err.at(p + 2) >= 10;
  }
  ok = ok && !err.empty() && err.rbegin()->second < 1e-9;
  const double secs = now() - t0;
  return {ok && secs < 60, d + "; " + fmt(secs) + " s"};
}

// 4. Directional finite differences of the residual at converged states.
double fd_error(NavierStokesProblem& prob, const Eigen::VectorXd& x, unsigned seed) {
  const SparseMatrix j = prob.jacobian(x);
  std::mt19937 gen(seed);
  std::normal_distribution<double> nd;
  double worst = 0;
  for (int k = 0; k < 5; ++k) {
    Eigen::VectorXd d(prob.size());
    for (int i = 0; i < d.size(); ++i) d[i] = nd(gen);
    d /= d.norm();
    const double h = 1e-6 * std::max(1.0, x.norm());
    const Eigen::VectorXd fdv = (prob.residual(x + h * d) - prob.residual(x - h * d)) / (2 * h);
    const Eigen::VectorXd jd = j * d;
    worst = std::max(worst, (fdv - jd).norm() / jd.norm());
  }
  return worst;
}

Outcome jacobian_consistency() {
  const double t0 = now();
  CaseConfig cav = config("cavity_re1000.toml");
  cav.mesh.n = 16;
  CaseConfig cyl = config("cylinder_re15.toml");
  cyl.mesh.refinements = 1;
  std::string d;
  double worst = 0;
  bool converged = true;
  unsigned seed = 1;
  for (const CaseConfig* c : {&cav, &cyl}) {
    CaseSetup s = build_case(*c);
    Eigen::VectorXd x;
    converged = converged && solve_case(s, x).converged;
    const double e = fd_error(*s.problem, x, seed++);
    worst = std::max(worst, e);
    d += std::string(to_string(c->kind)) + " " + fmt(e) + "; ";
  }
  const double secs = now() - t0;
  return {converged && worst <= 1e-6 && secs < 30, "relative FD error " + d + fmt(secs) + " s"};
}

// 5 and 9 share one cylinder sweep.
const SweepResult& cylinder_sweep() {
  static std::optional<SweepResult> s;
  if (!s) s = sweep(config("cylinder_sweep.toml"), &std::cerr);
  return *s;
}

Outcome cylinder_symmetry() {
  const auto& s = cylinder_sweep();
  std::map<std::pair<int, int>, double> cl;
  bool ok = true;
  for (const auto& r : s.records) {
    cl[{r.mesh_id, r.order}] = std::abs(r.value);
    ok = ok && r.converged;
  }
  std::string violations;
  for (auto [key, v] : cl) {
    const auto [m, p] = key;
    for (auto next : {std::pair{m, p + 1}, std::pair{m + 1, p}}) {
      auto it = cl.find(next);
      if (it != cl.end() && it->second > v) {
        ok = false;
        violations += " M" + std::to_string(m) + "P" + std::to_string(p) + "->M" + std::to_string(next.first) + "P" +
                      std::to_string(next.second) + " (" + fmt(v) + " -> " + fmt(it->second) + ")";
      }
    }
  }
  const double last = cl.empty() ? 1.0 : cl.rbegin()->second;
  ok = ok && last < 1e-6;
  std::string d = "|C_L| at finest M/P " + fmt(last);
  if (!violations.empty()) d += "; increases:" + violations;
  return {ok, d};
}

Outcome speedup() {
  const auto& s = cylinder_sweep();
  const ToleranceRow* row = nullptr;
  for (const auto& r : s.table)
    if (std::abs(r.tolerance - 1e-5) < 1e-12) row = &r;
  if (!row) return {false, "tolerance 1e-5 missing from the sweep"};
  double best_p2 = 1.0;
  for (const auto& r : s.records)
    if (r.order == 2) best_p2 = std::min(best_p2, r.error);
  if (!row->reachable || row->reference_order != 2) {
    std::string d = "no order-2-1 configuration reaches 1e-5 (best P=2 error " + fmt(best_p2) + ")";
    const ToleranceRow* loose = nullptr;
    for (const auto& r : s.table)
      if (r.reachable && r.reference_order == 2 && (!loose || r.tolerance < loose->tolerance)) loose = &r;
    if (loose) {
      double b = 0;
      for (const auto& e : loose->entries) b = std::max(b, e.speedup);
      d += "; at tolerance " + fmt(loose->tolerance) + " the best speed-up over P=2 is " + fmt(b);
    }
    return {false, d};
  }
  double best = 0;
  for (const auto& e : row->entries)
    if (e.order > 2) best = std::max(best, e.speedup);
  return {best > 1, "best high-order speed-up " + fmt(best) + " over mesh " + std::to_string(row->reference_mesh) +
                        " P=2 (" + fmt(row->reference_time) + " s)"};
}

// 6. Cavity midlines against the tabulated reference.
Outcome cavity_profiles() {
  const double t0 = now();
  CaseSetup s = build_case(config("cavity_re1000.toml"));
  Eigen::VectorXd x;
  const bool converged = solve_case(s, x).converged;
  const auto ref_u = read_table(g_root / "data/reference/cavity_re1000_u.csv");
  const auto ref_v = read_table(g_root / "data/reference/cavity_re1000_v.csv");
  std::vector<Point> pts;
  for (auto [y, u] : ref_u) pts.emplace_back(0.5, y);
  for (auto [xx, v] : ref_v) pts.emplace_back(xx, 0.5);
  const auto samples = sample_points(*s.problem, x, pts);
  double worst_u = 0, worst_v = 0;
  bool inside = true;
  for (std::size_t i = 0; i < ref_u.size(); ++i) {
    inside = inside && samples[i].inside;
    worst_u = std::max(worst_u, std::abs(samples[i].u - ref_u[i].second));
  }
  for (std::size_t i = 0; i < ref_v.size(); ++i) {
    const auto& q = samples[ref_u.size() + i];
    inside = inside && q.inside;
    worst_v = std::max(worst_v, std::abs(q.v - ref_v[i].second));
  }
  const double secs = now() - t0;
  const bool ok = converged && inside && ref_u.size() == 17 && ref_v.size() == 17 && worst_u <= 0.02 &&
                  worst_v <= 0.02 && secs < 300;
  return {ok, "max |u - ref| " + fmt(worst_u) + ", max |v - ref| " + fmt(worst_v) + " at 17+17 stations; " +
                  fmt(secs) + " s"};
}

// 7. Bump free-surface loop, flat control and mass balance.
Outcome free_surface_loop() {
  const double t0 = now();
  CaseConfig bump = config("bump_fs_re100.toml");
  bump.free_surface.max_steps = 500;
  CaseSetup s = build_case(bump);
  Eigen::VectorXd x;
  const CaseResult r = solve_case(s, x);
  const double q_in = r.fluxes.at(BoundaryTag::inflow), q_out = r.fluxes.at(BoundaryTag::outflow);
  const double imbalance = std::abs(q_in + q_out) / std::abs(q_in);

  CaseSetup f = build_case(config("bump_flat.toml"));
  Eigen::VectorXd xf;
  const CaseResult rf = solve_case(f, xf);
  double eta_flat = 0;
  for (double e : rf.profile.eta) eta_flat = std::max(eta_flat, std::abs(e));

  const double secs = now() - t0;
  const bool bump_ok = r.converged && r.steps <= 500 && r.final_d < 1e-6;
  const bool flat_ok = rf.converged && rf.steps == 1 && eta_flat <= 1e-12;
  return {bump_ok && flat_ok && imbalance <= 1e-6 && secs < 900,
          "bump " + std::string(r.converged ? "converged" : "not converged") + " after " + std::to_string(r.steps) +
              " steps, D " + fmt(r.final_d) + "; flat case " + std::to_string(rf.steps) + " step(s), max|eta| " +
              fmt(eta_flat) + "; |Qin+Qout|/|Qin| " + fmt(imbalance) + "; " + fmt(secs) + " s"};
}

// 8. Morph of a sinusoidal surface displacement.
Outcome morph_invariants() {
  const auto mesh = std::make_shared<const Mesh2D>(gen_rectangle(
      0, 1, 0, 1, 10, 10, {BoundaryTag::bed, BoundaryTag::outflow, BoundaryTag::free_surface, BoundaryTag::inflow}));
  CoordinateField field(mesh, 4);
  std::vector<int> surface = field.dofs().boundary_dofs(*mesh, BoundaryTag::free_surface);
  std::sort(surface.begin(), surface.end(),
            [&](int a, int b) { return field.nodes()[a].x() < field.nodes()[b].x(); });
  const double c = 0.07, y0 = 0.25;
  std::vector<double> flat(surface.size(), 1.0), target(surface.size());
  for (std::size_t i = 0; i < surface.size(); ++i)
    target[i] = 1 + c * std::sin(2 * std::numbers::pi * field.nodes()[surface[i]].x());
  const auto before = field.nodes();
  MeshMorpher morpher(field, surface, y0);
  if (!morpher.morph(field, flat, target, 1)) return {false, "morph step rejected"};
  double on_sine = 0;
  for (std::size_t i = 0; i < surface.size(); ++i) {
    const Point& p = field.nodes()[surface[i]];
    on_sine = std::max(on_sine, std::abs(p.y() - (1 + c * std::sin(2 * std::numbers::pi * p.x()))));
  }
  bool x_same = true, below_fixed = true;
  for (std::size_t k = 0; k < before.size(); ++k) {
    x_same = x_same && field.nodes()[k].x() == before[k].x();
    if (before[k].y() <= y0) below_fixed = below_fixed && field.nodes()[k].y() == before[k].y();
  }
  const double min_det = Geometry(field).min_det();
  return {on_sine <= 1e-12 && x_same && below_fixed && min_det > 0,
          "surface off sine " + fmt(on_sine) + "; x unchanged " + (x_same ? "yes" : "no") + "; y<=y0 fixed " +
              (below_fixed ? "yes" : "no") + "; min det J " + fmt(min_det)};
}

// 10. Coarse P4 against fine P2 bump surface.
Outcome curvilinear_equivalence() {
  const double t0 = now();
  const CaseConfig cc = config("bump_curv_coarse.toml"), cf = config("bump_curv_fine.toml");
  CaseSetup sc = build_case(cc), sf = build_case(cf);
  Eigen::VectorXd xc, xf;
  const CaseResult rc = solve_case(sc, xc), rf = solve_case(sf, xf);
  double sum = 0, peak = 0;
  for (std::size_t i = 0; i < rf.profile.x.size(); ++i) {
    const double diff = interpolate_profile(rc.profile, rf.profile.x[i], cc.flow.order) - rf.profile.eta[i];
    sum += diff * diff;
    peak = std::max(peak, std::abs(rf.profile.eta[i]));
  }
  const double rms = std::sqrt(sum / static_cast<double>(rf.profile.x.size()));
  const double secs = now() - t0;
  return {peak > 0 && rms <= 0.02 * peak,
          "RMS difference " + fmt(rms) + " = " + fmt(100 * rms / peak) + "% of max|eta| " + fmt(peak) +
              " (coarse D " + fmt(rc.final_d) + " after " + std::to_string(rc.steps) + " steps, fine D " +
              fmt(rf.final_d) + " after " + std::to_string(rf.steps) + "); " + fmt(secs) + " s"};
}

// 11. Two-phase reference profiles, when shipped.
Outcome cross_solver() {
  const std::pair<const char*, const char*> cases[] = {{"bump_twophase_eta.csv", "bump_fs_re100.toml"},
                                                       {"naca_twophase_eta.csv", "naca_fs_re1261.toml"}};
  std::string missing;
  for (auto [file, cfg] : cases)
    if (!fs::exists(g_root / "data/reference" / file)) missing += std::string(" ") + file;
  if (!missing.empty()) return {false, "reference profiles absent from data/reference:" + missing};
  bool ok = true;
  std::string d;
  for (auto [file, cfg] : cases) {
    const CaseConfig c = config(cfg);
    CaseSetup s = build_case(c);
    Eigen::VectorXd x;
    const CaseResult r = solve_case(s, x);
    double worst = 0, peak = 0;
    for (auto [xr, er] : read_table(g_root / "data/reference" / file)) {
      worst = std::max(worst, std::abs(interpolate_profile(r.profile, xr, c.flow.order) - er));
      peak = std::max(peak, std::abs(er));
    }
    ok = ok && r.converged && worst <= 0.1 * peak;
    d += std::string(cfg) + " Linf " + fmt(worst) + " vs band " + fmt(0.1 * peak) + "; ";
  }
  return {ok, d};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--root" && i + 1 < argc) {
      g_root = argv[++i];
    } else {
      try {
        wanted.push_back(std::stoi(a));
      } catch (const std::exception&) {
        std::cerr << "usage: semflow_acceptance [--root DIR] [criterion ...]\n";
        return 1;
      }
    }
  }
  const std::vector<Criterion> all = {
      {1, "geometry spectral convergence", geometry_convergence},
      {2, "Poiseuille exactness", poiseuille_exactness},
      {3, "Kovasznay spectral convergence", kovasznay_convergence},
      {4, "Jacobian consistency", jacobian_consistency},
      {5, "cylinder lift symmetry", cylinder_symmetry},
      {6, "cavity Re=1000 midlines", cavity_profiles},
      {7, "free-surface loop", free_surface_loop},
      {8, "mesh morph invariants", morph_invariants},
      {9, "high-order speed-up", speedup},
      {10, "curvilinear free-surface equivalence", curvilinear_equivalence},
      {11, "cross-solver regression", cross_solver},
  };
  configure_threads();
  int failed = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << "criterion " << std::setw(2) << c.id << " " << (o.pass ? "PASS" : "FAIL") << "  " << c.name << ": "
              << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
