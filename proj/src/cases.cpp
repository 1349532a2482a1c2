#include "semflow/cases.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>

#include "semflow/mesh_generators.hpp"
#include "semflow/output.hpp"

namespace semflow {

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

BumpChannelSpec bump_spec(const CaseConfig& c) {
  BumpChannelSpec s;
  s.x0 = c.domain.x0;
  s.x1 = c.domain.x1;
  s.base_depth = c.domain.y0;
  s.height = c.flow.bump_height;
  s.length = c.flow.bump_length;
  s.x_offset = -c.flow.bump_length / 3;  // crest at x = 0
  s.dx = c.mesh.dx / std::pow(2.0, c.mesh.refinements);
  s.ny = c.mesh.ny << c.mesh.refinements;
  s.layer_ratio = c.mesh.layer_ratio;
  return s;
}

bool natural(BCSpecKind k) {
  return k == BCSpecKind::traction_free || k == BCSpecKind::exact_traction || k == BCSpecKind::free_surface;
}

template <class E>
[[noreturn]] void rethrow_with(const std::string& context, const E& e) {
  throw E(context + ": " + e.what());
}

}  // namespace

std::optional<ExactSolution> exact_solution(const CaseConfig& c) {
  const double re = c.flow.re;
  if (c.kind == CaseKind::poiseuille) {
    const double yc = 0.5 * (c.domain.y0 + c.domain.y1), h = 0.5 * (c.domain.y1 - c.domain.y0), x1 = c.domain.x1;
    ExactSolution s;
    s.velocity = [=](const Point& q) { return Point(1 - std::pow((q.y() - yc) / h, 2), 0); };
    s.pressure = [=](const Point& q) { return 2 * (x1 - q.x()) / (re * h * h); };
    s.outflow_traction = [=](const Point& q) {
      return Point(-2 * (x1 - q.x()) / (re * h * h), -2 * (q.y() - yc) / (re * h * h));
    };
    return s;
  }
  if (c.kind == CaseKind::kovasznay) {
    constexpr double pi = std::numbers::pi;
    const double lam = re / 2 - std::sqrt(re * re / 4 + 4 * pi * pi);
    ExactSolution s;
    s.velocity = [=](const Point& q) {
      const double e = std::exp(lam * q.x());
      return Point(1 - e * std::cos(2 * pi * q.y()), lam / (2 * pi) * e * std::sin(2 * pi * q.y()));
    };
    s.pressure = [=](const Point& q) { return 0.5 * (1 - std::exp(2 * lam * q.x())); };
    s.outflow_traction = [=](const Point& q) {
      const double e = std::exp(lam * q.x()), cs = std::cos(2 * pi * q.y()), sn = std::sin(2 * pi * q.y());
      const double p = 0.5 * (1 - e * e);
      const double ux = -lam * e * cs, uy = 2 * pi * e * sn, vx = lam * lam / (2 * pi) * e * sn;
      return Point(-p + 2 * ux / re, (uy + vx) / re);
    };
    return s;
  }
  return std::nullopt;
}

std::optional<BoundaryCurve> case_curve(const CaseConfig& c) {
  switch (c.kind) {
    case CaseKind::channel_cylinder:
      return BoundaryCurve::circle({0, 0}, 0.5 * c.flow.chord);
    case CaseKind::channel_naca:
    case CaseKind::naca_fs:
      return BoundaryCurve::naca0012(c.flow.chord, c.flow.alpha, {0, 0});
    case CaseKind::bump_fs:
      if (c.flow.bump_height > 0) return bump_bed_curve(bump_spec(c));
      return std::nullopt;
    default:
      return std::nullopt;
  }
}

Mesh2D build_mesh(const CaseConfig& c) {
  const auto& d = c.domain;
  const int k = c.mesh.refinements;
  auto refine = [k](Mesh2D m) {
    for (int i = 0; i < k; ++i) m = refine_uniform(m);
    return m;
  };
  switch (c.kind) {
    case CaseKind::cavity:
      return refine(gen_rectangle(d.x0, d.x1, d.y0, d.y1, c.mesh.n, c.mesh.n,
                                  {BoundaryTag::wall, BoundaryTag::wall, BoundaryTag::lid, BoundaryTag::wall}));
    case CaseKind::poiseuille:
    case CaseKind::kovasznay:
      return refine(gen_rectangle(d.x0, d.x1, d.y0, d.y1, c.mesh.n, c.mesh.ny));
    case CaseKind::bump_fs:
      return gen_bump_channel(bump_spec(c));
    case CaseKind::custom:
      return refine(read_msh(c.mesh.file, c.mesh.tag_names));
    case CaseKind::channel_cylinder:
    case CaseKind::channel_naca:
    case CaseKind::naca_fs: {
      BodyChannelSpec s;
      s.body = *case_curve(c);
      s.x0 = d.x0;
      s.x1 = d.x1;
      s.y0 = d.y0;
      s.y1 = d.y1;
      s.bx0 = c.mesh.box[0];
      s.bx1 = c.mesh.box[1];
      s.by0 = c.mesh.box[2];
      s.by1 = c.mesh.box[3];
      s.n_body = c.mesh.body_points;
      s.n_layers = c.mesh.layers;
      s.layer_growth = c.mesh.layer_growth;
      s.nx_left = c.mesh.blocks[0];
      s.nx_right = c.mesh.blocks[1];
      s.ny_bottom = c.mesh.blocks[2];
      s.ny_top = c.mesh.blocks[3];
      if (c.kind == CaseKind::naca_fs)
        s.tags = {BoundaryTag::bed, BoundaryTag::outflow, BoundaryTag::free_surface, BoundaryTag::inflow};
      Mesh2D m = gen_body_channel(s);
      for (int i = 0; i < k; ++i) m = snap_to_curve(refine_uniform(m), s.body, BoundaryTag::body);
      return m;
    }
  }
  throw InputError("unknown case kind");
}

NewtonOptions newton_options(const SolverConfig& s) {
  NewtonOptions o;
  o.rtol = s.rtol;
  o.atol = s.atol;
  o.max_iterations = s.max_iterations;
  o.step_halving = s.step_halving;
  o.linear.kind = parse_linear_solver(s.linear);
  o.linear.restart = s.gmres_restart;
  o.linear.ilu_fill = s.ilu_fill;
  o.linear.tolerance = s.linear_tolerance;
  return o;
}

FreeSurfaceOptions free_surface_options(const CaseConfig& c) {
  FreeSurfaceOptions o;
  o.tolerance = c.free_surface.tolerance;
  o.max_steps = c.free_surface.max_steps;
  o.cfl = c.free_surface.cfl;
  o.damping_c = c.free_surface.damping_c;
  o.level = c.free_surface.level;
  o.y0 = c.free_surface.y0;
  o.newton = newton_options(c.solver);
  return o;
}

CaseSetup build_case(const CaseConfig& config) {
  validate_config(config);
  CaseSetup s;
  s.config = config;
  s.mesh = std::make_shared<const Mesh2D>(build_mesh(config));
  const int p = config.flow.order;
  s.space = std::make_unique<MixedSpace>(s.mesh, p);
  s.coords = std::make_unique<CoordinateField>(s.mesh, p);
  s.exact = exact_solution(config);
  s.curve = case_curve(config);
  s.curve_tag = config.kind == CaseKind::bump_fs ? BoundaryTag::bed : BoundaryTag::body;
  if (s.curve && config.mesh.curved) blend_to_curve(*s.coords, *s.curve, s.curve_tag);

  const auto present = s.mesh->tags_present();
  auto has = [&](BoundaryTag t) { return std::find(present.begin(), present.end(), t) != present.end(); };
  BCSet bcs;
  bool any_natural = false;
  for (const auto& [tag, spec] : config.bc) {
    if (!has(tag)) continue;
    any_natural |= natural(spec.kind);
    s.free_surface |= spec.kind == BCSpecKind::free_surface;
    switch (spec.kind) {
      case BCSpecKind::no_slip: bcs.set(tag, BoundaryCondition::no_slip()); break;
      case BCSpecKind::dirichlet: bcs.set(tag, BoundaryCondition::dirichlet(spec.value)); break;
      case BCSpecKind::free_slip: bcs.set(tag, BoundaryCondition::free_slip()); break;
      case BCSpecKind::traction_free: bcs.set(tag, BoundaryCondition::traction_free()); break;
      case BCSpecKind::free_surface: bcs.set(tag, BoundaryCondition::free_surface()); break;
      case BCSpecKind::exact: bcs.set(tag, BoundaryCondition::dirichlet(s.exact->velocity)); break;
      case BCSpecKind::exact_traction: bcs.set(tag, BoundaryCondition::traction(s.exact->outflow_traction)); break;
    }
  }
  bcs.validate(*s.mesh);
  s.problem = std::make_unique<NavierStokesProblem>(*s.space, *s.coords, std::move(bcs), config.flow.re, config.flow.fr);
  if (!any_natural) {
    double value = 0.0;
    if (s.exact) value = s.exact->pressure(pressure_node_positions(*s.space, *s.coords)[0]);
    s.problem->set_pressure_pin(std::make_pair(0, value));
  }
  return s;
}

CaseResult solve_case(CaseSetup& setup, Eigen::VectorXd& x, std::ostream* log) {
  const auto t0 = clock_type::now();
  const CaseConfig& c = setup.config;
  NavierStokesProblem& prob = *setup.problem;
  CaseResult r;
  r.dofs = prob.size();
  r.mesh_stats = setup.mesh->stats();
  if (x.size() != prob.size()) x = Eigen::VectorXd::Zero(prob.size());

  auto on_iter = [&](const IterationRecord& rec) {
    r.history.push_back(rec);
    if (log) *log << rec << '\n';
  };
  const NewtonOptions nopts = newton_options(c.solver);
  std::vector<double> schedule{c.flow.re};
  if (c.solver.continuation_start > 0 && c.solver.continuation_start < c.flow.re)
    schedule = doubling_schedule(c.flow.re, c.solver.continuation_start);

  try {
    if (!setup.free_surface || schedule.size() > 1) {
      const auto cont = continuation_solve(prob, x, schedule, nopts, on_iter);
      r.newton_iterations = cont.total_iterations;
    }
    r.converged = true;
    if (setup.free_surface) {
      FreeSurfaceState state;
      const FreeSurfaceOptions fopts = free_surface_options(c);
      auto on_step = [&](const FreeSurfaceStep& st) {
        if (log) *log << st << '\n';
      };
      SteadyResult sr;
      try {
        sr = steady_loop(prob, *setup.coords, x, state, fopts, on_step);
      } catch (const InvertedElementError& e) {
        sr.message = e.what();
      }
      r.converged = sr.converged;
      r.message = sr.message;
      r.steps = sr.steps;
      r.final_d = sr.final_d;
      r.surface_history = sr.report;
      for (const auto& st : sr.report) r.newton_iterations += st.newton_iterations;
      r.profile.x = state.x;
      r.profile.eta = state.eta;
    }
  } catch (const SolverError& e) {
    r.converged = false;
    r.message = e.what();
  }

  if (r.converged || setup.free_surface) {
    for (BoundaryTag t : setup.mesh->tags_present()) r.fluxes[t] = boundary_flux(prob, x, t);
    const auto tags = setup.mesh->tags_present();
    if (std::find(tags.begin(), tags.end(), BoundaryTag::body) != tags.end() && x.allFinite())
      r.forces = body_forces(prob, x, BoundaryTag::body, c.flow.chord);
    if (setup.exact) r.l2_error = velocity_l2_error(prob, x, setup.exact->velocity);
  }
  r.seconds = seconds_since(t0);
  return r;
}

namespace {

void write_report(const std::filesystem::path& path, const CaseSetup& s, const CaseResult& r) {
  std::ofstream os(path);
  os.precision(12);
  const auto& c = s.config;
  os << "case " << to_string(c.kind) << "\nname " << c.name << "\nstatus " << (r.converged ? "converged" : "not-converged")
     << "\n";
  if (!r.message.empty()) os << "message " << r.message << "\n";
  os << "order " << c.flow.order << "-" << c.flow.order - 1 << "\nre " << c.flow.re << "\nfr " << c.flow.fr
     << "\ncells " << r.mesh_stats.n_elements << "\nvertices " << r.mesh_stats.n_nodes << "\n";
  for (auto& [t, n] : r.mesh_stats.boundary_edges) os << "boundary_edges." << to_string(t) << " " << n << "\n";
  os << "dofs " << r.dofs << "\nlinear_solver " << LinearSolver(newton_options(c.solver).linear).description()
     << "\nnewton_iterations " << r.newton_iterations << "\nseconds " << r.seconds << "\n";
  if (r.forces) os << "cd " << r.forces->cd << "\ncl " << r.forces->cl << "\n";
  if (r.l2_error) os << "l2_error " << *r.l2_error << "\n";
  if (s.free_surface) os << "pseudo_time_steps " << r.steps << "\nfinal_d " << r.final_d << "\n";
  for (auto& [t, f] : r.fluxes) os << "flux." << to_string(t) << " " << f << "\n";
}

void write_history(const std::filesystem::path& path, const CaseResult& r) {
  std::ofstream os(path);
  os.precision(12);
  os << "stage,iteration,residual,seconds\n";
  for (const auto& h : r.history) os << h.stage << ',' << h.iteration << ',' << h.residual << ',' << h.seconds << '\n';
}

}  // namespace

int run_case(const CaseConfig& config, const RunOptions& options, CaseResult* result) {
  const std::string context = "case " + config.name;
  const std::filesystem::path dir = options.out_dir.value_or(std::filesystem::path(config.output.dir));
  try {
    std::filesystem::create_directories(dir);
    CaseSetup setup = build_case(config);
    if (options.log)
      *options.log << context << ": " << setup.mesh->n_cells() << " cells, P-Q " << config.flow.order << "-"
                   << config.flow.order - 1 << ", " << setup.problem->size() << " dofs\n";
    Eigen::VectorXd x;
    CaseResult r = solve_case(setup, x, options.log);

    {
      std::ofstream cfg(dir / "config.toml");
      cfg << serialize_config(config);
    }
    write_report(dir / "report.txt", setup, r);
    write_history(dir / "history.csv", r);
    if (r.forces) {
      std::ofstream os(dir / "forces.csv");
      os.precision(15);
      os << "cd,cl,fx,fy\n" << r.forces->cd << ',' << r.forces->cl << ',' << r.forces->fx << ',' << r.forces->fy << '\n';
    }
    if (setup.free_surface) {
      write_profile_csv((dir / "profile.csv").string(), r.profile);
      std::ofstream os(dir / "surface_history.csv");
      os.precision(12);
      os << "tau,d,newton_iterations,eta_min,eta_max,dt,seconds\n";
      for (const auto& st : r.surface_history)
        os << st.tau << ',' << st.d << ',' << st.newton_iterations << ',' << st.eta_min << ',' << st.eta_max << ','
           << st.dt << ',' << st.seconds << '\n';
    }
    if (config.kind == CaseKind::cavity && x.allFinite()) {
      const auto& d = config.domain;
      const double xm = 0.5 * (d.x0 + d.x1), ym = 0.5 * (d.y0 + d.y1);
      std::ofstream u(dir / "midline_u.csv"), v(dir / "midline_v.csv");
      write_samples_csv(u, sample_line(*setup.problem, x, {xm, d.y0}, {xm, d.y1}, config.output.samples));
      write_samples_csv(v, sample_line(*setup.problem, x, {d.x0, ym}, {d.x1, ym}, config.output.samples));
    }
    if (config.output.fields && x.allFinite()) write_fields(dir / "fields.vtk", *setup.problem, x);
    if (options.log)
      *options.log << context << ": " << (r.converged ? "converged" : "not converged")
                   << (r.message.empty() ? "" : " (" + r.message + ")") << " in " << r.seconds << " s\n";
    const int status = r.converged ? 0 : 2;
    if (result) *result = std::move(r);
    return status;
  } catch (const InputError& e) {
    rethrow_with(context, e);
  } catch (const InvertedElementError& e) {
    throw InvertedElementError(context + ": " + e.what(), e.elements());
  } catch (const MeshError& e) {
    rethrow_with(context, e);
  } catch (const SolverError& e) {
    rethrow_with(context, e);
  } catch (const Error& e) {
    rethrow_with(context, e);
  } catch (const std::filesystem::filesystem_error& e) {
    throw InputError(context + ": " + e.what());
  }
}

std::vector<ToleranceRow> speedup_table(const std::vector<BenchRecord>& records, const std::vector<double>& tolerances) {
  std::vector<ToleranceRow> rows;
  for (double tol : tolerances) {
    ToleranceRow row;
    row.tolerance = tol;
    std::map<int, const BenchRecord*> best;  // per mesh, minimal passing order (fastest on ties)
    const BenchRecord* ref = nullptr;
    for (const auto& rec : records) {
      if (!rec.converged || !(rec.error <= tol)) continue;
      auto& b = best[rec.mesh_id];
      if (!b || rec.order < b->order || (rec.order == b->order && rec.t_mean < b->t_mean)) b = &rec;
      if (!ref || rec.order < ref->order || (rec.order == ref->order && rec.t_mean < ref->t_mean)) ref = &rec;
    }
    if (ref) {
      row.reachable = true;
      row.reference_mesh = ref->mesh_id;
      row.reference_order = ref->order;
      row.reference_time = ref->t_mean;
      for (auto& [mesh, rec] : best) row.entries.push_back({mesh, rec->order, rec->t_mean, ref->t_mean / rec->t_mean});
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

SweepResult sweep(const CaseConfig& config, std::ostream* log) {
  const auto& sw = config.sweep;
  const std::vector<int> meshes = sw.refinements.empty() ? std::vector<int>{config.mesh.refinements} : sw.refinements;
  const std::vector<int> orders = sw.orders.empty() ? std::vector<int>{config.flow.order} : sw.orders;
  SweepResult out;
  for (int m : meshes) {
    for (int p : orders) {
      CaseConfig c = config;
      c.mesh.refinements = m;
      c.flow.order = p;
      BenchRecord rec;
      rec.case_id = config.name;
      rec.mesh_id = m;
      rec.order = p;
      rec.pressure_order = p - 1;
      rec.t_min = std::numeric_limits<double>::infinity();
      double total = 0;
      for (int k = 0; k < sw.repeat; ++k) {
        const auto t0 = clock_type::now();
        CaseSetup setup = build_case(c);
        Eigen::VectorXd x;
        CaseResult r = solve_case(setup, x);
        const double t = seconds_since(t0);
        total += t;
        rec.t_min = std::min(rec.t_min, t);
        rec.t_max = std::max(rec.t_max, t);
        rec.dofs = r.dofs;
        rec.converged = r.converged;
        if (sw.metric == "l2") {
          rec.value = r.l2_error.value_or(std::numeric_limits<double>::quiet_NaN());
          rec.error = rec.value;
        } else {
          rec.value = r.forces ? (sw.metric == "cl" ? r.forces->cl : r.forces->cd)
                               : std::numeric_limits<double>::quiet_NaN();
          rec.error = std::abs(rec.value - sw.reference);
        }
      }
      rec.repeats = sw.repeat;
      rec.t_mean = total / sw.repeat;
      if (log)
        *log << "mesh " << m << " P-Q " << p << "-" << p - 1 << " dofs " << rec.dofs << " " << sw.metric << " "
             << rec.value << " error " << rec.error << " time " << rec.t_mean << " s [" << rec.t_min << ", "
             << rec.t_max << "]" << (rec.converged ? "" : " not converged") << '\n';
      out.records.push_back(rec);
    }
  }
  out.table = speedup_table(out.records, sw.tolerances);
  return out;
}

void write_records_csv(std::ostream& os, const std::vector<BenchRecord>& records) {
  os.precision(12);
  os << "case,mesh,order,pressure_order,dofs,converged,value,error,t_mean,t_min,t_max,repeats\n";
  for (const auto& r : records)
    os << r.case_id << ',' << r.mesh_id << ',' << r.order << ',' << r.pressure_order << ',' << r.dofs << ','
       << (r.converged ? 1 : 0) << ',' << r.value << ',' << r.error << ',' << r.t_mean << ',' << r.t_min << ','
       << r.t_max << ',' << r.repeats << '\n';
}

void write_speedup_csv(std::ostream& os, const std::vector<ToleranceRow>& table) {
  os.precision(12);
  os << "tolerance,reachable,reference_mesh,reference_order,reference_time,mesh,order,time,speedup\n";
  for (const auto& row : table) {
    if (!row.reachable) {
      os << row.tolerance << ",0,,,,,,,\n";
      continue;
    }
    for (const auto& e : row.entries)
      os << row.tolerance << ",1," << row.reference_mesh << ',' << row.reference_order << ',' << row.reference_time
         << ',' << e.mesh_id << ',' << e.order << ',' << e.time << ',' << e.speedup << '\n';
  }
}

void write_sweep(const std::filesystem::path& dir, const SweepResult& result) {
  std::filesystem::create_directories(dir);
  std::ofstream r(dir / "records.csv"), s(dir / "speedup.csv");
  write_records_csv(r, result.records);
  write_speedup_csv(s, result.table);
  if (!r || !s) throw InputError("cannot write sweep tables in " + dir.string());
}

}  // namespace semflow
