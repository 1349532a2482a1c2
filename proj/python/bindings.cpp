#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <memory>
#include <sstream>

#include "semflow/cases.hpp"
#include "semflow/output.hpp"

namespace py = pybind11;
using namespace semflow;

namespace {

py::dict result_dict(const CaseResult& r) {
  py::dict d;
  d["converged"] = r.converged;
  d["message"] = r.message;
  d["dofs"] = r.dofs;
  d["newton_iterations"] = r.newton_iterations;
  d["seconds"] = r.seconds;
  if (r.forces) {
    d["cd"] = r.forces->cd;
    d["cl"] = r.forces->cl;
  }
  if (r.l2_error) d["l2_error"] = *r.l2_error;
  py::dict fluxes;
  for (auto& [tag, q] : r.fluxes) fluxes[py::str(std::string(to_string(tag)))] = q;
  d["fluxes"] = fluxes;
  if (r.steps > 0) {
    d["steps"] = r.steps;
    d["final_d"] = r.final_d;
    d["profile_x"] = Eigen::Map<const Eigen::VectorXd>(r.profile.x.data(), r.profile.x.size());
    d["profile_eta"] = Eigen::Map<const Eigen::VectorXd>(r.profile.eta.data(), r.profile.eta.size());
  }
  py::list history;
  for (const auto& h : r.history) history.append(py::make_tuple(h.stage, h.iteration, h.residual));
  d["history"] = history;
  return d;
}

py::dict stats_dict(const Mesh2D& m) {
  const MeshStats s = m.stats();
  py::dict d, edges;
  d["nodes"] = s.n_nodes;
  d["elements"] = s.n_elements;
  for (auto& [tag, n] : s.boundary_edges) edges[py::str(std::string(to_string(tag)))] = n;
  d["boundary_edges"] = edges;
  d["area"] = m.total_area();
  return d;
}

// Built and solved case kept alive for field queries.
struct Solution {
  CaseSetup setup;
  Eigen::VectorXd x;
  CaseResult result;
};

Eigen::MatrixX2d points_matrix(const std::vector<Point>& pts) {
  Eigen::MatrixX2d m(pts.size(), 2);
  for (std::size_t i = 0; i < pts.size(); ++i) m.row(i) = pts[i].transpose();
  return m;
}

TagTable tag_table(const std::map<std::string, std::string>& names) {
  TagTable t;
  for (auto& [name, tag] : names) {
    const auto parsed = parse_boundary_tag(tag);
    if (!parsed) throw InputError("unknown boundary tag '" + tag + "'");
    t[name] = *parsed;
  }
  return t;
}

}  // namespace

PYBIND11_MODULE(_semflow, m) {
  m.doc() = "High-order spectral element solver for steady incompressible flow";

  auto base = py::register_exception<Error>(m, "SemflowError", PyExc_RuntimeError);
  py::register_exception<InputError>(m, "InputError", base.ptr());
  auto mesh_err = py::register_exception<MeshError>(m, "MeshError", base.ptr());
  py::register_exception<InvertedElementError>(m, "InvertedElementError", mesh_err.ptr());
  py::register_exception<SolverError>(m, "SolverError", base.ptr());

  py::class_<CaseConfig>(m, "CaseConfig")
      .def_property_readonly("kind", [](const CaseConfig& c) { return std::string(to_string(c.kind)); })
      .def_readwrite("name", &CaseConfig::name)
      .def_property(
          "order", [](const CaseConfig& c) { return c.flow.order; }, [](CaseConfig& c, int p) { c.flow.order = p; })
      .def_property(
          "re", [](const CaseConfig& c) { return c.flow.re; }, [](CaseConfig& c, double v) { c.flow.re = v; })
      .def_property(
          "fr", [](const CaseConfig& c) { return c.flow.fr; }, [](CaseConfig& c, double v) { c.flow.fr = v; })
      .def_property(
          "refinements", [](const CaseConfig& c) { return c.mesh.refinements; },
          [](CaseConfig& c, int k) { c.mesh.refinements = k; })
      .def_property(
          "max_steps", [](const CaseConfig& c) { return c.free_surface.max_steps; },
          [](CaseConfig& c, int n) { c.free_surface.max_steps = n; })
      .def_property(
          "output_dir", [](const CaseConfig& c) { return c.output.dir; },
          [](CaseConfig& c, const std::string& d) { c.output.dir = d; })
      .def("validate", [](const CaseConfig& c) { validate_config(c); })
      .def("to_toml", &serialize_config)
      .def("__eq__", [](const CaseConfig& a, const CaseConfig& b) { return a == b; })
      .def("__repr__", [](const CaseConfig& c) {
        return "<CaseConfig " + c.name + " (" + std::string(to_string(c.kind)) + ")>";
      });

  m.def("default_config", [](const std::string& kind) { return default_config(parse_case_kind(kind)); },
        py::arg("kind"));
  m.def("parse_config", [](const std::string& text) { return parse_config(text); }, py::arg("text"));
  m.def("load_config", [](const std::filesystem::path& p) { return load_config(p); }, py::arg("path"));

  m.def(
      "run_case",
      [](const CaseConfig& c, std::optional<std::filesystem::path> out_dir) {
        RunOptions opts;
        opts.out_dir = std::move(out_dir);
        CaseResult r;
        int status;
        {
          py::gil_scoped_release release;
          status = run_case(c, opts, &r);
        }
        py::dict d = result_dict(r);
        d["status"] = status;
        return d;
      },
      py::arg("config"), py::arg("out_dir") = py::none(),
      "Builds, solves and writes the artifacts of one case; returns a result dict.");

  m.def(
      "sweep",
      [](CaseConfig c, std::optional<int> repeat, std::optional<std::filesystem::path> out_dir) {
        if (repeat) c.sweep.repeat = *repeat;
        SweepResult s;
        {
          py::gil_scoped_release release;
          s = sweep(c);
        }
        if (out_dir) write_sweep(*out_dir, s);
        py::list records, table;
        for (const auto& r : s.records) {
          py::dict d;
          d["mesh"] = r.mesh_id;
          d["order"] = r.order;
          d["dofs"] = r.dofs;
          d["converged"] = r.converged;
          d["value"] = r.value;
          d["error"] = r.error;
          d["t_mean"] = r.t_mean;
          d["t_min"] = r.t_min;
          d["t_max"] = r.t_max;
          d["repeats"] = r.repeats;
          records.append(d);
        }
        for (const auto& row : s.table) {
          py::dict d;
          d["tolerance"] = row.tolerance;
          d["reachable"] = row.reachable;
          d["reference_mesh"] = row.reference_mesh;
          d["reference_order"] = row.reference_order;
          d["reference_time"] = row.reference_time;
          py::list entries;
          for (const auto& e : row.entries) entries.append(py::make_tuple(e.mesh_id, e.order, e.time, e.speedup));
          d["entries"] = entries;
          table.append(d);
        }
        py::dict out;
        out["records"] = records;
        out["table"] = table;
        return out;
      },
      py::arg("config"), py::arg("repeat") = py::none(), py::arg("out_dir") = py::none());

  py::class_<Solution, std::shared_ptr<Solution>>(m, "Solution")
      .def_property_readonly("result", [](const Solution& s) { return result_dict(s.result); })
      .def_property_readonly("nodes", [](const Solution& s) { return points_matrix(s.setup.coords->nodes()); })
      .def_property_readonly("u",
                             [](const Solution& s) {
                               const int n = s.setup.space->n_velocity_nodes();
                               Eigen::MatrixX2d u(n, 2);
                               u.col(0) = s.x.head(n);
                               u.col(1) = s.x.segment(n, n);
                               return u;
                             })
      .def_property_readonly("pressure_nodes",
                             [](const Solution& s) {
                               return points_matrix(pressure_node_positions(*s.setup.space, *s.setup.coords));
                             })
      .def_property_readonly("p",
                             [](const Solution& s) {
                               const int n = s.setup.space->n_pressure_nodes();
                               return Eigen::VectorXd(s.x.tail(n));
                             })
      .def(
          "sample",
          [](const Solution& s, const Eigen::MatrixX2d& pts) {
            std::vector<Point> q(pts.rows());
            for (Eigen::Index i = 0; i < pts.rows(); ++i) q[i] = pts.row(i).transpose();
            const auto samples = sample_points(*s.setup.problem, s.x, q);
            Eigen::MatrixXd out(samples.size(), 3);
            for (std::size_t i = 0; i < samples.size(); ++i) out.row(i) << samples[i].u, samples[i].v, samples[i].p;
            return out;
          },
          py::arg("points"), "Rows (u, v, p_d) at the points; NaN outside the domain.")
      .def(
          "residual_norm", [](const Solution& s) { return s.setup.problem->residual(s.x).norm(); })
      .def(
          "write_vtk", [](const Solution& s, const std::filesystem::path& p) { write_fields(p, *s.setup.problem, s.x); },
          py::arg("path"));

  m.def(
      "solve",
      [](const CaseConfig& c) {
        auto s = std::make_shared<Solution>();
        py::gil_scoped_release release;
        s->setup = build_case(c);
        s->result = solve_case(s->setup, s->x);
        return s;
      },
      py::arg("config"), "Builds and solves a case in memory.");

  py::class_<Mesh2D, std::shared_ptr<Mesh2D>>(m, "Mesh")
      .def_property_readonly("vertices", [](const Mesh2D& mesh) { return points_matrix(mesh.vertices()); })
      .def_property_readonly("cells",
                             [](const Mesh2D& mesh) {
                               Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor> c(mesh.n_cells(), 3);
                               for (std::size_t i = 0; i < mesh.n_cells(); ++i)
                                 for (int k = 0; k < 3; ++k) c(i, k) = mesh.cells()[i][k];
                               return c;
                             })
      .def("stats", &stats_dict)
      .def("write_msh", [](const Mesh2D& mesh, const std::filesystem::path& p) { write_msh(mesh, p); });

  m.def("build_mesh", [](const CaseConfig& c) { return std::make_shared<Mesh2D>(build_mesh(c)); },
        py::arg("config"));
  m.def(
      "read_msh",
      [](const std::filesystem::path& p, const std::map<std::string, std::string>& tags) {
        return std::make_shared<Mesh2D>(read_msh(p, tag_table(tags)));
      },
      py::arg("path"), py::arg("tags") = std::map<std::string, std::string>{});

  m.def(
      "boundary_length",
      [](const CaseConfig& c, int order, bool curved) {
        auto mesh = std::make_shared<const Mesh2D>(build_mesh(c));
        CoordinateField f(mesh, order);
        const auto curve = case_curve(c);
        const BoundaryTag tag = c.kind == CaseKind::bump_fs ? BoundaryTag::bed : BoundaryTag::body;
        if (curved && curve) blend_to_curve(f, *curve, tag);
        return boundary_length(f, tag);
      },
      py::arg("config"), py::arg("order"), py::arg("curved") = true,
      "Length of the body (or bump bed) boundary of the order-P coordinate field.");

  m.def("reference_nodes", [](int order) { return points_matrix(reference_triangle(order).nodes()); },
        py::arg("order"));
  m.def("gll_points", &poly::gll_points, py::arg("order"));
  m.def("direct_uses_umfpack", &direct_uses_umfpack);
}
