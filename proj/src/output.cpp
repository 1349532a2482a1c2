#include "semflow/output.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <ostream>

namespace semflow {

void write_vtk(std::ostream& os, const CoordinateField& field, const std::vector<PointField>& data,
               const std::string& title) {
  const auto& nodes = field.nodes();
  for (const auto& f : data)
    if (f.values.size() != nodes.size()) throw InputError("point field '" + f.name + "' has the wrong length");

  const ReferenceTriangle& ref = field.reference();
  const int p = ref.order();
  std::map<std::array<int, 2>, int> at;
  for (int k = 0; k < ref.n_nodes(); ++k) at[ref.lattice()[k]] = k;
  std::vector<std::array<int, 3>> sub;
  for (int j = 0; j < p; ++j)
    for (int i = 0; i + j < p; ++i) {
      sub.push_back({at.at({i, j}), at.at({i + 1, j}), at.at({i, j + 1})});
      if (i + j + 2 <= p) sub.push_back({at.at({i + 1, j}), at.at({i + 1, j + 1}), at.at({i, j + 1})});
    }

  const auto& dofs = field.dofs();
  const std::size_t n_cells = static_cast<std::size_t>(dofs.n_cells()) * sub.size();
  os.precision(17);
  os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << nodes.size() << " double\n";
  for (const Point& q : nodes) os << q.x() << ' ' << q.y() << " 0\n";
  os << "CELLS " << n_cells << ' ' << 4 * n_cells << '\n';
  for (int c = 0; c < dofs.n_cells(); ++c) {
    const auto cd = dofs.cell_dofs(c);
    for (const auto& t : sub) os << "3 " << cd[t[0]] << ' ' << cd[t[1]] << ' ' << cd[t[2]] << '\n';
  }
  os << "CELL_TYPES " << n_cells << '\n';
  for (std::size_t k = 0; k < n_cells; ++k) os << "5\n";
  if (data.empty()) return;
  os << "POINT_DATA " << nodes.size() << '\n';
  for (const auto& f : data) {
    os << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
    for (double v : f.values) os << v << '\n';
  }
}

std::vector<PointField> flow_point_fields(const NavierStokesProblem& problem, const Eigen::VectorXd& x) {
  const MixedSpace& space = problem.space();
  const int n = space.n_velocity_nodes();
  PointField u{"u", std::vector<double>(n)}, v{"v", std::vector<double>(n)}, mag{"velocity_magnitude", std::vector<double>(n)},
      p{"p_d", std::vector<double>(n)};
  for (int i = 0; i < n; ++i) {
    u.values[i] = x[space.u(i)];
    v.values[i] = x[space.v(i)];
    mag.values[i] = std::hypot(u.values[i], v.values[i]);
  }
  const ReferenceTriangle& vref = reference_triangle(space.velocity_order());
  const ReferenceTriangle& pref = reference_triangle(space.pressure_order());
  std::vector<Eigen::VectorXd> basis;
  for (const Point& rs : vref.nodes()) basis.push_back(pref.basis(rs));
  for (int c = 0; c < space.velocity().n_cells(); ++c) {
    const auto vd = space.velocity().cell_dofs(c);
    const auto pd = space.pressure().cell_dofs(c);
    for (std::size_t k = 0; k < vd.size(); ++k) {
      double s = 0;
      for (std::size_t j = 0; j < pd.size(); ++j) s += basis[k][j] * x[space.p(pd[j])];
      p.values[vd[k]] = s;
    }
  }
  return {std::move(u), std::move(v), std::move(mag), std::move(p)};
}

void write_fields(const std::filesystem::path& path, const NavierStokesProblem& problem, const Eigen::VectorXd& x) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  write_vtk(out, problem.coordinates(), flow_point_fields(problem, x));
  if (!out) throw InputError("write failed: " + path.string());
}

}  // namespace semflow
