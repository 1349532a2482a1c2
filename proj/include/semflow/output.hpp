#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "semflow/assembly.hpp"

namespace semflow {

struct PointField {
  std::string name;
  std::vector<double> values;  // one per coordinate node
};

/// VTK legacy ASCII unstructured grid. Each order-P cell is written as P^2
/// linear triangles over its nodal lattice; points are the global nodes.
void write_vtk(std::ostream& os, const CoordinateField& field, const std::vector<PointField>& data,
               const std::string& title = "semflow");

/// u, v, |u| and p_d at the velocity nodes (pressure evaluated from its own basis).
std::vector<PointField> flow_point_fields(const NavierStokesProblem& problem, const Eigen::VectorXd& x);

void write_fields(const std::filesystem::path& path, const NavierStokesProblem& problem, const Eigen::VectorXd& x);

}  // namespace semflow
