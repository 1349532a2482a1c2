#include "semflow/morph.hpp"

#include <algorithm>
#include <sstream>

namespace semflow {

MeshMorpher::MeshMorpher(const CoordinateField& field, std::vector<int> surface_nodes, double y0,
                         const std::vector<BoundaryTag>& fixed)
    : surface_(std::move(surface_nodes)), y0_(y0) {
  const auto& nodes = field.nodes();
  const int n = static_cast<int>(nodes.size());
  if (surface_.empty()) throw InputError("morph needs at least one surface node");
  for (std::size_t i = 1; i < surface_.size(); ++i)
    if (!(nodes[surface_[i]].x() > nodes[surface_[i - 1]].x()))
      throw InputError("surface nodes must have strictly increasing x");

  std::vector<double> edges(surface_.size());
  for (std::size_t i = 0; i < surface_.size(); ++i) edges[i] = nodes[surface_[i]].x();
  bin_.resize(n);
  for (int k = 0; k < n; ++k) {
    // Largest i with x_i <= x; nodes left of the first surface point use bin 0.
    const auto it = std::upper_bound(edges.begin(), edges.end(), nodes[k].x());
    bin_[k] = std::max(0, static_cast<int>(it - edges.begin()) - 1);
  }

  movable_.assign(n, 1);
  for (auto tag : fixed)
    for (int id : field.dofs().boundary_dofs(field.mesh(), tag)) movable_[id] = 0;
  is_surface_.assign(n, 0);
  for (int id : surface_) {
    is_surface_[id] = 1;
    if (!movable_[id]) throw InputError("surface node " + std::to_string(id) + " lies on a fixed boundary");
  }
}

bool MeshMorpher::morph(CoordinateField& field, const std::vector<double>& y_old, const std::vector<double>& y_new,
                        int step) {
  if (step <= last_step_) return false;
  if (y_old.size() != surface_.size() || y_new.size() != surface_.size())
    throw InputError("surface height arrays must have one entry per surface node");
  for (std::size_t i = 0; i < y_new.size(); ++i) {
    if (!(y_new[i] > y0_)) {
      std::ostringstream os;
      os << "surface height " << y_new[i] << " at x = " << field.nodes()[surface_[i]].x()
         << " is not above the morph threshold y0 = " << y0_;
      throw MeshError(os.str());
    }
  }

  std::vector<Point> moved = field.nodes();
  for (std::size_t i = 0; i < surface_.size(); ++i) moved[surface_[i]].y() = y_new[i];
  for (std::size_t k = 0; k < moved.size(); ++k) {
    if (!movable_[k] || is_surface_[k]) continue;
    const double y = moved[k].y();
    if (y <= y0_) continue;
    const int b = bin_[k];
    const double factor = std::min(1.0, (y - y0_) / (y_new[b] - y0_));
    moved[k].y() = y + factor * (y_new[b] - y_old[b]);
  }

  std::swap(field.nodes(), moved);
  const auto bad = inverted_cells(field);
  if (!bad.empty()) {
    std::swap(field.nodes(), moved);
    std::ostringstream os;
    os << "mesh morph at step " << step << " inverts " << bad.size() << " element(s)";
    throw InvertedElementError(os.str(), bad);
  }
  last_step_ = step;
  return true;
}

}  // namespace semflow
