#pragma once

#include <vector>

#include "semflow/geometry.hpp"

namespace semflow {

/// Vertical column morph driven by free-surface elevation changes.
///
/// Bins are the half-open intervals [x_i, x_{i+1}) between consecutive
/// surface nodes; a node takes the elevation of its bin's left surface node.
/// Surface nodes are placed exactly on the new elevation, other movable
/// nodes above y0 shift by min(1, (y - y0)/(Y_new - y0)) * (Y_new - Y_old).
/// Nodes on `fixed` tags never move and x coordinates are never touched.
class MeshMorpher {
 public:
  MeshMorpher(const CoordinateField& field, std::vector<int> surface_nodes, double y0,
              const std::vector<BoundaryTag>& fixed = {BoundaryTag::bed, BoundaryTag::body});

  double y0() const { return y0_; }
  const std::vector<int>& surface_nodes() const { return surface_; }
  /// Bin of every coordinate node.
  const std::vector<int>& bins() const { return bin_; }
  int last_step() const { return last_step_; }

  /// Applies the move for pseudo-time step `step`. `y_old`/`y_new` hold the
  /// absolute surface heights per surface node. A step number that was already
  /// applied is ignored and false is returned. Throws MeshError when a new
  /// height is at or below y0 and InvertedElementError when the move would
  /// invert a cell (the field is left unchanged in both cases).
  bool morph(CoordinateField& field, const std::vector<double>& y_old, const std::vector<double>& y_new, int step);

 private:
  std::vector<int> surface_;
  std::vector<int> bin_;
  std::vector<char> movable_;
  std::vector<char> is_surface_;
  double y0_;
  int last_step_ = -1;
};

}  // namespace semflow
