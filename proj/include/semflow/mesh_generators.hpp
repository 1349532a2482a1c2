#pragma once

#include "semflow/curves.hpp"
#include "semflow/mesh.hpp"

namespace semflow {

struct RectangleTags {
  BoundaryTag bottom = BoundaryTag::wall;
  BoundaryTag right = BoundaryTag::outflow;
  BoundaryTag top = BoundaryTag::wall;
  BoundaryTag left = BoundaryTag::inflow;
};

/// [x0, x1] x [y0, y1] split into nx x ny quads, two triangles each.
Mesh2D gen_rectangle(double x0, double x1, double y0, double y1, int nx, int ny, RectangleTags tags = {});

/// Channel over a bathymetry bump, built from vertical node columns.
///
/// Bed y = bump profile of `bed` (flat at its base depth away from the bump),
/// surface y = 0. Columns are uniform with spacing close to `dx` on each of
/// the three pieces separated by the bump feet, so both feet are vertices.
/// Tags: left inflow, right outflow, top free_surface, bottom bed.
struct BumpChannelSpec {
  double x0 = -8.0, x1 = 12.0;
  double height = 0.2, length = 2.0, x_offset = -2.0 / 3.0, base_depth = -1.0;
  double dx = 0.25;
  int ny = 6;
  /// Ratio of the bottom layer thickness to the top layer thickness.
  double layer_ratio = 1.0;
  BoundaryTag top = BoundaryTag::free_surface;
};

Mesh2D gen_bump_channel(const BumpChannelSpec& spec);
BoundaryCurve bump_bed_curve(const BumpChannelSpec& spec);

/// A closed body inside a rectangular channel.
///
/// An O-grid of `n_layers` rings joins `n_body` points on the body curve
/// (t = i / n_body) to the perimeter of the box [bx0, bx1] x [by0, by1],
/// starting at the middle of its right side. The rest of the rectangle is
/// filled with eight structured blocks whose spacing grows geometrically away
/// from the box. `n_body` must be a multiple of 8.
struct BodyChannelSpec {
  BoundaryCurve body = BoundaryCurve::circle({0, 0}, 0.5);
  double x0 = -2, x1 = 4, y0 = -2, y1 = 2;
  double bx0 = -1, bx1 = 1, by0 = -1, by1 = 1;
  int n_body = 8;
  int n_layers = 2;
  double layer_growth = 1.0;
  int nx_left = 1, nx_right = 2, ny_bottom = 1, ny_top = 1;
  RectangleTags tags{BoundaryTag::wall, BoundaryTag::outflow, BoundaryTag::wall, BoundaryTag::inflow};
};

Mesh2D gen_body_channel(const BodyChannelSpec& spec);

/// Disc of radius r centred at c: square core with n x n cells and an
/// `n_layers` ring out to the circle (4n boundary edges, tagged wall).
Mesh2D gen_disc(Point center, double radius, int n, int n_layers);

}  // namespace semflow
