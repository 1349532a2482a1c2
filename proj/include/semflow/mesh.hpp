#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semflow/common.hpp"

namespace semflow {

enum class BoundaryTag : std::uint8_t { inflow, outflow, free_surface, bed, body, wall, lid };

inline constexpr std::array<BoundaryTag, 7> all_boundary_tags = {
    BoundaryTag::inflow, BoundaryTag::outflow, BoundaryTag::free_surface, BoundaryTag::bed,
    BoundaryTag::body,   BoundaryTag::wall,    BoundaryTag::lid};

std::string_view to_string(BoundaryTag tag);
std::optional<BoundaryTag> parse_boundary_tag(std::string_view name);

/// Maps physical-group names found in mesh files onto boundary tags.
/// Names equal to a tag's own name always map to that tag.
using TagTable = std::map<std::string, BoundaryTag>;

struct BoundaryEdge {
  std::array<int, 2> vertices;
  BoundaryTag tag;
};

struct MeshStats {
  std::size_t n_nodes = 0;
  std::size_t n_elements = 0;
  std::map<BoundaryTag, std::size_t> boundary_edges;

  std::size_t boundary(BoundaryTag tag) const {
    auto it = boundary_edges.find(tag);
    return it == boundary_edges.end() ? 0 : it->second;
  }
};

/// Unstructured triangle mesh with tagged boundary edges.
///
/// Immutable after construction. The constructor normalizes every cell to
/// counter-clockwise orientation and validates the topology: interior edges
/// are shared by exactly two cells, every edge with one cell carries exactly
/// one boundary tag.
class Mesh2D {
 public:
  /// Per-edge connectivity; `cells[1] == -1` on the boundary.
  struct Edge {
    std::array<int, 2> vertices;  // vertices[0] < vertices[1]
    std::array<int, 2> cells;
    std::array<int, 2> local_index;  // local edge number within each cell
    std::optional<BoundaryTag> tag;
  };

  Mesh2D() = default;
  Mesh2D(std::vector<Point> vertices, std::vector<std::array<int, 3>> cells,
         std::vector<BoundaryEdge> boundary_edges);

  std::size_t n_vertices() const { return vertices_.size(); }
  std::size_t n_cells() const { return cells_.size(); }
  std::size_t n_edges() const { return edges_.size(); }

  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& cells() const { return cells_; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_edges_; }
  const std::vector<Edge>& edges() const { return edges_; }

  /// Global edge id of local edge k (vertex k -> vertex k+1) of `cell`.
  int cell_edge(int cell, int k) const { return cell_edges_[cell][k]; }

  double signed_area(int cell) const;
  double total_area() const;
  MeshStats stats() const;
  std::vector<BoundaryTag> tags_present() const;

 private:
  std::vector<Point> vertices_;
  std::vector<std::array<int, 3>> cells_;
  std::vector<BoundaryEdge> boundary_edges_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> cell_edges_;
};

/// ASCII Gmsh MSH 2.2 reader (2-node lines and 3-node triangles with physical tags).
Mesh2D read_msh(const std::filesystem::path& path, const TagTable& names = {});
Mesh2D parse_msh(std::string_view text, const TagTable& names = {});
void write_msh(const Mesh2D& mesh, const std::filesystem::path& path);

/// Canonical plain-text dump:
///   semflow-mesh 1
///   vertices <n>        followed by n lines "x y"
///   cells <m>           followed by m lines "a b c"
///   boundary_edges <k>  followed by k lines "a b tag-name"
/// Coordinates are written with 17 significant digits.
void write_mesh_dump(const Mesh2D& mesh, std::ostream& out);
Mesh2D read_mesh_dump(std::istream& in);

/// Unit square, n x n quads each split into two triangles. The top edge is
/// tagged `lid` when `lid_top` is set, every other side `wall`.
Mesh2D gen_structured_square(int n, bool lid_top);

/// Each triangle split into four through its edge midpoints; boundary tags inherited.
Mesh2D refine_uniform(const Mesh2D& mesh);

/// Shoelace area of the closed boundary loops (outer loop positive, holes negative).
double boundary_loop_area(const Mesh2D& mesh);

}  // namespace semflow
