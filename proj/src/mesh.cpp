#include "semflow/mesh.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <unordered_map>

namespace semflow {

namespace {

constexpr std::array<std::string_view, 7> kTagNames = {"inflow", "outflow", "free_surface", "bed",
                                                       "body",   "wall",    "lid"};

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

std::string edge_name(int a, int b) {
  return "(" + std::to_string(a) + ", " + std::to_string(b) + ")";
}

}  // namespace

std::string_view to_string(BoundaryTag tag) { return kTagNames[static_cast<int>(tag)]; }

std::optional<BoundaryTag> parse_boundary_tag(std::string_view name) {
  for (std::size_t i = 0; i < kTagNames.size(); ++i) {
    if (kTagNames[i] == name) return static_cast<BoundaryTag>(i);
  }
  return std::nullopt;
}

Mesh2D::Mesh2D(std::vector<Point> vertices, std::vector<std::array<int, 3>> cells,
               std::vector<BoundaryEdge> boundary_edges)
    : vertices_(std::move(vertices)),
      cells_(std::move(cells)),
      boundary_edges_(std::move(boundary_edges)) {
  const int nv = static_cast<int>(vertices_.size());
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    auto& cell = cells_[c];
    for (int v : cell) {
      if (v < 0 || v >= nv) throw MeshError("cell " + std::to_string(c) + " references missing vertex");
    }
    const Point& a = vertices_[cell[0]];
    const Point& b = vertices_[cell[1]];
    const Point& d = vertices_[cell[2]];
    const double area2 = (b - a).x() * (d - a).y() - (b - a).y() * (d - a).x();
    if (area2 == 0.0) throw MeshError("cell " + std::to_string(c) + " is degenerate (zero area)");
    if (area2 < 0.0) std::swap(cell[1], cell[2]);
  }

  std::unordered_map<std::uint64_t, int> edge_index;
  edge_index.reserve(cells_.size() * 2);
  cell_edges_.resize(cells_.size());
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    for (int k = 0; k < 3; ++k) {
      const int a = cells_[c][k];
      const int b = cells_[c][(k + 1) % 3];
      const auto key = edge_key(a, b);
      auto [it, inserted] = edge_index.try_emplace(key, static_cast<int>(edges_.size()));
      if (inserted) {
        Edge e;
        e.vertices = {std::min(a, b), std::max(a, b)};
        e.cells = {static_cast<int>(c), -1};
        e.local_index = {k, -1};
        edges_.push_back(e);
      } else {
        Edge& e = edges_[it->second];
        if (e.cells[1] != -1) {
          throw MeshError("edge " + edge_name(a, b) + " is shared by more than two cells");
        }
        e.cells[1] = static_cast<int>(c);
        e.local_index[1] = k;
      }
      cell_edges_[c][k] = it->second;
    }
  }

  for (const auto& be : boundary_edges_) {
    auto it = edge_index.find(edge_key(be.vertices[0], be.vertices[1]));
    if (it == edge_index.end()) {
      throw MeshError("boundary edge " + edge_name(be.vertices[0], be.vertices[1]) +
                      " does not belong to any cell");
    }
    Edge& e = edges_[it->second];
    if (e.cells[1] != -1) {
      throw MeshError("boundary edge " + edge_name(be.vertices[0], be.vertices[1]) +
                      " is an interior edge");
    }
    if (e.tag) {
      throw MeshError("boundary edge " + edge_name(be.vertices[0], be.vertices[1]) +
                      " carries more than one tag");
    }
    e.tag = be.tag;
  }
  for (const auto& e : edges_) {
    if (e.cells[1] == -1 && !e.tag) {
      throw MeshError("untagged boundary edge " + edge_name(e.vertices[0], e.vertices[1]));
    }
  }
}

double Mesh2D::signed_area(int cell) const {
  const auto& c = cells_[cell];
  const Point& a = vertices_[c[0]];
  const Point& b = vertices_[c[1]];
  const Point& d = vertices_[c[2]];
  return 0.5 * ((b - a).x() * (d - a).y() - (b - a).y() * (d - a).x());
}

double Mesh2D::total_area() const {
  double sum = 0.0;
  for (std::size_t c = 0; c < cells_.size(); ++c) sum += signed_area(static_cast<int>(c));
  return sum;
}

MeshStats Mesh2D::stats() const {
  MeshStats s;
  s.n_nodes = vertices_.size();
  s.n_elements = cells_.size();
  for (const auto& be : boundary_edges_) ++s.boundary_edges[be.tag];
  return s;
}

std::vector<BoundaryTag> Mesh2D::tags_present() const {
  std::vector<BoundaryTag> tags;
  for (const auto& be : boundary_edges_) {
    if (std::find(tags.begin(), tags.end(), be.tag) == tags.end()) tags.push_back(be.tag);
  }
  std::sort(tags.begin(), tags.end());
  return tags;
}

double boundary_loop_area(const Mesh2D& mesh) {
  // Orient each boundary edge as its owning (counter-clockwise) cell traverses it;
  // the sum of x dy - y dx over all such edges is twice the enclosed area.
  double twice = 0.0;
  for (const auto& e : mesh.edges()) {
    if (e.cells[1] != -1) continue;
    const auto& cell = mesh.cells()[e.cells[0]];
    const int k = e.local_index[0];
    const Point& a = mesh.vertices()[cell[k]];
    const Point& b = mesh.vertices()[cell[(k + 1) % 3]];
    twice += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * twice;
}

namespace {

class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  bool next(std::string_view& line) {
    while (pos_ < text_.size()) {
      const auto end = text_.find('\n', pos_);
      const auto stop = end == std::string_view::npos ? text_.size() : end;
      line = text_.substr(pos_, stop - pos_);
      pos_ = stop + 1;
      ++line_no_;
      while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) {
        line.remove_suffix(1);
      }
      while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
      if (!line.empty()) return true;
    }
    return false;
  }

  std::string_view expect_line(std::string_view what) {
    std::string_view line;
    if (!next(line)) fail("unexpected end of file while reading " + std::string(what));
    return line;
  }

  void expect(std::string_view header) {
    const auto line = expect_line(header);
    if (line != header) {
      fail("malformed section header: expected '" + std::string(header) + "', found '" +
           std::string(line) + "'");
    }
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw InputError("msh line " + std::to_string(line_no_) + ": " + msg);
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  int line_no_ = 0;
};

std::vector<std::string> split_ws(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

long to_long(const LineReader& r, const std::string& s) {
  long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) r.fail("expected integer, found '" + s + "'");
  return v;
}

double to_double(const LineReader& r, const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    r.fail("expected number, found '" + s + "'");
  }
}

}  // namespace

Mesh2D parse_msh(std::string_view text, const TagTable& names) {
  LineReader reader(text);
  reader.expect("$MeshFormat");
  {
    const auto fmt = split_ws(reader.expect_line("format line"));
    if (fmt.size() != 3 || fmt[0] != "2.2" || fmt[1] != "0") {
      reader.fail("unsupported mesh format (need ASCII 2.2)");
    }
  }
  reader.expect("$EndMeshFormat");

  std::map<long, std::string> physical_names;
  std::vector<Point> vertices;
  std::unordered_map<long, int> node_index;
  std::vector<std::array<int, 3>> cells;
  std::vector<BoundaryEdge> boundary;
  bool have_nodes = false, have_elements = false;

  std::string_view line;
  while (reader.next(line)) {
    if (line == "$PhysicalNames") {
      const long n = to_long(reader, std::string(reader.expect_line("physical name count")));
      for (long i = 0; i < n; ++i) {
        const auto l = reader.expect_line("physical name");
        const auto tok = split_ws(l);
        if (tok.size() < 3) reader.fail("malformed physical name entry");
        const auto q1 = l.find('"');
        const auto q2 = l.rfind('"');
        if (q1 == std::string_view::npos || q2 == q1) reader.fail("physical name must be quoted");
        physical_names[to_long(reader, tok[1])] = std::string(l.substr(q1 + 1, q2 - q1 - 1));
      }
      reader.expect("$EndPhysicalNames");
    } else if (line == "$Nodes") {
      const long n = to_long(reader, std::string(reader.expect_line("node count")));
      vertices.reserve(n);
      for (long i = 0; i < n; ++i) {
        const auto tok = split_ws(reader.expect_line("node"));
        if (tok.size() != 4) reader.fail("node line must have 4 fields");
        node_index[to_long(reader, tok[0])] = static_cast<int>(vertices.size());
        vertices.emplace_back(to_double(reader, tok[1]), to_double(reader, tok[2]));
      }
      reader.expect("$EndNodes");
      have_nodes = true;
    } else if (line == "$Elements") {
      if (!have_nodes) reader.fail("$Elements before $Nodes");
      const long n = to_long(reader, std::string(reader.expect_line("element count")));
      for (long i = 0; i < n; ++i) {
        const auto tok = split_ws(reader.expect_line("element"));
        if (tok.size() < 3) reader.fail("element line too short");
        const long type = to_long(reader, tok[1]);
        const long ntags = to_long(reader, tok[2]);
        const std::size_t first_node = 3 + static_cast<std::size_t>(ntags);
        const std::size_t nn = type == 1 ? 2 : type == 2 ? 3 : 0;
        if (nn == 0) {
          reader.fail("unsupported element type " + std::to_string(type) +
                      " (only 1 = line and 2 = triangle)");
        }
        if (tok.size() != first_node + nn) reader.fail("element node count mismatch");
        auto node = [&](std::size_t k) {
          const auto it = node_index.find(to_long(reader, tok[first_node + k]));
          if (it == node_index.end()) reader.fail("element references unknown node " + tok[first_node + k]);
          return it->second;
        };
        if (type == 2) {
          cells.push_back({node(0), node(1), node(2)});
        } else {
          const int a = node(0), b = node(1);
          if (ntags < 1) {
            throw MeshError("untagged boundary edge " + edge_name(a, b) + " (line element " + tok[0] + ")");
          }
          const long phys = to_long(reader, tok[3]);
          std::optional<BoundaryTag> tag;
          const auto pn = physical_names.find(phys);
          if (pn != physical_names.end()) {
            if (auto t = parse_boundary_tag(pn->second)) {
              tag = t;
            } else if (auto m = names.find(pn->second); m != names.end()) {
              tag = m->second;
            }
          }
          if (!tag) {
            if (auto m = names.find(std::to_string(phys)); m != names.end()) tag = m->second;
          }
          if (!tag) {
            throw MeshError("untagged boundary edge " + edge_name(a, b) + ": physical group " +
                            std::to_string(phys) +
                            (pn != physical_names.end() ? " ('" + pn->second + "')" : std::string()) +
                            " has no boundary tag mapping");
          }
          boundary.push_back({{a, b}, *tag});
        }
      }
      reader.expect("$EndElements");
      have_elements = true;
    } else if (!line.empty() && line.front() == '$' && line.substr(0, 4) != "$End") {
      // Skip unknown sections such as $Periodic or $NodeData.
      const std::string end = "$End" + std::string(line.substr(1));
      std::string_view l2;
      bool closed = false;
      while (reader.next(l2)) {
        if (l2 == end) {
          closed = true;
          break;
        }
      }
      if (!closed) reader.fail("section " + std::string(line) + " is not closed");
    } else {
      reader.fail("malformed section header '" + std::string(line) + "'");
    }
  }
  if (!have_nodes || !have_elements) throw InputError("msh file lacks $Nodes or $Elements");
  return Mesh2D(std::move(vertices), std::move(cells), std::move(boundary));
}

Mesh2D read_msh(const std::filesystem::path& path, const TagTable& names) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open mesh file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_msh(buf.str(), names);
}

void write_msh(const Mesh2D& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write mesh file " + path.string());
  out << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n";
  const auto tags = mesh.tags_present();
  out << "$PhysicalNames\n" << tags.size() << "\n";
  for (auto t : tags) out << "1 " << static_cast<int>(t) + 1 << " \"" << to_string(t) << "\"\n";
  out << "$EndPhysicalNames\n";
  out << "$Nodes\n" << mesh.n_vertices() << "\n" << std::setprecision(17);
  for (std::size_t i = 0; i < mesh.n_vertices(); ++i) {
    out << i + 1 << " " << mesh.vertices()[i].x() << " " << mesh.vertices()[i].y() << " 0\n";
  }
  out << "$EndNodes\n";
  out << "$Elements\n" << mesh.boundary_edges().size() + mesh.n_cells() << "\n";
  std::size_t id = 1;
  for (const auto& be : mesh.boundary_edges()) {
    const int phys = static_cast<int>(be.tag) + 1;
    out << id++ << " 1 2 " << phys << " " << phys << " " << be.vertices[0] + 1 << " "
        << be.vertices[1] + 1 << "\n";
  }
  for (const auto& c : mesh.cells()) {
    out << id++ << " 2 2 100 100 " << c[0] + 1 << " " << c[1] + 1 << " " << c[2] + 1 << "\n";
  }
  out << "$EndElements\n";
}

void write_mesh_dump(const Mesh2D& mesh, std::ostream& out) {
  out << "semflow-mesh 1\n" << std::setprecision(17);
  out << "vertices " << mesh.n_vertices() << "\n";
  for (const auto& v : mesh.vertices()) out << v.x() << " " << v.y() << "\n";
  out << "cells " << mesh.n_cells() << "\n";
  for (const auto& c : mesh.cells()) out << c[0] << " " << c[1] << " " << c[2] << "\n";
  out << "boundary_edges " << mesh.boundary_edges().size() << "\n";
  for (const auto& be : mesh.boundary_edges()) {
    out << be.vertices[0] << " " << be.vertices[1] << " " << to_string(be.tag) << "\n";
  }
}

Mesh2D read_mesh_dump(std::istream& in) {
  std::string word;
  int version = 0;
  if (!(in >> word >> version) || word != "semflow-mesh" || version != 1) {
    throw InputError("not a semflow mesh dump");
  }
  auto header = [&](const char* name) {
    std::size_t n = 0;
    if (!(in >> word >> n) || word != name) throw InputError(std::string("mesh dump: expected ") + name);
    return n;
  };
  std::vector<Point> vertices(header("vertices"));
  for (auto& v : vertices) {
    if (!(in >> v.x() >> v.y())) throw InputError("mesh dump: bad vertex");
  }
  std::vector<std::array<int, 3>> cells(header("cells"));
  for (auto& c : cells) {
    if (!(in >> c[0] >> c[1] >> c[2])) throw InputError("mesh dump: bad cell");
  }
  std::vector<BoundaryEdge> edges(header("boundary_edges"));
  for (auto& e : edges) {
    if (!(in >> e.vertices[0] >> e.vertices[1] >> word)) throw InputError("mesh dump: bad edge");
    const auto tag = parse_boundary_tag(word);
    if (!tag) throw InputError("mesh dump: unknown tag " + word);
    e.tag = *tag;
  }
  return Mesh2D(std::move(vertices), std::move(cells), std::move(edges));
}

Mesh2D gen_structured_square(int n, bool lid_top) {
  if (n < 1) throw InputError("gen_structured_square: n must be >= 1");
  std::vector<Point> vertices;
  vertices.reserve((n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      vertices.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);
    }
  }
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  std::vector<std::array<int, 3>> cells;
  cells.reserve(2 * n * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      cells.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  std::vector<BoundaryEdge> edges;
  const BoundaryTag top = lid_top ? BoundaryTag::lid : BoundaryTag::wall;
  for (int i = 0; i < n; ++i) {
    edges.push_back({{id(i, 0), id(i + 1, 0)}, BoundaryTag::wall});
    edges.push_back({{id(i + 1, n), id(i, n)}, top});
    edges.push_back({{id(n, i), id(n, i + 1)}, BoundaryTag::wall});
    edges.push_back({{id(0, i + 1), id(0, i)}, BoundaryTag::wall});
  }
  return Mesh2D(std::move(vertices), std::move(cells), std::move(edges));
}

Mesh2D refine_uniform(const Mesh2D& mesh) {
  std::vector<Point> vertices = mesh.vertices();
  const int nv = static_cast<int>(vertices.size());
  vertices.reserve(nv + mesh.n_edges());
  for (const auto& e : mesh.edges()) {
    vertices.push_back(0.5 * (mesh.vertices()[e.vertices[0]] + mesh.vertices()[e.vertices[1]]));
  }
  std::vector<std::array<int, 3>> cells;
  cells.reserve(4 * mesh.n_cells());
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    const auto& v = mesh.cells()[c];
    const int m0 = nv + mesh.cell_edge(static_cast<int>(c), 0);
    const int m1 = nv + mesh.cell_edge(static_cast<int>(c), 1);
    const int m2 = nv + mesh.cell_edge(static_cast<int>(c), 2);
    cells.push_back({v[0], m0, m2});
    cells.push_back({m0, v[1], m1});
    cells.push_back({m2, m1, v[2]});
    cells.push_back({m0, m1, m2});
  }
  std::vector<BoundaryEdge> boundary;
  boundary.reserve(2 * mesh.boundary_edges().size());
  for (std::size_t ei = 0; ei < mesh.n_edges(); ++ei) {
    const auto& e = mesh.edges()[ei];
    if (!e.tag) continue;
    const int mid = nv + static_cast<int>(ei);
    boundary.push_back({{e.vertices[0], mid}, *e.tag});
    boundary.push_back({{mid, e.vertices[1]}, *e.tag});
  }
  return Mesh2D(std::move(vertices), std::move(cells), std::move(boundary));
}

}  // namespace semflow
