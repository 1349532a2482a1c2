#include "doctest.h"

#include <filesystem>
#include <set>
#include <sstream>

#include "semflow/mesh.hpp"

using namespace semflow;

namespace {

const char* kOneTriangle = R"($MeshFormat
2.2 0 8
$EndMeshFormat
$PhysicalNames
3
1 1 "inflow"
1 2 "bed"
1 3 "top"
$EndPhysicalNames
$Nodes
3
1 0 0 0
2 1 0 0
3 0 1 0
$EndNodes
$Elements
4
1 1 2 2 2 1 2
2 1 2 3 3 2 3
3 1 2 1 1 3 1
4 2 2 9 9 1 2 3
$EndElements
)";

std::string replace(std::string s, const std::string& from, const std::string& to) {
  s.replace(s.find(from), from.size(), to);
  return s;
}

// Counts distinct undirected edges by brute force over all cells.
std::size_t count_edges(const Mesh2D& m) {
  std::set<std::pair<int, int>> e;
  for (const auto& c : m.cells()) {
    for (int k = 0; k < 3; ++k) e.insert(std::minmax(c[k], c[(k + 1) % 3]));
  }
  return e.size();
}

}  // namespace

TEST_CASE("read a single tagged triangle") {
  const auto m = parse_msh(kOneTriangle, {{"top", BoundaryTag::free_surface}});
  CHECK(m.n_cells() == 1);
  CHECK(m.boundary_edges().size() == 3);
  CHECK(m.stats().boundary(BoundaryTag::free_surface) == 1);
  CHECK(m.signed_area(0) == doctest::Approx(0.5));
}

TEST_CASE("clockwise triangle is reoriented") {
  const auto text = replace(kOneTriangle, "4 2 2 9 9 1 2 3", "4 2 2 9 9 1 3 2");
  const auto m = parse_msh(text, {{"top", BoundaryTag::wall}});
  CHECK(m.signed_area(0) > 0.0);
  CHECK(std::set<int>(m.cells()[0].begin(), m.cells()[0].end()) == std::set<int>{0, 1, 2});
}

TEST_CASE("msh errors") {
  CHECK_THROWS_WITH_AS(parse_msh(kOneTriangle), doctest::Contains("untagged boundary edge (1, 2)"),
                       MeshError);
  CHECK_THROWS_AS(parse_msh(replace(kOneTriangle, "$Nodes", "$Nodez")), InputError);
  CHECK_THROWS_AS(parse_msh(replace(kOneTriangle, "4 2 2 9 9 1 2 3", "4 3 2 9 9 1 2 3 1"),
                            {{"top", BoundaryTag::wall}}),
                  InputError);
  const auto missing = replace(kOneTriangle, "3 1 2 1 1 3 1\n", "");
  CHECK_THROWS_AS(parse_msh(replace(missing, "$Elements\n4", "$Elements\n3"), {{"top", BoundaryTag::wall}}),
                  MeshError);
}

TEST_CASE("structured square") {
  CHECK_THROWS_AS(gen_structured_square(0, true), InputError);
  const auto m1 = gen_structured_square(1, true);
  CHECK(m1.n_cells() == 2);
  CHECK(m1.boundary_edges().size() == 4);
  const auto m2 = gen_structured_square(2, true);
  for (std::size_t c = 0; c < m2.n_cells(); ++c) CHECK(m2.signed_area(int(c)) == doctest::Approx(0.125));
  for (int n = 1; n <= 4; ++n) {
    const auto m = gen_structured_square(n, false);
    CHECK(m.n_cells() == static_cast<std::size_t>(2 * n * n));
    CHECK(count_edges(m) == m.n_edges());
    CHECK(m.n_edges() == static_cast<std::size_t>(3 * n * n + 2 * n));
  }
  const auto big = gen_structured_square(128, true);
  CHECK(big.n_cells() == 32768);
  CHECK(big.stats().boundary(BoundaryTag::lid) == 128);
  CHECK(big.stats().boundary(BoundaryTag::wall) == 3 * 128);
}

TEST_CASE("uniform refinement") {
  const auto one = parse_msh(kOneTriangle, {{"top", BoundaryTag::wall}});
  const auto r = refine_uniform(one);
  CHECK(r.n_cells() == 4);
  for (std::size_t c = 0; c < 4; ++c) CHECK(r.signed_area(int(c)) == doctest::Approx(0.125));
  CHECK(r.boundary_edges().size() == 6);
  CHECK(r.stats().boundary(BoundaryTag::bed) == 2);

  const auto m = gen_structured_square(3, true);
  auto rr = refine_uniform(refine_uniform(m));
  CHECK(rr.boundary_edges().size() == 4 * m.boundary_edges().size());
  CHECK(std::abs(rr.total_area() - m.total_area()) <= 1e-14 * m.total_area());
}

TEST_CASE("cell areas sum to the boundary loop area") {
  for (const auto& m : {gen_structured_square(5, true), refine_uniform(gen_structured_square(3, false))}) {
    CHECK(std::abs(m.total_area() - boundary_loop_area(m)) <= 1e-12 * m.total_area());
  }
}

TEST_CASE("msh and dump round trips") {
  const auto m = refine_uniform(gen_structured_square(3, true));
  const auto path = std::filesystem::temp_directory_path() / "semflow_roundtrip.msh";
  write_msh(m, path);
  const auto back = read_msh(path);
  std::filesystem::remove(path);
  REQUIRE(back.n_vertices() == m.n_vertices());
  for (std::size_t i = 0; i < m.n_vertices(); ++i) CHECK(back.vertices()[i] == m.vertices()[i]);
  CHECK(back.cells() == m.cells());
  REQUIRE(back.boundary_edges().size() == m.boundary_edges().size());
  for (std::size_t i = 0; i < m.boundary_edges().size(); ++i) {
    CHECK(back.boundary_edges()[i].tag == m.boundary_edges()[i].tag);
    CHECK(back.boundary_edges()[i].vertices == m.boundary_edges()[i].vertices);
  }

  std::stringstream buf;
  write_mesh_dump(m, buf);
  const auto d = read_mesh_dump(buf);
  CHECK(d.cells() == m.cells());
  CHECK(d.stats().boundary_edges == m.stats().boundary_edges);
}

TEST_CASE("tag names") {
  for (auto t : all_boundary_tags) CHECK(parse_boundary_tag(to_string(t)) == t);
  CHECK_FALSE(parse_boundary_tag("nope").has_value());
}
