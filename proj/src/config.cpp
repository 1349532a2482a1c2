#include "semflow/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#define TOML_FLOAT_CHARCONV 1
#include <toml.hpp>

namespace semflow {

namespace {

constexpr std::array<std::pair<CaseKind, std::string_view>, 8> kCaseNames = {{
    {CaseKind::cavity, "cavity"},
    {CaseKind::channel_naca, "channel_naca"},
    {CaseKind::channel_cylinder, "channel_cylinder"},
    {CaseKind::bump_fs, "bump_fs"},
    {CaseKind::naca_fs, "naca_fs"},
    {CaseKind::custom, "custom"},
    {CaseKind::poiseuille, "poiseuille"},
    {CaseKind::kovasznay, "kovasznay"},
}};

constexpr std::array<std::pair<BCSpecKind, std::string_view>, 7> kBCNames = {{
    {BCSpecKind::no_slip, "no_slip"},
    {BCSpecKind::dirichlet, "dirichlet"},
    {BCSpecKind::free_slip, "free_slip"},
    {BCSpecKind::traction_free, "traction_free"},
    {BCSpecKind::free_surface, "free_surface"},
    {BCSpecKind::exact, "exact"},
    {BCSpecKind::exact_traction, "exact_traction"},
}};

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw InputError("config: " + key + ": " + what);
}

// Reads one section, tracking which keys were consumed so leftovers can be reported.
class Section {
 public:
  Section(const toml::table* table, std::string prefix) : table_(table), prefix_(std::move(prefix)) {}

  const toml::node* find(std::string_view key) {
    if (!table_) return nullptr;
    used_.insert(std::string(key));
    return table_->get(key);
  }
  std::string path(std::string_view key) const { return prefix_.empty() ? std::string(key) : prefix_ + "." + std::string(key); }

  void read(std::string_view key, double& out) {
    if (auto* n = find(key)) {
      auto v = n->value<double>();
      if (!v || !(n->is_floating_point() || n->is_integer())) fail(path(key), "expected a number");
      out = *v;
    }
  }
  void read(std::string_view key, int& out) {
    if (auto* n = find(key)) {
      if (!n->is_integer()) fail(path(key), "expected an integer");
      const auto v = n->as_integer()->get();
      if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) fail(path(key), "out of range");
      out = static_cast<int>(v);
    }
  }
  void read(std::string_view key, bool& out) {
    if (auto* n = find(key)) {
      if (!n->is_boolean()) fail(path(key), "expected true or false");
      out = n->as_boolean()->get();
    }
  }
  void read(std::string_view key, std::string& out) {
    if (auto* n = find(key)) {
      if (!n->is_string()) fail(path(key), "expected a string");
      out = n->as_string()->get();
    }
  }
  template <class T>
  void read(std::string_view key, std::vector<T>& out) {
    if (auto* n = find(key)) {
      const auto* arr = n->as_array();
      if (!arr) fail(path(key), "expected an array");
      std::vector<T> v;
      for (const auto& e : *arr) {
        if constexpr (std::is_same_v<T, int>) {
          if (!e.is_integer()) fail(path(key), "expected integers");
          v.push_back(static_cast<int>(e.as_integer()->get()));
        } else {
          if (!(e.is_integer() || e.is_floating_point())) fail(path(key), "expected numbers");
          v.push_back(*e.value<double>());
        }
      }
      out = std::move(v);
    }
  }
  const toml::table* sub(std::string_view key) {
    auto* n = find(key);
    if (!n) return nullptr;
    if (!n->is_table()) fail(path(key), "expected a table");
    return n->as_table();
  }
  void finish() const {
    if (!table_) return;
    for (auto&& [k, v] : *table_)
      if (!used_.count(std::string(k.str()))) fail(path(k.str()), "unknown key");
  }

 private:
  const toml::table* table_;
  std::string prefix_;
  std::set<std::string> used_;
};

template <class T>
toml::array to_array(const std::vector<T>& v) {
  toml::array a;
  for (const T& x : v) a.push_back(x);
  return a;
}

bool inside(const Point& p, double x0, double x1, double y0, double y1) {
  return p.x() > x0 && p.x() < x1 && p.y() > y0 && p.y() < y1;
}

}  // namespace

std::string_view to_string(CaseKind kind) {
  for (auto& [k, n] : kCaseNames)
    if (k == kind) return n;
  return "?";
}

CaseKind parse_case_kind(std::string_view name) {
  for (auto& [k, n] : kCaseNames)
    if (n == name) return k;
  throw InputError("config: case: unknown case '" + std::string(name) + "'");
}

bool is_free_surface(CaseKind kind) { return kind == CaseKind::bump_fs || kind == CaseKind::naca_fs; }

std::string_view to_string(BCSpecKind kind) {
  for (auto& [k, n] : kBCNames)
    if (k == kind) return n;
  return "?";
}

BCSpecKind parse_bc_kind(std::string_view name) {
  for (auto& [k, n] : kBCNames)
    if (n == name) return k;
  throw InputError("config: unknown boundary condition kind '" + std::string(name) + "'");
}

CaseConfig default_config(CaseKind kind) {
  CaseConfig c;
  c.kind = kind;
  c.name = std::string(to_string(kind));
  using T = BoundaryTag;
  using K = BCSpecKind;
  auto uniform_inflow = BCSpec{K::dirichlet, Point(1, 0)};
  switch (kind) {
    case CaseKind::cavity:
      c.mesh.n = 64;
      c.flow.re = 1000;
      c.solver.continuation_start = 1;
      c.bc = {{T::wall, {K::no_slip, Point::Zero()}}, {T::lid, {K::dirichlet, Point(1, 0)}}};
      break;
    case CaseKind::channel_cylinder:
      c.domain = {-2, 4, -2, 2};
      c.mesh.refinements = 2;
      c.flow.order = 4;
      c.flow.re = 15;
      c.bc = {{T::inflow, uniform_inflow},
              {T::wall, {K::free_slip, Point::Zero()}},
              {T::body, {K::no_slip, Point::Zero()}},
              {T::outflow, {K::traction_free, Point::Zero()}}};
      c.sweep.refinements = {1, 2, 3};
      c.sweep.orders = {2, 3, 4, 5};
      c.sweep.tolerances = {1e-2, 1e-3, 1e-4, 1e-5};
      break;
    case CaseKind::channel_naca:
      c.domain = {-12, 24, -8, 8};
      c.mesh.box = {-0.5, 1.5, -0.6, 0.6};
      c.mesh.body_points = 64;
      c.mesh.layers = 4;
      c.mesh.layer_growth = 1.6;
      c.mesh.blocks = {4, 8, 4, 4};
      c.flow.re = 1000;
      c.solver.continuation_start = 1;
      c.bc = {{T::inflow, uniform_inflow},
              {T::wall, {K::free_slip, Point::Zero()}},
              {T::body, {K::no_slip, Point::Zero()}},
              {T::outflow, {K::traction_free, Point::Zero()}}};
      c.sweep.metric = "cd";
      break;
    case CaseKind::naca_fs:
      c.domain = {-14, 20, -5, 1.252};
      c.mesh.box = {-0.5, 1.5, -0.6, 0.6};
      c.mesh.body_points = 64;
      c.mesh.layers = 4;
      c.mesh.layer_growth = 1.6;
      c.mesh.blocks = {8, 12, 3, 2};
      c.flow.re = 1261;
      c.flow.fr = 0.67;
      c.flow.alpha = 5;
      c.solver.continuation_start = 1;
      c.free_surface.level = 1.252;
      c.free_surface.y0 = 0.6;
      c.bc = {{T::inflow, uniform_inflow},
              {T::bed, {K::free_slip, Point::Zero()}},
              {T::free_surface, {K::free_surface, Point::Zero()}},
              {T::body, {K::no_slip, Point::Zero()}},
              {T::outflow, {K::traction_free, Point::Zero()}}};
      break;
    case CaseKind::bump_fs:
      c.domain = {-8, 12, -1, 0};
      c.mesh.dx = 0.25;
      c.mesh.ny = 4;
      c.flow.re = 100;
      c.flow.fr = 0.43;
      c.free_surface.y0 = -0.5;
      c.bc = {{T::inflow, uniform_inflow},
              {T::bed, {K::free_slip, Point::Zero()}},
              {T::free_surface, {K::free_surface, Point::Zero()}},
              {T::outflow, {K::traction_free, Point::Zero()}}};
      break;
    case CaseKind::poiseuille:
      c.domain = {0, 3, -1, 1};
      c.mesh.n = 3;
      c.mesh.ny = 2;
      c.flow.order = 2;
      c.flow.re = 1;
      c.bc = {{T::inflow, {K::exact, Point::Zero()}},
              {T::wall, {K::no_slip, Point::Zero()}},
              {T::outflow, {K::exact_traction, Point::Zero()}}};
      c.sweep.metric = "l2";
      break;
    case CaseKind::kovasznay:
      c.domain = {-0.5, 1, -0.5, 1.5};
      c.mesh.n = 8;
      c.mesh.ny = 8;
      c.flow.re = 40;
      c.bc = {{T::inflow, {K::exact, Point::Zero()}},
              {T::wall, {K::exact, Point::Zero()}},
              {T::outflow, {K::exact, Point::Zero()}}};
      c.sweep.refinements = {0};
      c.sweep.orders = {2, 3, 4, 5, 6, 7, 8, 9};
      c.sweep.tolerances = {1e-3, 1e-5, 1e-7, 1e-9};
      c.sweep.metric = "l2";
      break;
    case CaseKind::custom:
      break;
  }
  return c;
}

CaseConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << "config: line " << e.source().begin.line << ": " << e.description();
    throw InputError(os.str());
  }
  Section top(&root, "");
  std::string kind_name;
  top.read("case", kind_name);
  if (kind_name.empty()) fail("case", "missing");
  CaseConfig c = default_config(parse_case_kind(kind_name));
  top.read("name", c.name);

  Section mesh(top.sub("mesh"), "mesh");
  mesh.read("file", c.mesh.file);
  mesh.read("refinements", c.mesh.refinements);
  mesh.read("n", c.mesh.n);
  mesh.read("dx", c.mesh.dx);
  mesh.read("ny", c.mesh.ny);
  mesh.read("layer_ratio", c.mesh.layer_ratio);
  mesh.read("body_points", c.mesh.body_points);
  mesh.read("layers", c.mesh.layers);
  mesh.read("layer_growth", c.mesh.layer_growth);
  mesh.read("box", c.mesh.box);
  mesh.read("blocks", c.mesh.blocks);
  mesh.read("curved", c.mesh.curved);
  if (const toml::table* names = mesh.sub("tag_names")) {
    c.mesh.tag_names.clear();
    for (auto&& [k, v] : *names) {
      const std::string key = "mesh.tag_names." + std::string(k.str());
      if (!v.is_string()) fail(key, "expected a tag name");
      auto tag = parse_boundary_tag(v.as_string()->get());
      if (!tag) fail(key, "unknown boundary tag '" + v.as_string()->get() + "'");
      c.mesh.tag_names[std::string(k.str())] = *tag;
    }
  }
  mesh.finish();
  if (!c.mesh.file.empty() && !base_dir.empty() && std::filesystem::path(c.mesh.file).is_relative())
    c.mesh.file = (base_dir / c.mesh.file).lexically_normal().string();

  Section dom(top.sub("domain"), "domain");
  dom.read("x0", c.domain.x0);
  dom.read("x1", c.domain.x1);
  dom.read("y0", c.domain.y0);
  dom.read("y1", c.domain.y1);
  dom.finish();

  Section flow(top.sub("flow"), "flow");
  flow.read("order", c.flow.order);
  int pressure_order = c.flow.order - 1;
  flow.read("pressure_order", pressure_order);
  if (pressure_order != c.flow.order - 1) fail("flow.pressure_order", "must equal order - 1");
  flow.read("re", c.flow.re);
  flow.read("fr", c.flow.fr);
  flow.read("alpha", c.flow.alpha);
  flow.read("depth", c.flow.depth);
  flow.read("chord", c.flow.chord);
  flow.read("bump_height", c.flow.bump_height);
  flow.read("bump_length", c.flow.bump_length);
  flow.finish();

  if (const toml::table* bc = top.sub("bc")) {
    for (auto&& [k, v] : *bc) {
      const std::string key = "bc." + std::string(k.str());
      auto tag = parse_boundary_tag(k.str());
      if (!tag) fail(key, "unknown boundary tag");
      if (!v.is_table()) fail(key, "expected a table");
      Section s(v.as_table(), key);
      std::string kind;
      s.read("kind", kind);
      if (kind.empty()) fail(key + ".kind", "missing");
      BCSpec spec;
      try {
        spec.kind = parse_bc_kind(kind);
      } catch (const InputError&) {
        fail(key + ".kind", "unknown kind '" + kind + "'");
      }
      std::vector<double> value;
      s.read("value", value);
      if (!value.empty()) {
        if (value.size() != 2) fail(key + ".value", "expected [u, v]");
        spec.value = Point(value[0], value[1]);
      }
      s.finish();
      c.bc[*tag] = spec;
    }
  }

  Section sol(top.sub("solver"), "solver");
  sol.read("linear", c.solver.linear);
  sol.read("gmres_restart", c.solver.gmres_restart);
  sol.read("ilu_fill", c.solver.ilu_fill);
  sol.read("linear_tolerance", c.solver.linear_tolerance);
  sol.read("rtol", c.solver.rtol);
  sol.read("atol", c.solver.atol);
  sol.read("max_iterations", c.solver.max_iterations);
  sol.read("step_halving", c.solver.step_halving);
  sol.read("continuation_start", c.solver.continuation_start);
  sol.finish();

  Section fs(top.sub("free_surface"), "free_surface");
  fs.read("tolerance", c.free_surface.tolerance);
  fs.read("max_steps", c.free_surface.max_steps);
  fs.read("cfl", c.free_surface.cfl);
  fs.read("damping_c", c.free_surface.damping_c);
  fs.read("level", c.free_surface.level);
  fs.read("y0", c.free_surface.y0);
  fs.finish();

  Section out(top.sub("output"), "output");
  out.read("dir", c.output.dir);
  out.read("fields", c.output.fields);
  out.read("samples", c.output.samples);
  out.finish();

  Section sw(top.sub("sweep"), "sweep");
  sw.read("refinements", c.sweep.refinements);
  sw.read("orders", c.sweep.orders);
  sw.read("tolerances", c.sweep.tolerances);
  sw.read("metric", c.sweep.metric);
  sw.read("reference", c.sweep.reference);
  sw.read("repeat", c.sweep.repeat);
  sw.finish();

  top.finish();
  validate_config(c);
  return c;
}

CaseConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

std::string serialize_config(const CaseConfig& c) {
  toml::table root;
  root.insert("case", std::string(to_string(c.kind)));
  root.insert("name", c.name);

  toml::table tag_names;
  for (auto& [k, v] : c.mesh.tag_names) tag_names.insert(k, std::string(to_string(v)));
  root.insert("mesh", toml::table{{"file", c.mesh.file},
                                  {"refinements", c.mesh.refinements},
                                  {"n", c.mesh.n},
                                  {"dx", c.mesh.dx},
                                  {"ny", c.mesh.ny},
                                  {"layer_ratio", c.mesh.layer_ratio},
                                  {"body_points", c.mesh.body_points},
                                  {"layers", c.mesh.layers},
                                  {"layer_growth", c.mesh.layer_growth},
                                  {"box", to_array(c.mesh.box)},
                                  {"blocks", to_array(c.mesh.blocks)},
                                  {"curved", c.mesh.curved},
                                  {"tag_names", std::move(tag_names)}});
  root.insert("domain", toml::table{{"x0", c.domain.x0}, {"x1", c.domain.x1}, {"y0", c.domain.y0}, {"y1", c.domain.y1}});
  root.insert("flow", toml::table{{"order", c.flow.order},
                                  {"pressure_order", c.flow.order - 1},
                                  {"re", c.flow.re},
                                  {"fr", c.flow.fr},
                                  {"alpha", c.flow.alpha},
                                  {"depth", c.flow.depth},
                                  {"chord", c.flow.chord},
                                  {"bump_height", c.flow.bump_height},
                                  {"bump_length", c.flow.bump_length}});
  toml::table bc;
  for (auto& [tag, spec] : c.bc) {
    toml::table t{{"kind", std::string(to_string(spec.kind))}};
    if (spec.kind == BCSpecKind::dirichlet) t.insert("value", toml::array{spec.value.x(), spec.value.y()});
    bc.insert(std::string(to_string(tag)), std::move(t));
  }
  root.insert("bc", std::move(bc));
  root.insert("solver", toml::table{{"linear", c.solver.linear},
                                    {"gmres_restart", c.solver.gmres_restart},
                                    {"ilu_fill", c.solver.ilu_fill},
                                    {"linear_tolerance", c.solver.linear_tolerance},
                                    {"rtol", c.solver.rtol},
                                    {"atol", c.solver.atol},
                                    {"max_iterations", c.solver.max_iterations},
                                    {"step_halving", c.solver.step_halving},
                                    {"continuation_start", c.solver.continuation_start}});
  root.insert("free_surface", toml::table{{"tolerance", c.free_surface.tolerance},
                                          {"max_steps", c.free_surface.max_steps},
                                          {"cfl", c.free_surface.cfl},
                                          {"damping_c", c.free_surface.damping_c},
                                          {"level", c.free_surface.level},
                                          {"y0", c.free_surface.y0}});
  root.insert("output", toml::table{{"dir", c.output.dir}, {"fields", c.output.fields}, {"samples", c.output.samples}});
  root.insert("sweep", toml::table{{"refinements", to_array(c.sweep.refinements)},
                                   {"orders", to_array(c.sweep.orders)},
                                   {"tolerances", to_array(c.sweep.tolerances)},
                                   {"metric", c.sweep.metric},
                                   {"reference", c.sweep.reference},
                                   {"repeat", c.sweep.repeat}});
  std::ostringstream os;
  os << root << '\n';
  return os.str();
}

void validate_config(const CaseConfig& c) {
  const auto& m = c.mesh;
  const auto& d = c.domain;
  if (c.flow.order < 2 || c.flow.order > 12) fail("flow.order", "must lie in [2, 12]");
  if (!(c.flow.re > 0)) fail("flow.re", "must be positive");
  if (!(c.flow.fr >= 0)) fail("flow.fr", "must be non-negative");
  bool has_fs_bc = false;
  for (auto& [tag, spec] : c.bc) has_fs_bc |= spec.kind == BCSpecKind::free_surface;
  if ((is_free_surface(c.kind) || has_fs_bc) && !(c.flow.fr > 0)) fail("flow.fr", "free-surface cases need Fr > 0");
  if (!(d.x1 > d.x0) || !(d.y1 > d.y0)) fail("domain", "empty extent");
  if (m.refinements < 0 || m.refinements > 8) fail("mesh.refinements", "must lie in [0, 8]");
  if (m.n < 1) fail("mesh.n", "must be positive");
  if (m.ny < 1) fail("mesh.ny", "must be positive");
  if (!(m.dx > 0)) fail("mesh.dx", "must be positive");
  if (!(m.layer_ratio > 0) || !(m.layer_growth > 0)) fail("mesh", "layer ratios must be positive");
  if (m.body_points < 8 || m.body_points % 8) fail("mesh.body_points", "must be a positive multiple of 8");
  if (m.layers < 1) fail("mesh.layers", "must be positive");
  if (m.box.size() != 4) fail("mesh.box", "expected [x0, x1, y0, y1]");
  if (m.blocks.size() != 4) fail("mesh.blocks", "expected [left, right, bottom, top]");
  for (int b : m.blocks)
    if (b < 1) fail("mesh.blocks", "block resolutions must be positive");

  const bool body_case = c.kind == CaseKind::channel_cylinder || c.kind == CaseKind::channel_naca || c.kind == CaseKind::naca_fs;
  if (body_case) {
    const auto& b = m.box;
    if (!(b[1] > b[0] && b[3] > b[2])) fail("mesh.box", "empty extent");
    if (!inside({b[0], b[2]}, d.x0, d.x1, d.y0, d.y1) || !inside({b[1], b[3]}, d.x0, d.x1, d.y0, d.y1))
      fail("mesh.box", "must lie strictly inside the domain");
    if (!(c.flow.chord > 0)) fail("flow.chord", "must be positive");
    const BoundaryCurve body = c.kind == CaseKind::channel_cylinder
                                   ? BoundaryCurve::circle({0, 0}, 0.5 * c.flow.chord)
                                   : BoundaryCurve::naca0012(c.flow.chord, c.flow.alpha, {0, 0});
    for (int i = 0; i < 256; ++i)
      if (!inside(body.eval(i / 256.0), b[0], b[1], b[2], b[3])) fail("mesh.box", "the body must lie inside the box");
  }
  if (c.kind == CaseKind::naca_fs) {
    if (std::abs(d.y1 - c.flow.depth) > 1e-12) fail("domain.y1", "must equal the submergence depth flow.depth");
    if (std::abs(c.free_surface.level - d.y1) > 1e-12) fail("free_surface.level", "must equal domain.y1");
  }
  if (c.kind == CaseKind::bump_fs) {
    if (d.y1 != 0.0 || c.free_surface.level != 0.0) fail("domain.y1", "the bump channel surface lies at y = 0");
    if (!(c.flow.bump_height >= 0) || !(c.flow.bump_length > 0)) fail("flow", "invalid bump size");
    if (c.flow.bump_height >= -d.y0) fail("flow.bump_height", "the bump must stay below the surface");
    const double xo = -c.flow.bump_length / 3;
    if (!(xo > d.x0 && xo + c.flow.bump_length < d.x1)) fail("flow.bump_length", "the bump must lie inside the domain");
  }
  if (c.kind == CaseKind::custom && m.file.empty()) fail("mesh.file", "custom cases need a mesh file");

  const bool exact_case = c.kind == CaseKind::poiseuille || c.kind == CaseKind::kovasznay;
  for (auto& [tag, spec] : c.bc) {
    const std::string key = "bc." + std::string(to_string(tag));
    if ((spec.kind == BCSpecKind::exact || spec.kind == BCSpecKind::exact_traction) && !exact_case)
      fail(key, "exact data exists only for the poiseuille and kovasznay cases");
    if (spec.kind == BCSpecKind::exact_traction && tag != BoundaryTag::outflow)
      fail(key, "exact_traction is only defined on the outflow side");
    if (spec.kind == BCSpecKind::free_surface && tag != BoundaryTag::free_surface)
      fail(key, "free_surface kind belongs on the free_surface tag");
    if (!spec.value.allFinite()) fail(key, "non-finite value");
  }
  if (is_free_surface(c.kind)) {
    const auto it = c.bc.find(BoundaryTag::free_surface);
    if (it == c.bc.end() || it->second.kind != BCSpecKind::free_surface)
      fail("bc.free_surface", "free-surface cases need kind = \"free_surface\"");
  }

  const auto& s = c.solver;
  if (s.linear != "sparse_direct" && s.linear != "gmres") fail("solver.linear", "expected sparse_direct or gmres");
  if (s.gmres_restart < 1) fail("solver.gmres_restart", "must be positive");
  if (s.ilu_fill < 0) fail("solver.ilu_fill", "must be non-negative");
  if (!(s.linear_tolerance > 0 && s.linear_tolerance <= 1e-8)) fail("solver.linear_tolerance", "must lie in (0, 1e-8]");
  if (!(s.rtol > 0) || !(s.atol > 0)) fail("solver", "tolerances must be positive");
  if (s.max_iterations < 1) fail("solver.max_iterations", "must be positive");
  if (!(s.continuation_start >= 0)) fail("solver.continuation_start", "must be non-negative");

  const auto& f = c.free_surface;
  if (!(f.tolerance > 0)) fail("free_surface.tolerance", "must be positive");
  if (f.max_steps < 1) fail("free_surface.max_steps", "must be positive");
  if (!(f.cfl > 0)) fail("free_surface.cfl", "must be positive");
  if (!(f.damping_c >= 0)) fail("free_surface.damping_c", "must be non-negative");
  if (!(f.y0 < f.level)) fail("free_surface.y0", "must lie below the still-water level");

  if (c.output.samples < 2) fail("output.samples", "at least two samples");

  const auto& w = c.sweep;
  if (w.repeat < 1) fail("sweep.repeat", "must be positive");
  for (int r : w.refinements)
    if (r < 0 || r > 8) fail("sweep.refinements", "must lie in [0, 8]");
  for (int p : w.orders)
    if (p < 2 || p > 12) fail("sweep.orders", "must lie in [2, 12]");
  for (double t : w.tolerances)
    if (!(t > 0)) fail("sweep.tolerances", "must be positive");
  if (w.metric != "cl" && w.metric != "cd" && w.metric != "l2") fail("sweep.metric", "expected cl, cd or l2");
  if (w.orders.empty()) return;
  if (w.metric == "l2" && !exact_case) fail("sweep.metric", "l2 needs an exact solution (poiseuille or kovasznay)");
  if ((w.metric == "cl" || w.metric == "cd") && !body_case && c.kind != CaseKind::custom)
    fail("sweep.metric", "force metrics need a body");
}

}  // namespace semflow
