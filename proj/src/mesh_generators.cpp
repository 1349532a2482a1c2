#include "semflow/mesh_generators.hpp"

#include <cmath>
#include <functional>
#include <map>

namespace semflow {

namespace {

// Collects points (merging coincident ones) and quads, then tags the boundary
// edges with a classifier on the edge midpoint.
class MeshBuilder {
 public:
  explicit MeshBuilder(double scale) : tol_(1e-9 * scale) {}

  int point(const Point& p) {
    const long long ix = std::llround(p.x() / tol_), iy = std::llround(p.y() / tol_);
    for (long long dx = -1; dx <= 1; ++dx) {
      for (long long dy = -1; dy <= 1; ++dy) {
        auto it = index_.find({ix + dx, iy + dy});
        if (it != index_.end() && (points_[it->second] - p).norm() < 2 * tol_) return it->second;
      }
    }
    const int id = static_cast<int>(points_.size());
    points_.push_back(p);
    index_[{ix, iy}] = id;
    return id;
  }

  // Split along a-c unless that diagonal leaves the quad (non-convex corner).
  void quad(int a, int b, int c, int d, int winding) {
    auto area = [&](int i, int j, int k) {
      const Point u = points_[j] - points_[i], w = points_[k] - points_[i];
      return winding * (u.x() * w.y() - u.y() * w.x());
    };
    if (area(a, b, c) > 0 && area(a, c, d) > 0) {
      cells_.push_back({a, b, c});
      cells_.push_back({a, c, d});
    } else {
      cells_.push_back({a, b, d});
      cells_.push_back({b, c, d});
    }
    winding_.push_back(winding);
    winding_.push_back(winding);
  }

  // Winding is +1 when i increases to the right of increasing j.
  void grid(const std::vector<std::vector<Point>>& g, int winding = 1) {
    std::vector<std::vector<int>> id(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      for (const auto& p : g[i]) id[i].push_back(point(p));
    }
    for (std::size_t i = 0; i + 1 < g.size(); ++i) {
      for (std::size_t j = 0; j + 1 < g[i].size(); ++j) quad(id[i][j], id[i + 1][j], id[i + 1][j + 1], id[i][j + 1], winding);
    }
  }

  Mesh2D build(const std::function<BoundaryTag(const Point&)>& classify) {
    // Quads are emitted with a consistent winding per block; a cell whose
    // winding disagrees with its block has folded over.
    for (std::size_t c = 0; c < cells_.size(); ++c) {
      const auto& t = cells_[c];
      const Point u = points_[t[1]] - points_[t[0]], w = points_[t[2]] - points_[t[0]];
      const double a = u.x() * w.y() - u.y() * w.x();
      if (a * winding_[c] <= 0) {
        const Point m = (points_[t[0]] + points_[t[1]] + points_[t[2]]) / 3.0;
        throw MeshError("mesh generator produced a folded cell near (" + std::to_string(m.x()) + ", " +
                        std::to_string(m.y()) + ")");
      }
    }
    std::map<std::pair<int, int>, int> count;
    for (const auto& c : cells_) {
      for (int k = 0; k < 3; ++k) ++count[std::minmax(c[k], c[(k + 1) % 3])];
    }
    std::vector<BoundaryEdge> edges;
    for (const auto& [e, n] : count) {
      if (n == 1) edges.push_back({{e.first, e.second}, classify(0.5 * (points_[e.first] + points_[e.second]))});
    }
    return Mesh2D(points_, cells_, std::move(edges));
  }

 private:
  double tol_;
  std::vector<Point> points_;
  std::vector<std::array<int, 3>> cells_;
  std::vector<int> winding_;
  std::map<std::pair<long long, long long>, int> index_;
};

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n + 1);
  for (int i = 0; i <= n; ++i) v[i] = a + (b - a) * i / n;
  v[n] = b;
  return v;
}

// n cells from a to b, geometric sizes starting at h_first next to `a`.
std::vector<double> graded(double a, double b, int n, double h_first) {
  const double len = std::abs(b - a);
  if (n == 1 || std::abs(len - n * h_first) < 1e-12 * len) return linspace(a, b, n);
  auto total = [&](double r) { return std::abs(r - 1.0) < 1e-12 ? n * h_first : h_first * (std::pow(r, n) - 1) / (r - 1); };
  double lo = 1e-3, hi = 10.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (total(mid) < len ? lo : hi) = mid;
  }
  const double r = 0.5 * (lo + hi);
  std::vector<double> v(n + 1);
  v[0] = a;
  double h = h_first * (len / total(r));
  const double sign = b > a ? 1.0 : -1.0;
  for (int i = 1; i <= n; ++i) {
    v[i] = v[i - 1] + sign * h;
    h *= r;
  }
  v[n] = b;
  return v;
}

std::vector<double> reversed(std::vector<double> v) { return {v.rbegin(), v.rend()}; }

std::function<BoundaryTag(const Point&)> rectangle_classifier(double x0, double x1, double y0, double y1,
                                                               RectangleTags tags, BoundaryTag inner) {
  const double tol = 1e-9 * std::max(x1 - x0, y1 - y0);
  return [=](const Point& m) {
    if (std::abs(m.x() - x0) < tol) return tags.left;
    if (std::abs(m.x() - x1) < tol) return tags.right;
    if (std::abs(m.y() - y0) < tol) return tags.bottom;
    if (std::abs(m.y() - y1) < tol) return tags.top;
    return inner;
  };
}

// Points on the perimeter of a box, counter-clockwise from the middle of the
// right side, n_side segments per side.
std::vector<Point> box_perimeter(double bx0, double bx1, double by0, double by1, int n_side) {
  std::vector<Point> out;
  const int half = n_side / 2;
  const double ym = 0.5 * (by0 + by1);
  for (int i = 0; i < half; ++i) out.emplace_back(bx1, ym + (by1 - ym) * i / half);
  for (int i = 0; i < n_side; ++i) out.emplace_back(bx1 + (bx0 - bx1) * i / n_side, by1);
  for (int i = 0; i < n_side; ++i) out.emplace_back(bx0, by1 + (by0 - by1) * i / n_side);
  for (int i = 0; i < n_side; ++i) out.emplace_back(bx0 + (bx1 - bx0) * i / n_side, by0);
  for (int i = 0; i < half; ++i) out.emplace_back(bx1, by0 + (ym - by0) * i / half);
  return out;
}

// Ring of quads between two closed loops with equal point counts.
void ring(MeshBuilder& b, const std::vector<Point>& inner, const std::vector<Point>& outer, int layers,
          double growth) {
  const std::size_t n = inner.size();
  std::vector<double> w(layers + 1);
  for (int l = 0; l <= layers; ++l) {
    w[l] = std::abs(growth - 1.0) < 1e-12 ? static_cast<double>(l) / layers
                                          : (std::pow(growth, l) - 1.0) / (std::pow(growth, layers) - 1.0);
  }
  std::vector<std::vector<Point>> g(n + 1, std::vector<Point>(layers + 1));
  for (std::size_t i = 0; i <= n; ++i) {
    for (int l = 0; l <= layers; ++l) g[i][l] = (1.0 - w[l]) * inner[i % n] + w[l] * outer[i % n];
  }
  b.grid(g, -1);
}

}  // namespace

Mesh2D gen_rectangle(double x0, double x1, double y0, double y1, int nx, int ny, RectangleTags tags) {
  if (nx < 1 || ny < 1) throw InputError("gen_rectangle: nx and ny must be >= 1");
  if (!(x1 > x0 && y1 > y0)) throw InputError("gen_rectangle: empty extent");
  MeshBuilder b(std::max(x1 - x0, y1 - y0));
  const auto xs = linspace(x0, x1, nx), ys = linspace(y0, y1, ny);
  std::vector<std::vector<Point>> g(nx + 1, std::vector<Point>(ny + 1));
  for (int i = 0; i <= nx; ++i) {
    for (int j = 0; j <= ny; ++j) g[i][j] = Point(xs[i], ys[j]);
  }
  b.grid(g);
  return b.build(rectangle_classifier(x0, x1, y0, y1, tags, BoundaryTag::wall));
}

BoundaryCurve bump_bed_curve(const BumpChannelSpec& s) {
  return BoundaryCurve::bump(s.height, s.length, s.x_offset, s.base_depth, s.x0, s.x1);
}

Mesh2D gen_bump_channel(const BumpChannelSpec& s) {
  if (s.ny < 1 || !(s.dx > 0)) throw InputError("gen_bump_channel: need ny >= 1 and dx > 0");
  const double f0 = s.x_offset, f1 = s.x_offset + s.length;
  if (!(s.x0 < f0 && f1 < s.x1)) throw InputError("gen_bump_channel: bump must lie inside the channel");
  std::vector<double> xs;
  for (auto [a, b] : {std::pair{s.x0, f0}, std::pair{f0, f1}, std::pair{f1, s.x1}}) {
    const auto piece = linspace(a, b, std::max(1, static_cast<int>(std::ceil((b - a) / s.dx - 1e-9))));
    xs.insert(xs.end(), piece.begin() + (xs.empty() ? 0 : 1), piece.end());
  }
  const auto curve = bump_bed_curve(s);
  // Layer fractions from the surface down, geometric with the given end ratio.
  std::vector<double> frac(s.ny + 1);
  const double g = s.ny > 1 ? std::pow(s.layer_ratio, 1.0 / (s.ny - 1)) : 1.0;
  double acc = 0, h = 1;
  for (int j = 0; j < s.ny; ++j) {
    frac[j] = acc;
    acc += h;
    h *= g;
  }
  for (int j = 0; j < s.ny; ++j) frac[j] /= acc;
  frac[s.ny] = 1.0;

  MeshBuilder b(s.x1 - s.x0);
  std::vector<std::vector<Point>> grid(xs.size(), std::vector<Point>(s.ny + 1));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double bed = curve.bump_height(xs[i]);
    for (int j = 0; j <= s.ny; ++j) grid[i][j] = Point(xs[i], bed * frac[s.ny - j]);
    grid[i][0].y() = bed;
    grid[i][s.ny].y() = 0.0;
  }
  b.grid(grid);
  const double tol = 1e-9 * (s.x1 - s.x0);
  return b.build([&](const Point& m) {
    if (std::abs(m.x() - s.x0) < tol) return BoundaryTag::inflow;
    if (std::abs(m.x() - s.x1) < tol) return BoundaryTag::outflow;
    if (std::abs(m.y()) < tol) return s.top;
    return BoundaryTag::bed;
  });
}

Mesh2D gen_body_channel(const BodyChannelSpec& s) {
  if (s.n_body < 8 || s.n_body % 8 != 0) throw InputError("gen_body_channel: n_body must be a multiple of 8");
  if (s.n_layers < 1) throw InputError("gen_body_channel: n_layers must be >= 1");
  if (!(s.x0 < s.bx0 && s.bx0 < s.bx1 && s.bx1 < s.x1 && s.y0 < s.by0 && s.by0 < s.by1 && s.by1 < s.y1)) {
    throw InputError("gen_body_channel: box must lie strictly inside the channel");
  }
  const int n_side = s.n_body / 4;
  MeshBuilder b(std::max(s.x1 - s.x0, s.y1 - s.y0));

  std::vector<Point> inner(s.n_body);
  for (int i = 0; i < s.n_body; ++i) inner[i] = s.body.eval(static_cast<double>(i) / s.n_body);
  ring(b, inner, box_perimeter(s.bx0, s.bx1, s.by0, s.by1, n_side), s.n_layers, s.layer_growth);

  const double hx = (s.bx1 - s.bx0) / n_side, hy = (s.by1 - s.by0) / n_side;
  std::vector<std::vector<double>> xcols = {
      reversed(graded(s.bx0, s.x0, std::max(1, s.nx_left), hx)), linspace(s.bx0, s.bx1, n_side),
      graded(s.bx1, s.x1, std::max(1, s.nx_right), hx)};
  std::vector<std::vector<double>> yrows = {
      reversed(graded(s.by0, s.y0, std::max(1, s.ny_bottom), hy)), linspace(s.by0, s.by1, n_side),
      graded(s.by1, s.y1, std::max(1, s.ny_top), hy)};
  for (int bi = 0; bi < 3; ++bi) {
    for (int bj = 0; bj < 3; ++bj) {
      if (bi == 1 && bj == 1) continue;
      const auto& xs = xcols[bi];
      const auto& ys = yrows[bj];
      std::vector<std::vector<Point>> g(xs.size(), std::vector<Point>(ys.size()));
      for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t j = 0; j < ys.size(); ++j) g[i][j] = Point(xs[i], ys[j]);
      }
      b.grid(g);
    }
  }
  return b.build(rectangle_classifier(s.x0, s.x1, s.y0, s.y1, s.tags, BoundaryTag::body));
}

Mesh2D gen_disc(Point center, double radius, int n, int n_layers) {
  if (n < 2 || n % 2 != 0) throw InputError("gen_disc: n must be even and >= 2");
  if (n_layers < 1) throw InputError("gen_disc: n_layers must be >= 1");
  MeshBuilder b(radius);
  const double a = radius / (2.0 * std::sqrt(2.0));
  const auto core = linspace(-a, a, n);
  std::vector<std::vector<Point>> g(n + 1, std::vector<Point>(n + 1));
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n; ++j) g[i][j] = center + Point(core[i], core[j]);
  }
  b.grid(g);
  auto box = box_perimeter(-a, a, -a, a, n);
  for (auto& p : box) p += center;
  std::vector<Point> circle(box.size());
  const auto curve = BoundaryCurve::circle(center, radius);
  for (std::size_t i = 0; i < box.size(); ++i) circle[i] = curve.eval(static_cast<double>(i) / box.size());
  ring(b, box, circle, n_layers, 1.0);
  return b.build([](const Point&) { return BoundaryTag::wall; });
}

}  // namespace semflow
