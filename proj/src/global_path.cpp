#include "ampcc/global_path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace ampcc {

namespace {

struct NeighborTable {
  Vec3i offset[26];
  double cell_cost[26];  // in cell units; multiply by resolution
  NeighborTable() {
    int n = 0;
    for (int dz = -1; dz <= 1; ++dz)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0 && dz == 0) continue;
          offset[n] = Vec3i(dx, dy, dz);
          cell_cost[n] = std::sqrt(double(dx * dx + dy * dy + dz * dz));
          ++n;
        }
  }
};
const NeighborTable kNeighbors;

struct SearchSpace {
  const EsdfField& field;
  Vec3i dims;
  double res;

  std::size_t index(const Vec3i& c) const {
    return static_cast<std::size_t>(c.x()) +
           static_cast<std::size_t>(dims.x()) *
               (static_cast<std::size_t>(c.y()) +
                static_cast<std::size_t>(dims.y()) *
                    static_cast<std::size_t>(c.z()));
  }
  bool in_bounds(const Vec3i& c) const {
    return c.x() >= 0 && c.y() >= 0 && c.z() >= 0 && c.x() < dims.x() &&
           c.y() < dims.y() && c.z() < dims.z();
  }
  bool traversable(const Vec3i& c, double clearance) const {
    return field.at(c) >= clearance;
  }
};

Vec3i locate_cell(const EsdfField& field, const Vec3& p, const char* what) {
  const Vec3 rel = (p - field.origin()) / field.resolution();
  Vec3i c;
  for (int a = 0; a < 3; ++a) {
    c[a] = static_cast<int>(std::floor(rel[a]));
    if (c[a] < 0 || c[a] >= field.dims()[a]) {
      throw InvalidEndpointError(std::string(what) +
                                 " lies outside the grid");
    }
  }
  return c;
}

struct HeapEntry {
  double f;
  double h;
  std::size_t cell;
  bool operator>(const HeapEntry& o) const {
    if (f != o.f) return f > o.f;
    if (h != o.h) return h > o.h;
    return cell > o.cell;
  }
};

}  // namespace

double GuidePath::length() const {
  double L = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    L += (points[i] - points[i - 1]).norm();
  }
  return L;
}

std::vector<Vec3i> astar(const EsdfField& field, const Vec3& start,
                         const Vec3& goal, double clearance) {
  SearchSpace sp{field, field.dims(), field.resolution()};
  const Vec3i cs = locate_cell(field, start, "start");
  const Vec3i cg = locate_cell(field, goal, "goal");
  if (!sp.traversable(cs, clearance)) {
    throw InvalidEndpointError("start is inside the inflated obstacle set");
  }
  if (!sp.traversable(cg, clearance)) {
    throw InvalidEndpointError("goal is inside the inflated obstacle set");
  }

  const std::size_t total =
      static_cast<std::size_t>(sp.dims.x()) * sp.dims.y() * sp.dims.z();
  std::vector<double> g(total, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> parent(total, total);
  std::vector<char> closed(total, 0);

  auto heuristic = [&](const Vec3i& c) {
    return sp.res * (c - cg).cast<double>().norm();
  };
  auto unpack = [&](std::size_t idx) {
    const int nx = sp.dims.x(), ny = sp.dims.y();
    return Vec3i(static_cast<int>(idx % nx),
                 static_cast<int>((idx / nx) % ny),
                 static_cast<int>(idx / (static_cast<std::size_t>(nx) * ny)));
  };

  std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<>> open;
  const std::size_t is = sp.index(cs), ig = sp.index(cg);
  g[is] = 0.0;
  open.push({heuristic(cs), heuristic(cs), is});

  while (!open.empty()) {
    const HeapEntry top = open.top();
    open.pop();
    if (closed[top.cell]) continue;
    closed[top.cell] = 1;
    if (top.cell == ig) break;

    const Vec3i c = unpack(top.cell);
    for (int k = 0; k < 26; ++k) {
      const Vec3i nb = c + kNeighbors.offset[k];
      if (!sp.in_bounds(nb)) continue;
      const std::size_t ni = sp.index(nb);
      if (closed[ni] || !sp.traversable(nb, clearance)) continue;
      const double ng = g[top.cell] + sp.res * kNeighbors.cell_cost[k];
      if (ng < g[ni]) {
        g[ni] = ng;
        parent[ni] = top.cell;
        const double h = heuristic(nb);
        open.push({ng + h, h, ni});
      }
    }
  }

  if (!closed[ig]) {
    throw UnreachableError("no collision-free path between start and goal");
  }

  std::vector<Vec3i> path;
  for (std::size_t cur = ig;; cur = parent[cur]) {
    path.push_back(unpack(cur));
    if (cur == is) break;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

double dijkstra_cost(const EsdfField& field, const Vec3& start,
                     const Vec3& goal, double clearance) {
  SearchSpace sp{field, field.dims(), field.resolution()};
  const Vec3i cs = locate_cell(field, start, "start");
  const Vec3i cg = locate_cell(field, goal, "goal");
  if (!sp.traversable(cs, clearance) || !sp.traversable(cg, clearance)) {
    throw InvalidEndpointError("endpoint inside inflated obstacle set");
  }

  const std::size_t total =
      static_cast<std::size_t>(sp.dims.x()) * sp.dims.y() * sp.dims.z();
  std::vector<double> g(total, std::numeric_limits<double>::infinity());
  std::vector<char> closed(total, 0);
  auto unpack = [&](std::size_t idx) {
    const int nx = sp.dims.x(), ny = sp.dims.y();
    return Vec3i(static_cast<int>(idx % nx),
                 static_cast<int>((idx / nx) % ny),
                 static_cast<int>(idx / (static_cast<std::size_t>(nx) * ny)));
  };

  using QE = std::pair<double, std::size_t>;
  std::priority_queue<QE, std::vector<QE>, std::greater<>> open;
  const std::size_t is = sp.index(cs), ig = sp.index(cg);
  g[is] = 0.0;
  open.push({0.0, is});
  while (!open.empty()) {
    const auto [dist, cell] = open.top();
    open.pop();
    if (closed[cell]) continue;
    closed[cell] = 1;
    if (cell == ig) return dist;
    const Vec3i c = unpack(cell);
    for (int k = 0; k < 26; ++k) {
      const Vec3i nb = c + kNeighbors.offset[k];
      if (!sp.in_bounds(nb)) continue;
      const std::size_t ni = sp.index(nb);
      if (closed[ni] || !sp.traversable(nb, clearance)) continue;
      const double ng = dist + sp.res * kNeighbors.cell_cost[k];
      if (ng < g[ni]) {
        g[ni] = ng;
        open.push({ng, ni});
      }
    }
  }
  throw UnreachableError("no collision-free path between start and goal");
}

GuidePath resample(const std::vector<Vec3>& polyline, double spacing) {
  if (polyline.size() < 2) {
    throw ContractError("resample: polyline needs at least 2 points");
  }
  if (!(spacing > 0.0)) throw ContractError("resample: spacing must be > 0");

  double length = 0.0;
  for (std::size_t i = 1; i < polyline.size(); ++i) {
    length += (polyline[i] - polyline[i - 1]).norm();
  }

  GuidePath out;
  out.spacing = spacing;
  if (length <= 0.0) {
    out.points = {polyline.front()};
    return out;
  }

  const int m = static_cast<int>(std::ceil(length / spacing - 1e-12));
  out.points.reserve(m + 1);
  std::size_t seg = 1;
  double seg_start = 0.0;
  double seg_len = (polyline[1] - polyline[0]).norm();
  for (int i = 0; i < m; ++i) {
    const double target = i * spacing;
    while (seg_start + seg_len < target && seg + 1 < polyline.size()) {
      seg_start += seg_len;
      ++seg;
      seg_len = (polyline[seg] - polyline[seg - 1]).norm();
    }
    const double t =
        seg_len > 0.0 ? std::clamp((target - seg_start) / seg_len, 0.0, 1.0)
                      : 0.0;
    out.points.push_back(polyline[seg - 1] +
                         t * (polyline[seg] - polyline[seg - 1]));
  }
  out.points.push_back(polyline.back());
  return out;
}

std::vector<Vec3> cells_to_world(const EsdfField& field,
                                 const std::vector<Vec3i>& cells) {
  std::vector<Vec3> pts;
  pts.reserve(cells.size());
  for (const Vec3i& c : cells) {
    pts.push_back(field.origin() +
                  field.resolution() * (c.cast<double>() + Vec3(0.5, 0.5, 0.5)));
  }
  return pts;
}

}  // namespace ampcc
