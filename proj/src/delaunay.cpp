#include <algorithm>
#include <cmath>
#include <span>

#include "morpheval/error.hpp"
#include "morpheval/morph.hpp"

namespace morpheval {

namespace {

inline double orient2(const Point& a, const Point& b, const Point& c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

struct Circumcircle {
  double cx = 0, cy = 0, r2 = 0;
};

// Coordinates are translated to vertex a before solving, which keeps the
// arithmetic exact for small integer inputs (the cocircular tie cases).
bool circumcircle(const Point& a, const Point& b, const Point& c,
                  Circumcircle& out) {
  const double bx = b.x - a.x, by = b.y - a.y;
  const double cx = c.x - a.x, cy = c.y - a.y;
  const double d = 2.0 * (bx * cy - by * cx);
  if (d == 0.0) return false;
  const double b2 = bx * bx + by * by;
  const double c2 = cx * cx + cy * cy;
  const double ux = (cy * b2 - by * c2) / d;
  const double uy = (bx * c2 - cx * b2) / d;
  out.cx = a.x + ux;
  out.cy = a.y + uy;
  out.r2 = ux * ux + uy * uy;
  return true;
}

// True when the triangle interiors intersect; separating-axis test over the
// six edge normals. Touching along an edge or at a vertex does not count.
bool interiors_overlap(const Point* va, const Point* vb, double eps) {
  const Point* tris[2] = {va, vb};
  for (int t = 0; t < 2; ++t) {
    for (int e = 0; e < 3; ++e) {
      const Point& p = tris[t][e];
      const Point& q = tris[t][(e + 1) % 3];
      const double nx = -(q.y - p.y);
      const double ny = q.x - p.x;
      double min_a = 0, max_a = 0, min_b = 0, max_b = 0;
      for (int k = 0; k < 3; ++k) {
        const double da = nx * va[k].x + ny * va[k].y;
        const double db = nx * vb[k].x + ny * vb[k].y;
        if (k == 0) {
          min_a = max_a = da;
          min_b = max_b = db;
        } else {
          min_a = std::min(min_a, da);
          max_a = std::max(max_a, da);
          min_b = std::min(min_b, db);
          max_b = std::max(max_b, db);
        }
      }
      const double scale = std::hypot(nx, ny);
      if (max_a <= min_b + eps * scale || max_b <= min_a + eps * scale)
        return false;
    }
  }
  return true;
}

}  // namespace

TriangleMesh delaunay(std::span<const Point> points) {
  TriangleMesh mesh;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Point& p = points[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      fail("point ", i, " is not finite");
    bool dup = false;
    for (const Point& q : mesh.vertices) {
      if (q == p) {
        dup = true;
        break;
      }
    }
    if (dup) {
      ++mesh.duplicates_removed;
      continue;
    }
    mesh.vertices.push_back(p);
    mesh.source_index.push_back(static_cast<int>(i));
  }

  const int n = static_cast<int>(mesh.vertices.size());
  if (n < 3)
    fail("need at least 3 distinct points to triangulate, got ", n, " (",
         mesh.duplicates_removed, " duplicates removed)");

  double min_x = mesh.vertices[0].x, max_x = min_x;
  double min_y = mesh.vertices[0].y, max_y = min_y;
  for (const Point& p : mesh.vertices) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const double scale = std::max({max_x - min_x, max_y - min_y, 1e-30});
  const double area_eps = 1e-12 * scale * scale;

  const std::vector<Point>& v = mesh.vertices;
  std::vector<std::array<int, 3>> accepted;
  bool any_nondegenerate = false;

  // Every triple whose circumcircle strictly contains no other vertex is a
  // candidate. Points within a small relative band of the circle count as
  // cocircular ties, not as contained: symmetric landmark layouts (any
  // rectangle is cyclic) otherwise flip the strict predicate arbitrarily per
  // triple and can leave a quad with no consistent pair of halves. Tied
  // alternatives are settled by the greedy pass below.
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      for (int k = j + 1; k < n; ++k) {
        if (std::abs(orient2(v[i], v[j], v[k])) <= area_eps) continue;
        any_nondegenerate = true;
        Circumcircle cc;
        if (!circumcircle(v[i], v[j], v[k], cc)) continue;
        bool empty = true;
        for (int p = 0; p < n; ++p) {
          if (p == i || p == j || p == k) continue;
          const double dx = v[p].x - cc.cx;
          const double dy = v[p].y - cc.cy;
          const double dd = dx * dx + dy * dy;
          if (cc.r2 - dd > 1e-10 * (cc.r2 + dd)) {
            empty = false;
            break;
          }
        }
        if (empty) accepted.push_back({i, j, k});
      }
    }
  }

  if (!any_nondegenerate) fail("all points are collinear");

  // In general position the accepted set is already the triangulation.
  // Cocircular groups contribute overlapping alternatives; keeping candidates
  // greedily in ascending index order picks a canonical subset (the fan
  // anchored at the group's lowest vertex index).
  const double sat_eps = 1e-12 * scale;
  for (const std::array<int, 3>& t : accepted) {
    const Point ta[3] = {v[t[0]], v[t[1]], v[t[2]]};
    bool blocked = false;
    for (const std::array<int, 3>& kept : mesh.triangles) {
      const Point tb[3] = {v[kept[0]], v[kept[1]], v[kept[2]]};
      if (interiors_overlap(ta, tb, sat_eps)) {
        blocked = true;
        break;
      }
    }
    if (!blocked) mesh.triangles.push_back(t);
  }

  if (mesh.triangles.empty()) fail("triangulation failed");
  return mesh;
}

}  // namespace morpheval
