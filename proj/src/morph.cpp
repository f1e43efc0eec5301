#include "morpheval/morph.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "morpheval/error.hpp"

namespace morpheval {

namespace {

inline double edge_fn(const Point& u, const Point& v, double px, double py) {
  return (v.x - u.x) * (py - u.y) - (v.y - u.y) * (px - u.x);
}

// Edge function anchored at the lexicographically smaller endpoint, so the
// two triangles sharing an edge evaluate the exact same expression (negated)
// and agree bit-for-bit on which side a pixel falls. Without this, rounding
// can differ across the shared edge and orphan or double-claim a pixel.
inline double canonical_edge_fn(const Point& u, const Point& v, double px,
                                double py) {
  const bool ordered = u.x < v.x || (u.x == v.x && u.y <= v.y);
  return ordered ? edge_fn(u, v, px, py) : -edge_fn(v, u, px, py);
}

// Antisymmetric inclusion rule for pixels exactly on a shared edge: the edge
// counts for the triangle whose winding traverses it downward, or leftward
// when horizontal. Guarantees each boundary pixel is claimed exactly once.
inline bool edge_inclusive(const Point& u, const Point& v) {
  return v.y > u.y || (v.y == u.y && v.x < u.x);
}

struct OrientedTri {
  Point a, b, c;   // wound so the interior has positive edge functions
  int ia, ib, ic;  // mesh vertex ids in the same order
};

OrientedTri orient(const TriangleMesh& mesh, const std::array<int, 3>& t) {
  OrientedTri o{mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]],
                t[0], t[1], t[2]};
  if (edge_fn(o.a, o.b, o.c.x, o.c.y) < 0.0) {
    std::swap(o.b, o.c);
    std::swap(o.ib, o.ic);
  }
  return o;
}

bool covers(const OrientedTri& t, double px, double py) {
  const double e0 = canonical_edge_fn(t.b, t.c, px, py);
  const double e1 = canonical_edge_fn(t.c, t.a, px, py);
  const double e2 = canonical_edge_fn(t.a, t.b, px, py);
  const bool in0 = e0 > 0.0 || (e0 == 0.0 && edge_inclusive(t.b, t.c));
  const bool in1 = e1 > 0.0 || (e1 == 0.0 && edge_inclusive(t.c, t.a));
  const bool in2 = e2 > 0.0 || (e2 == 0.0 && edge_inclusive(t.a, t.b));
  return in0 && in1 && in2;
}

std::vector<std::int32_t> build_owner_map(const TriangleMesh& mesh, int width,
                                          int height,
                                          const std::vector<bool>* skip) {
  std::vector<std::int32_t> owners(
      static_cast<std::size_t>(width) * height, -1);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    if (skip && (*skip)[t]) continue;
    const OrientedTri tri = orient(mesh, mesh.triangles[t]);
    if (edge_fn(tri.a, tri.b, tri.c.x, tri.c.y) == 0.0) continue;

    const double min_x = std::min({tri.a.x, tri.b.x, tri.c.x});
    const double max_x = std::max({tri.a.x, tri.b.x, tri.c.x});
    const double min_y = std::min({tri.a.y, tri.b.y, tri.c.y});
    const double max_y = std::max({tri.a.y, tri.b.y, tri.c.y});
    const int x0 = std::max(0, static_cast<int>(std::ceil(min_x)));
    const int x1 = std::min(width - 1, static_cast<int>(std::floor(max_x)));
    const int y0 = std::max(0, static_cast<int>(std::ceil(min_y)));
    const int y1 = std::min(height - 1, static_cast<int>(std::floor(max_y)));

    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        std::int32_t& owner = owners[static_cast<std::size_t>(y) * width + x];
        if (owner != -1) continue;
        if (covers(tri, x, y)) owner = static_cast<std::int32_t>(t);
      }
    }
  }
  return owners;
}

}  // namespace

std::vector<std::int32_t> rasterize_owner_map(const TriangleMesh& mesh,
                                              int width, int height) {
  if (width <= 0 || height <= 0) fail("owner map needs positive dimensions");
  return build_owner_map(mesh, width, height, nullptr);
}

std::vector<Point> boundary_points(int width, int height) {
  if (width <= 0 || height <= 0) fail("canvas dimensions must be positive");
  const double left = -0.5, top = -0.5;
  const double right = width - 0.5, bottom = height - 0.5;
  const double mid_x = (width - 1) / 2.0, mid_y = (height - 1) / 2.0;
  return {Point{left, top},     Point{right, top},   Point{left, bottom},
          Point{right, bottom}, Point{mid_x, top},   Point{mid_x, bottom},
          Point{left, mid_y},   Point{right, mid_y}};
}

LandmarkSet blend_landmarks(const LandmarkSet& a, const LandmarkSet& b,
                            double alpha) {
  a.validate();
  b.validate();
  if (a.image_width != b.image_width || a.image_height != b.image_height)
    fail("mismatched canvas dimensions: ", a.image_width, "x", a.image_height,
         " vs ", b.image_width, "x", b.image_height);
  if (!(alpha >= 0.0 && alpha <= 1.0))
    fail("alpha must be in [0,1], got ", alpha);

  LandmarkSet out;
  out.image_width = a.image_width;
  out.image_height = a.image_height;
  out.points.reserve(a.points.size());
  // (1-alpha)*a + alpha*b term by term; commutative operations keep the
  // result bit-identical when the pair is swapped with mirrored alpha.
  const double wa = 1.0 - alpha;
  for (std::size_t i = 0; i < a.points.size(); ++i)
    out.points.push_back(Point{wa * a.points[i].x + alpha * b.points[i].x,
                               wa * a.points[i].y + alpha * b.points[i].y});
  return out;
}

WarpResult warp_blend(const ImageBuffer& image_a, const LandmarkSet& lm_a,
                      const ImageBuffer& image_b, const LandmarkSet& lm_b,
                      const MorphParams& params) {
  if (!(params.alpha >= 0.0 && params.alpha <= 1.0))
    fail("alpha must be in [0,1], got ", params.alpha);
  lm_a.validate();
  lm_b.validate();
  if (lm_a.image_width != image_a.width() ||
      lm_a.image_height != image_a.height())
    fail("landmark set A does not match image A dimensions");
  if (lm_b.image_width != image_b.width() ||
      lm_b.image_height != image_b.height())
    fail("landmark set B does not match image B dimensions");
  if (!image_a.same_dimensions(image_b))
    fail("images must share the target canvas: ", image_a.width(), "x",
         image_a.height(), " vs ", image_b.width(), "x", image_b.height());

  const int width = image_a.width();
  const int height = image_a.height();
  const double alpha = params.alpha;

  const LandmarkSet blended = blend_landmarks(lm_a, lm_b, alpha);
  std::vector<Point> target = blended.points;
  std::vector<Point> src_a = lm_a.points;
  std::vector<Point> src_b = lm_b.points;
  if (params.boundary_augmentation) {
    // Boundary points are fixed canvas anchors: identical in every mesh.
    for (const Point& p : boundary_points(width, height)) {
      target.push_back(p);
      src_a.push_back(p);
      src_b.push_back(p);
    }
  }

  WarpResult result;
  result.mesh = delaunay(target);
  const TriangleMesh& mesh = result.mesh;

  // A triangle collapsed in either source mesh cannot be sampled sensibly;
  // skip it and let the fill pass close the gap.
  std::vector<bool> skip(mesh.triangles.size(), false);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const std::array<int, 3>& tri = mesh.triangles[t];
    const Point a0 = src_a[mesh.source_index[tri[0]]];
    const Point a1 = src_a[mesh.source_index[tri[1]]];
    const Point a2 = src_a[mesh.source_index[tri[2]]];
    const Point b0 = src_b[mesh.source_index[tri[0]]];
    const Point b1 = src_b[mesh.source_index[tri[1]]];
    const Point b2 = src_b[mesh.source_index[tri[2]]];
    const double area_a = edge_fn(a0, a1, a2.x, a2.y);
    const double area_b = edge_fn(b0, b1, b2.x, b2.y);
    if (std::abs(area_a) <= 1e-9 || std::abs(area_b) <= 1e-9) {
      skip[t] = true;
      ++result.quality.degenerate_triangles;
    }
  }

  const std::vector<std::int32_t> owners =
      build_owner_map(mesh, width, height, &skip);

  std::vector<OrientedTri> oriented;
  oriented.reserve(mesh.triangles.size());
  for (const std::array<int, 3>& t : mesh.triangles)
    oriented.push_back(orient(mesh, t));

  std::vector<double> out(static_cast<std::size_t>(width) * height * 3, 0.0);
  std::vector<std::uint8_t> written(static_cast<std::size_t>(width) * height,
                                    0);

  auto process_rows = [&](int row_begin, int row_end) {
    for (int y = row_begin; y < row_end; ++y) {
      for (int x = 0; x < width; ++x) {
        const std::size_t px = static_cast<std::size_t>(y) * width + x;
        const std::int32_t t = owners[px];
        if (t < 0) continue;
        const OrientedTri& tri = oriented[t];
        const double e0 = edge_fn(tri.b, tri.c, x, y);
        const double e1 = edge_fn(tri.c, tri.a, x, y);
        const double e2 = edge_fn(tri.a, tri.b, x, y);
        const double sum = e0 + e1 + e2;
        const double w0 = e0 / sum;
        const double w1 = e1 / sum;
        const double w2 = e2 / sum;

        const Point& a0 = src_a[mesh.source_index[tri.ia]];
        const Point& a1 = src_a[mesh.source_index[tri.ib]];
        const Point& a2 = src_a[mesh.source_index[tri.ic]];
        const Point& b0 = src_b[mesh.source_index[tri.ia]];
        const Point& b1 = src_b[mesh.source_index[tri.ib]];
        const Point& b2 = src_b[mesh.source_index[tri.ic]];
        const double ax = w0 * a0.x + w1 * a1.x + w2 * a2.x;
        const double ay = w0 * a0.y + w1 * a1.y + w2 * a2.y;
        const double bx = w0 * b0.x + w1 * b1.x + w2 * b2.x;
        const double by = w0 * b0.y + w1 * b1.y + w2 * b2.y;

        for (int c = 0; c < 3; ++c) {
          const double sa = bilinear_sample(image_a, ax, ay, c);
          const double sb = bilinear_sample(image_b, bx, by, c);
          out[px * 3 + c] = (1.0 - alpha) * sa + alpha * sb;
        }
        written[px] = 1;
      }
    }
  };

  int jobs = params.jobs;
  if (jobs <= 0)
    jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, height);
  if (jobs <= 1) {
    process_rows(0, height);
  } else {
    std::vector<std::thread> workers;
    const int rows_per = (height + jobs - 1) / jobs;
    for (int j = 0; j < jobs; ++j) {
      const int begin = j * rows_per;
      const int end = std::min(height, begin + rows_per);
      if (begin >= end) break;
      workers.emplace_back(process_rows, begin, end);
    }
    for (std::thread& w : workers) w.join();
  }

  // Neighbor fill for pixels no triangle produced (outside the hull without
  // boundary augmentation, or under skipped degenerate triangles). Each sweep
  // reads only the previous sweep's state, so the result is order-free.
  while (true) {
    std::vector<std::pair<std::size_t, std::size_t>> fills;
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const std::size_t px = static_cast<std::size_t>(y) * width + x;
        if (written[px]) continue;
        const int nx[4] = {x - 1, x, x + 1, x};
        const int ny[4] = {y, y - 1, y, y + 1};
        for (int d = 0; d < 4; ++d) {
          if (nx[d] < 0 || nx[d] >= width || ny[d] < 0 || ny[d] >= height)
            continue;
          const std::size_t npx =
              static_cast<std::size_t>(ny[d]) * width + nx[d];
          if (written[npx]) {
            fills.emplace_back(px, npx);
            break;
          }
        }
      }
    }
    if (fills.empty()) break;
    for (const auto& [dst, src] : fills) {
      for (int c = 0; c < 3; ++c) out[dst * 3 + c] = out[src * 3 + c];
      written[dst] = 1;
      ++result.quality.filled_pixels;
    }
  }

  result.image = ImageBuffer(width, height);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double v = std::clamp(out[i], 0.0, 255.0);
    result.image.pixels()[i] = static_cast<std::uint8_t>(std::lround(v));
  }
  return result;
}

}  // namespace morpheval
