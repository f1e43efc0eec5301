#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "morpheval/image.hpp"
#include "morpheval/types.hpp"

namespace morpheval {

struct MorphParams {
  double alpha = 0.5;                // blend factor for geometry and color
  bool boundary_augmentation = true; // add 4 corners + 4 edge midpoints
  int jobs = 1;                      // <=0 uses hardware concurrency
};

// Delaunay triangulation of a point set. Triangle index triples are stored
// ascending and the triangle list is sorted, so identical input always yields
// identical output. source_index maps mesh vertices back to positions in the
// input span (exact duplicate points are dropped, first occurrence wins).
struct TriangleMesh {
  std::vector<Point> vertices;
  std::vector<int> source_index;
  std::vector<std::array<int, 3>> triangles;
  int duplicates_removed = 0;
};

// Empty-circumcircle triangulation by exhaustive triple enumeration; the
// point sets here are small (68 landmarks + 8 boundary points at most) so the
// O(n^3) candidate scan with early rejection is well inside budget.
// Cocircular ties are resolved by scanning candidates in ascending
// (i,j,k) vertex-index order and keeping each triangle unless it overlaps one
// already kept, which triangulates a cocircular convex polygon as the fan
// anchored at its lowest vertex index.
// Throws on fewer than 3 distinct points or an all-collinear set.
TriangleMesh delaunay(std::span<const Point> points);

// The 8 canvas augmentation points: rectangle corners and edge midpoints,
// placed half a pixel outside the pixel-center grid so every pixel center of
// a width x height canvas is strictly inside their convex hull.
std::vector<Point> boundary_points(int width, int height);

// point k = (1-alpha)*a_k + alpha*b_k. Requires matching canvas dimensions.
LandmarkSet blend_landmarks(const LandmarkSet& a, const LandmarkSet& b,
                            double alpha);

struct WarpQuality {
  int degenerate_triangles = 0;  // skipped: zero-area in a source mesh
  int filled_pixels = 0;         // recovered by the neighbor fill pass
};

struct WarpResult {
  ImageBuffer image;
  TriangleMesh mesh;  // triangulation of the blended landmarks
  WarpQuality quality;
};

// Landmark morph: triangulate the blended landmarks, affine-warp the matching
// triangles of both sources onto each target triangle with bilinear sampling,
// and combine as (1-alpha)*warped_a + alpha*warped_b with a single final
// rounding. Output pixels are each owned by exactly one triangle.
WarpResult warp_blend(const ImageBuffer& image_a, const LandmarkSet& lm_a,
                      const ImageBuffer& image_b, const LandmarkSet& lm_b,
                      const MorphParams& params = {});

// owner[y*width + x] = triangle index, or -1 outside the mesh. Shared edges
// and vertices are resolved by an antisymmetric top-left fill rule so the
// triangle interiors partition the covered pixels. Exposed for tests.
std::vector<std::int32_t> rasterize_owner_map(const TriangleMesh& mesh,
                                              int width, int height);

}  // namespace morpheval
