#pragma once

#include <cstdint>
#include <vector>

#include "gazetk/geometry.hpp"

namespace gazetk {

// Deterministic generators for self-contained pipeline runs and tests.
// All randomness comes from a pinned PRNG seeded by the caller.

// Tabletop cloud: a noisy plane at z = plane_z (normal +z), blobs hovering
// in front of it, and uniform outliers. Point spacing stays above 4 mm so a
// fine voxel grid keeps points 1:1.
struct TabletopScene {
  PointCloud cloud;
  std::vector<std::vector<size_t>> blob_points;  // per blob, indices into cloud
  std::vector<Vec3> blob_centers;
  Vec3 plane_normal = Vec3(0, 0, 1);
  double plane_z = 1.5;
};

TabletopScene make_tabletop_scene(uint32_t seed, int n_blobs);

// Camera-facing frame with a bright rectangular object over a dark noisy
// background, optionally plus an off-object decoy of similar contrast.
struct RenderedFrame {
  Raster image;  // RGB in [0,1]
  BBox2D object_box;
  BBox2D decoy_box;  // valid only when has_decoy
  bool has_decoy = false;
};

RenderedFrame render_object_frame(int width, int height, uint32_t seed,
                                  bool add_decoy);

// Gaze points jittered around the object center (sigma_px per axis).
std::vector<Vec2> jittered_gaze(const BBox2D& box, int count, double sigma_px,
                                uint32_t seed);

}  // namespace gazetk
