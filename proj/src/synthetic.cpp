#include "gazetk/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_set>

namespace gazetk {

namespace {

double urand(std::mt19937& gen, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(gen()) / 4294967296.0);
}

// Box-Muller on the pinned generator.
double nrand(std::mt19937& gen, double sigma) {
  const double u1 = std::max(urand(gen, 0, 1), 1e-12);
  const double u2 = urand(gen, 0, 1);
  return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace

TabletopScene make_tabletop_scene(uint32_t seed, int n_blobs) {
  std::mt19937 gen(seed);
  TabletopScene scene;
  scene.cloud.frame_id = "camera";

  // Spacing guarantees (all jitter bounded): grid pitches exceed any 4 mm
  // voxel along at least one axis so downsampling at leaf <= 4 mm is 1:1,
  // and structures stay separated well beyond a 25 mm cluster tolerance.

  // plane: 20 mm pitch, +-1 mm lateral and +-2 mm depth jitter
  for (double x = -0.9; x <= 0.9; x += 0.02) {
    for (double y = -0.9; y <= 0.9; y += 0.02) {
      scene.cloud.points.emplace_back(x + urand(gen, -0.001, 0.001),
                                      y + urand(gen, -0.001, 0.001),
                                      scene.plane_z + urand(gen, -0.002, 0.002));
    }
  }

  // blobs on a ring, 9 mm grid pitch, +-1 mm jitter, tops at least 12 mm
  // in front of the plane
  for (int b = 0; b < n_blobs; ++b) {
    const double angle = 2.0 * M_PI * b / n_blobs + urand(gen, -0.2, 0.2);
    const double ring = urand(gen, 0.45, 0.6);
    const Vec3 center(ring * std::cos(angle), ring * std::sin(angle),
                      scene.plane_z - urand(gen, 0.06, 0.09));
    scene.blob_centers.push_back(center);
    std::vector<size_t> members;
    const double radius = urand(gen, 0.03, 0.045);
    for (double dx = -radius; dx <= radius; dx += 0.009) {
      for (double dy = -radius; dy <= radius; dy += 0.009) {
        for (double dz = -radius; dz <= radius; dz += 0.009) {
          if (dx * dx + dy * dy + dz * dz > radius * radius) continue;
          members.push_back(scene.cloud.size());
          scene.cloud.points.emplace_back(
              center.x() + dx + urand(gen, -0.001, 0.001),
              center.y() + dy + urand(gen, -0.001, 0.001),
              center.z() + dz + urand(gen, -0.001, 0.001));
        }
      }
    }
    scene.blob_points.push_back(std::move(members));
  }

  // 30% uniform outliers, rejection-sampled to keep 6 mm from every other
  // point, 120 mm from blob centers and 100 mm in front of the plane
  auto key_of = [](const Vec3& p) {
    const auto q = [](double v) {
      return static_cast<int64_t>(std::floor(v / 0.006));
    };
    return (q(p.x()) * 73856093) ^ (q(p.y()) * 19349663) ^
           (q(p.z()) * 83492791);
  };
  std::unordered_multiset<int64_t> grid;
  auto too_close = [&](const Vec3& p) {
    for (double dx : {-0.006, 0.0, 0.006}) {
      for (double dy : {-0.006, 0.0, 0.006}) {
        for (double dz : {-0.006, 0.0, 0.006}) {
          if (grid.count(key_of(p + Vec3(dx, dy, dz))) > 0) return true;
        }
      }
    }
    return false;
  };
  for (const auto& p : scene.cloud.points) grid.insert(key_of(p));

  const size_t target_outliers =
      static_cast<size_t>(0.3 * static_cast<double>(scene.cloud.size()) / 0.7);
  size_t placed = 0;
  while (placed < target_outliers) {
    const Vec3 p(urand(gen, -1.2, 1.2), urand(gen, -1.2, 1.2),
                 urand(gen, 0.15, scene.plane_z - 0.1));
    bool near_blob = false;
    for (const auto& c : scene.blob_centers) {
      if ((p - c).norm() < 0.12) {
        near_blob = true;
        break;
      }
    }
    if (near_blob || too_close(p)) continue;
    grid.insert(key_of(p));
    scene.cloud.points.push_back(p);
    ++placed;
  }
  return scene;
}

RenderedFrame render_object_frame(int width, int height, uint32_t seed,
                                  bool add_decoy) {
  std::mt19937 gen(seed);
  RenderedFrame frame;
  frame.image = Raster(width, height, 3);

  // nearly flat dark background so the object carries the contrast
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double base = 0.1 + urand(gen, -0.005, 0.005);
      frame.image.at(x, y, 0) = base;
      frame.image.at(x, y, 1) = base;
      frame.image.at(x, y, 2) = base;
    }
  }

  auto paint_box = [&](const BBox2D& box, double r, double g, double b) {
    for (int y = std::max(0, static_cast<int>(box.y1));
         y <= std::min(height - 1, static_cast<int>(box.y2)); ++y) {
      for (int x = std::max(0, static_cast<int>(box.x1));
           x <= std::min(width - 1, static_cast<int>(box.x2)); ++x) {
        frame.image.at(x, y, 0) = r + urand(gen, -0.02, 0.02);
        frame.image.at(x, y, 1) = g + urand(gen, -0.02, 0.02);
        frame.image.at(x, y, 2) = b + urand(gen, -0.02, 0.02);
      }
    }
  };

  // object in the left/center region; decoy far right
  const double ow = urand(gen, 0.22, 0.3) * width;
  const double oh = urand(gen, 0.22, 0.3) * height;
  const double ox = urand(gen, 0.12, 0.42) * width;
  const double oy = urand(gen, 0.12, 0.5) * height;
  frame.object_box = BBox2D{ox, oy, std::min(ox + ow, width - 1.0),
                            std::min(oy + oh, height - 1.0)};
  paint_box(frame.object_box, 0.9, 0.75, 0.2);

  if (add_decoy) {
    frame.has_decoy = true;
    const double dx = 0.76 * width;
    const double dy = urand(gen, 0.1, 0.55) * height;
    frame.decoy_box =
        BBox2D{dx, dy, std::min(dx + 0.2 * width, width - 1.0),
               std::min(dy + 0.26 * height, height - 1.0)};
    paint_box(frame.decoy_box, 1.0, 0.1, 0.95);
  }
  return frame;
}

std::vector<Vec2> jittered_gaze(const BBox2D& box, int count, double sigma_px,
                                uint32_t seed) {
  std::mt19937 gen(seed);
  const double cx = 0.5 * (box.x1 + box.x2);
  const double cy = 0.5 * (box.y1 + box.y2);
  std::vector<Vec2> gaze;
  gaze.reserve(count);
  for (int i = 0; i < count; ++i) {
    gaze.emplace_back(cx + nrand(gen, sigma_px), cy + nrand(gen, sigma_px));
  }
  return gaze;
}

}  // namespace gazetk
