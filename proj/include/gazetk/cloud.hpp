#pragma once

#include <cstdint>
#include <vector>

#include "gazetk/geometry.hpp"

namespace gazetk {

enum class SegMode {
  Nearest,  // the cluster containing the gaze point's nearest neighbor
  Radius,   // every cluster with a point within gaze_radius of the gaze
};

struct SegParams {
  double pass_min = 0.0;
  double pass_max = 3.0;
  double voxel_leaf = 0.03;
  Vec3 expected_normal = Vec3(0, 0, 1);
  double normal_deviation_deg = 30.0;
  double inlier_distance = 0.01;
  int ransac_iterations = 1000;
  uint32_t seed = 42;
  double cluster_tolerance = 0.005;
  size_t min_cluster_size = 500;
  double gaze_radius = 0.02;
  size_t radius_min_cluster_size = 5;
  SegMode mode = SegMode::Nearest;
};

// Plane as unit normal plus offset: n . p + offset = 0.
struct PlaneModel {
  Vec3 normal = Vec3(0, 0, 1);
  double offset = 0.0;

  double distance(const Vec3& p) const {
    return std::abs(normal.dot(p) + offset);
  }
};

struct PlaneFit {
  PlaneModel plane;
  std::vector<size_t> inliers;
};

struct Segmentation {
  PointCloud working;  // cloud after pass-through and voxel downsampling
  std::vector<size_t> object_indices;  // into working, ascending
  std::vector<size_t> plane_indices;   // into working, ascending
  PlaneModel plane;
  BBox3D box;
};

// Keeps points with z in [z_min, z_max].
PointCloud pass_through(const PointCloud& cloud, double z_min, double z_max);

// Centroid per occupied voxel; the voxel of a point is floor(coord/leaf)
// per axis. Output order follows first appearance.
PointCloud voxel_downsample(const PointCloud& cloud, double leaf);

// Seeded RANSAC restricted to planes whose normal stays within
// normal_deviation_deg of expected_normal. The winning candidate is refined
// by a least-squares fit over its inliers. Throws NoPlaneFound when no
// sample satisfies the constraint.
PlaneFit ransac_plane(const PointCloud& cloud, const Vec3& expected_normal,
                      const SegParams& params);

// Connected components of the graph linking points closer than tolerance;
// clusters below min_size are dropped, the rest sorted by size descending
// (ties: lowest member index). Members are ascending.
std::vector<std::vector<size_t>> euclidean_clusters(const PointCloud& cloud,
                                                    double tolerance,
                                                    size_t min_size);

// Full gaze-seeded chain: pass-through, voxel grid, plane removal,
// clustering, cluster selection, axis-aligned box. Throws NothingSegmented
// when no cluster matches the gaze.
Segmentation segment_by_gaze(const PointCloud& cloud, const Vec3& gaze,
                             const SegParams& params);

}  // namespace gazetk
