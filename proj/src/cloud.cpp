#include "gazetk/cloud.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <unordered_map>

namespace gazetk {

namespace {

struct VoxelKey {
  int64_t x, y, z;
  bool operator==(const VoxelKey& o) const {
    return x == o.x && y == o.y && z == o.z;
  }
};

struct VoxelHash {
  size_t operator()(const VoxelKey& k) const {
    size_t h = std::hash<int64_t>()(k.x);
    h ^= std::hash<int64_t>()(k.y) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    h ^= std::hash<int64_t>()(k.z) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return h;
  }
};

VoxelKey voxel_of(const Vec3& p, double leaf) {
  return {static_cast<int64_t>(std::floor(p.x() / leaf)),
          static_cast<int64_t>(std::floor(p.y() / leaf)),
          static_cast<int64_t>(std::floor(p.z() / leaf))};
}

struct UnionFind {
  std::vector<size_t> parent;
  explicit UnionFind(size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  size_t find(size_t a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  }
  void unite(size_t a, size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

PlaneModel plane_from_points(const Vec3& a, const Vec3& b, const Vec3& c) {
  PlaneModel plane;
  plane.normal = (b - a).cross(c - a).normalized();
  plane.offset = -plane.normal.dot(a);
  return plane;
}

// Least-squares refit via the smallest principal component of the inliers.
PlaneModel refit_plane(const PointCloud& cloud,
                       const std::vector<size_t>& inliers) {
  Vec3 centroid = Vec3::Zero();
  for (size_t i : inliers) centroid += cloud.points[i];
  centroid /= static_cast<double>(inliers.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (size_t i : inliers) {
    const Vec3 d = cloud.points[i] - centroid;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  PlaneModel plane;
  plane.normal = solver.eigenvectors().col(0).normalized();
  plane.offset = -plane.normal.dot(centroid);
  return plane;
}

}  // namespace

PointCloud pass_through(const PointCloud& cloud, double z_min, double z_max) {
  PointCloud out;
  out.frame_id = cloud.frame_id;
  for (const auto& p : cloud.points) {
    if (p.z() >= z_min && p.z() <= z_max) {
      out.points.push_back(p);
    }
  }
  return out;
}

PointCloud voxel_downsample(const PointCloud& cloud, double leaf) {
  if (leaf <= 0) {
    fail(ErrorCode::InvalidArgument, "voxel leaf must be positive");
  }
  std::unordered_map<VoxelKey, size_t, VoxelHash> slot;
  std::vector<Vec3> sums;
  std::vector<size_t> counts;
  for (const auto& p : cloud.points) {
    const VoxelKey key = voxel_of(p, leaf);
    auto [it, inserted] = slot.try_emplace(key, sums.size());
    if (inserted) {
      sums.push_back(p);
      counts.push_back(1);
    } else {
      sums[it->second] += p;
      ++counts[it->second];
    }
  }
  PointCloud out;
  out.frame_id = cloud.frame_id;
  out.points.reserve(sums.size());
  for (size_t i = 0; i < sums.size(); ++i) {
    out.points.push_back(sums[i] / static_cast<double>(counts[i]));
  }
  return out;
}

PlaneFit ransac_plane(const PointCloud& cloud, const Vec3& expected_normal,
                      const SegParams& params) {
  const size_t n = cloud.size();
  if (n < 3) {
    fail(ErrorCode::NoPlaneFound, "need at least three points");
  }
  const Vec3 expected = expected_normal.normalized();
  const double cos_max =
      std::cos(params.normal_deviation_deg * M_PI / 180.0);

  std::mt19937 gen(params.seed);
  auto draw = [&](size_t bound) { return static_cast<size_t>(gen() % bound); };

  PlaneModel best_plane;
  size_t best_count = 0;
  bool found = false;
  for (int iter = 0; iter < params.ransac_iterations; ++iter) {
    const size_t a = draw(n);
    size_t b = draw(n);
    size_t c = draw(n);
    if (a == b || a == c || b == c) continue;
    const Vec3 cross =
        (cloud.points[b] - cloud.points[a]).cross(cloud.points[c] - cloud.points[a]);
    if (cross.norm() < 2e-9) continue;  // near-collinear sample
    PlaneModel plane = plane_from_points(cloud.points[a], cloud.points[b],
                                         cloud.points[c]);
    if (plane.normal.dot(expected) < 0) {
      plane.normal = -plane.normal;
      plane.offset = -plane.offset;
    }
    if (plane.normal.dot(expected) < cos_max) continue;

    size_t count = 0;
    for (const auto& p : cloud.points) {
      if (plane.distance(p) <= params.inlier_distance) ++count;
    }
    if (!found || count > best_count) {
      best_plane = plane;
      best_count = count;
      found = true;
    }
  }
  if (!found) {
    fail(ErrorCode::NoPlaneFound,
         "no sampled plane satisfied the normal constraint");
  }

  PlaneFit fit;
  fit.plane = best_plane;
  for (size_t i = 0; i < n; ++i) {
    if (best_plane.distance(cloud.points[i]) <= params.inlier_distance) {
      fit.inliers.push_back(i);
    }
  }
  if (fit.inliers.size() >= 3) {
    PlaneModel refined = refit_plane(cloud, fit.inliers);
    if (refined.normal.dot(expected) < 0) {
      refined.normal = -refined.normal;
      refined.offset = -refined.offset;
    }
    if (refined.normal.dot(expected) >= cos_max) {
      fit.plane = refined;
      fit.inliers.clear();
      for (size_t i = 0; i < n; ++i) {
        if (refined.distance(cloud.points[i]) <= params.inlier_distance) {
          fit.inliers.push_back(i);
        }
      }
    }
  }
  return fit;
}

std::vector<std::vector<size_t>> euclidean_clusters(const PointCloud& cloud,
                                                    double tolerance,
                                                    size_t min_size) {
  if (tolerance <= 0) {
    fail(ErrorCode::InvalidArgument, "cluster tolerance must be positive");
  }
  const size_t n = cloud.size();
  UnionFind uf(n);

  // bucket points into a grid of cell size = tolerance; neighbors can only
  // live in the 27 surrounding cells
  std::unordered_map<VoxelKey, std::vector<size_t>, VoxelHash> grid;
  for (size_t i = 0; i < n; ++i) {
    grid[voxel_of(cloud.points[i], tolerance)].push_back(i);
  }
  const double tol2 = tolerance * tolerance;
  for (size_t i = 0; i < n; ++i) {
    const VoxelKey base = voxel_of(cloud.points[i], tolerance);
    for (int dz = -1; dz <= 1; ++dz) {
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const auto it = grid.find({base.x + dx, base.y + dy, base.z + dz});
          if (it == grid.end()) continue;
          for (size_t j : it->second) {
            if (j <= i) continue;
            if ((cloud.points[i] - cloud.points[j]).squaredNorm() <= tol2) {
              uf.unite(i, j);
            }
          }
        }
      }
    }
  }

  std::unordered_map<size_t, std::vector<size_t>> groups;
  for (size_t i = 0; i < n; ++i) {
    groups[uf.find(i)].push_back(i);
  }
  std::vector<std::vector<size_t>> clusters;
  for (auto& [root, members] : groups) {
    if (members.size() >= min_size) {
      std::sort(members.begin(), members.end());
      clusters.push_back(std::move(members));
    }
  }
  std::sort(clusters.begin(), clusters.end(),
            [](const std::vector<size_t>& a, const std::vector<size_t>& b) {
              if (a.size() != b.size()) return a.size() > b.size();
              return a.front() < b.front();
            });
  return clusters;
}

Segmentation segment_by_gaze(const PointCloud& cloud, const Vec3& gaze,
                             const SegParams& params) {
  Segmentation seg;
  seg.working = voxel_downsample(
      pass_through(cloud, params.pass_min, params.pass_max),
      params.voxel_leaf);
  if (seg.working.size() < 3) {
    fail(ErrorCode::NothingSegmented, "too few points after filtering");
  }

  const PlaneFit fit =
      ransac_plane(seg.working, params.expected_normal, params);
  seg.plane = fit.plane;
  seg.plane_indices = fit.inliers;

  std::vector<char> on_plane(seg.working.size(), 0);
  for (size_t i : fit.inliers) on_plane[i] = 1;
  PointCloud remainder;
  remainder.frame_id = seg.working.frame_id;
  std::vector<size_t> remainder_to_working;
  for (size_t i = 0; i < seg.working.size(); ++i) {
    if (!on_plane[i]) {
      remainder.points.push_back(seg.working.points[i]);
      remainder_to_working.push_back(i);
    }
  }

  const size_t min_size = params.mode == SegMode::Radius
                              ? params.radius_min_cluster_size
                              : params.min_cluster_size;
  const auto clusters =
      euclidean_clusters(remainder, params.cluster_tolerance, min_size);
  if (clusters.empty()) {
    fail(ErrorCode::NothingSegmented, "no cluster survived the size filter");
  }

  std::vector<size_t> selected;  // indices into remainder
  if (params.mode == SegMode::Nearest) {
    size_t nearest = 0;
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < remainder.size(); ++i) {
      const double d = (remainder.points[i] - gaze).squaredNorm();
      if (d < best) {
        best = d;
        nearest = i;
      }
    }
    for (const auto& cluster : clusters) {
      if (std::binary_search(cluster.begin(), cluster.end(), nearest)) {
        selected = cluster;
        break;
      }
    }
  } else {
    const double r2 = params.gaze_radius * params.gaze_radius;
    for (const auto& cluster : clusters) {
      const bool hit = std::any_of(
          cluster.begin(), cluster.end(), [&](size_t i) {
            return (remainder.points[i] - gaze).squaredNorm() <= r2;
          });
      if (hit) {
        selected.insert(selected.end(), cluster.begin(), cluster.end());
      }
    }
    std::sort(selected.begin(), selected.end());
  }
  if (selected.empty()) {
    fail(ErrorCode::NothingSegmented, "gaze does not touch any cluster");
  }

  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (size_t i : selected) {
    seg.object_indices.push_back(remainder_to_working[i]);
    lo = lo.cwiseMin(remainder.points[i]);
    hi = hi.cwiseMax(remainder.points[i]);
  }
  std::sort(seg.object_indices.begin(), seg.object_indices.end());
  seg.box.center = 0.5 * (lo + hi);
  seg.box.size = (hi - lo).cwiseMax(1e-6);  // keep extents positive
  seg.box.frame_id = cloud.frame_id;
  return seg;
}

}  // namespace gazetk
