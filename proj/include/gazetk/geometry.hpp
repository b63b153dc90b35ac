#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <string>
#include <vector>

#include "gazetk/errors.hpp"

namespace gazetk {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;
using Mat4 = Eigen::Matrix4d;

// A timestamped gaze point. 2D logs keep z at 0; the owning log knows its
// dimensionality.
struct GazeSample {
  double t_ms = 0.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  std::string frame_id;
};

// Axis-aligned 2D box with inclusive real-valued corners, x1 <= x2, y1 <= y2.
struct BBox2D {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
  bool contains(double px, double py) const {
    return x1 <= px && px <= x2 && y1 <= py && py <= y2;
  }
  bool valid() const {
    return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) &&
           std::isfinite(y2) && x1 <= x2 && y1 <= y2;
  }
  bool operator==(const BBox2D& o) const {
    return x1 == o.x1 && y1 == o.y1 && x2 == o.x2 && y2 == o.y2;
  }
};

// Axis-aligned 3D box given as center and positive extents.
struct BBox3D {
  Vec3 center = Vec3::Zero();
  Vec3 size = Vec3::Zero();
  std::string frame_id;

  Vec3 min_corner() const { return center - 0.5 * size; }
  Vec3 max_corner() const { return center + 0.5 * size; }
  double volume() const { return size.x() * size.y() * size.z(); }
  bool valid() const {
    return size.x() > 0 && size.y() > 0 && size.z() > 0 &&
           center.allFinite() && size.allFinite();
  }
};

// SE(3) pose as unit quaternion + translation. Applies rotation first,
// then translation: p' = q * p + t.
struct RigidTransform {
  Quat rotation = Quat::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidTransform identity() { return {}; }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

  Mat4 matrix() const {
    Mat4 m = Mat4::Identity();
    m.topLeftCorner<3, 3>() = rotation.toRotationMatrix();
    m.topRightCorner<3, 1>() = translation;
    return m;
  }
};

// result applies b first, then a.
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform invert(const RigidTransform& t);

// Pinhole intrinsics without distortion. Pixel origin at the top-left,
// camera frame: +x right, +y down, +z forward.
struct PinholeCamera {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  bool valid() const {
    return fx > 0 && fy > 0 && width > 0 && height > 0 && cx >= 0 &&
           cx < width && cy >= 0 && cy < height;
  }
};

// Projects a camera-frame point onto the image plane. Throws BehindCamera
// for z <= 0.
Vec2 project(const PinholeCamera& cam, const Vec3& p_cam);

// Inverse of project at a given depth z > 0.
Vec3 back_project(const PinholeCamera& cam, const Vec2& pixel, double z);

// Scalar raster, row-major, interleaved channels.
struct Raster {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<double> data;

  Raster() = default;
  Raster(int w, int h, int c, double fill = 0.0)
      : width(w), height(h), channels(c),
        data(static_cast<size_t>(w) * h * c, fill) {}

  double& at(int x, int y, int c = 0) {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  double at(int x, int y, int c = 0) const {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  bool empty() const { return width <= 0 || height <= 0 || data.empty(); }
};

struct PointCloud {
  std::vector<Vec3> points;
  std::string frame_id;

  size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

// Intersection over union on inclusive real corners. Zero-area boxes
// compare as 1 when identical, 0 otherwise.
double iou2d(const BBox2D& a, const BBox2D& b);

// Volumetric IoU; throws FrameMismatch when the boxes disagree on frame_id.
double iou3d(const BBox3D& a, const BBox3D& b);

}  // namespace gazetk
