#include "gazetk/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace gazetk {

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  RigidTransform out;
  out.rotation = (a.rotation * b.rotation).normalized();
  out.translation = a.rotation * b.translation + a.translation;
  return out;
}

RigidTransform invert(const RigidTransform& t) {
  RigidTransform out;
  out.rotation = t.rotation.conjugate().normalized();
  out.translation = -(out.rotation * t.translation);
  return out;
}

Vec2 project(const PinholeCamera& cam, const Vec3& p_cam) {
  if (p_cam.z() <= 0.0) {
    fail(ErrorCode::BehindCamera,
         "point has non-positive depth z=" + std::to_string(p_cam.z()));
  }
  return {cam.fx * p_cam.x() / p_cam.z() + cam.cx,
          cam.fy * p_cam.y() / p_cam.z() + cam.cy};
}

Vec3 back_project(const PinholeCamera& cam, const Vec2& pixel, double z) {
  if (z <= 0.0) {
    fail(ErrorCode::BehindCamera, "back-projection depth must be positive");
  }
  return {(pixel.x() - cam.cx) / cam.fx * z, (pixel.y() - cam.cy) / cam.fy * z,
          z};
}

double iou2d(const BBox2D& a, const BBox2D& b) {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  const double inter = (iw > 0 && ih > 0) ? iw * ih : 0.0;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) {
    return a == b ? 1.0 : 0.0;
  }
  return inter / uni;
}

double iou3d(const BBox3D& a, const BBox3D& b) {
  if (a.frame_id != b.frame_id) {
    fail(ErrorCode::FrameMismatch,
         "'" + a.frame_id + "' vs '" + b.frame_id + "'");
  }
  const Vec3 lo = a.min_corner().cwiseMax(b.min_corner());
  const Vec3 hi = a.max_corner().cwiseMin(b.max_corner());
  const Vec3 extent = (hi - lo).cwiseMax(0.0);
  const double inter = extent.prod();
  const double uni = a.volume() + b.volume() - inter;
  if (uni <= 0.0) {
    return 0.0;
  }
  return inter / uni;
}

}  // namespace gazetk
