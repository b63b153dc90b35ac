#include "gazetk/multiview.hpp"

#include <algorithm>
#include <cmath>

#include "gazetk/roi.hpp"

namespace gazetk {

namespace {

// Camera axes from a forward direction: x right, y down, z forward.
// World +z serves as up; +x substitutes in the gimbal case.
Eigen::Matrix3d look_at_rotation(const Vec3& forward) {
  const Vec3 f = forward.normalized();
  Vec3 down = -Vec3::UnitZ();
  Vec3 y = down - down.dot(f) * f;
  if (y.norm() < 1e-9) {
    down = -Vec3::UnitX();
    y = down - down.dot(f) * f;
  }
  y.normalize();
  const Vec3 x = y.cross(f);
  Eigen::Matrix3d r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = f;
  return r;
}

double quantile(const std::vector<double>& sorted, double rank) {
  const size_t lo = static_cast<size_t>(std::floor(rank));
  const size_t hi = static_cast<size_t>(std::ceil(rank));
  const double t = rank - static_cast<double>(lo);
  return (1.0 - t) * sorted[lo] + t * sorted[hi];
}

}  // namespace

RigidTransform calibrate_extrinsics(const RigidTransform& h_from_mb,
                                    const RigidTransform& h_from_mc,
                                    const RigidTransform& mb_from_b,
                                    const RigidTransform& mc_from_c) {
  return compose(compose(invert(mb_from_b), invert(h_from_mb)),
                 compose(h_from_mc, mc_from_c));
}

std::vector<Viewpoint> circular_path(
    const BBox3D& box, int n_waypoints, double min_dist,
    const std::function<bool(const Viewpoint&)>& reachable) {
  if (n_waypoints < 1) {
    fail(ErrorCode::InvalidArgument, "need at least one waypoint");
  }
  const double distance = std::max(2.0 * box.size.norm(), min_dist);
  if (!(distance > 1e-9)) {
    fail(ErrorCode::DegenerateBox, "camera distance collapsed to zero");
  }
  constexpr double kElevation = M_PI / 4.0;  // 45 degrees above the center
  std::vector<Viewpoint> path;
  for (int i = 0; i < n_waypoints; ++i) {
    const double azimuth = 2.0 * M_PI * i / n_waypoints;
    const Vec3 offset(distance * std::cos(kElevation) * std::cos(azimuth),
                      distance * std::cos(kElevation) * std::sin(azimuth),
                      distance * std::sin(kElevation));
    Viewpoint vp;
    vp.target = box.center;
    vp.world_from_camera.translation = box.center + offset;
    vp.world_from_camera.rotation =
        Quat(look_at_rotation(box.center - vp.world_from_camera.translation))
            .normalized();
    if (!reachable || reachable(vp)) {
      path.push_back(vp);
    }
  }
  return path;
}

LabeledView label_view(const PointCloud& world_points, const Viewpoint& view,
                       const PinholeCamera& cam, size_t min_projected) {
  if (world_points.empty()) {
    fail(ErrorCode::TooFewProjected, "empty cloud");
  }
  const RigidTransform cam_from_world = invert(view.world_from_camera);
  LabeledView out;
  out.viewpoint = view;
  double min_u = 0, min_v = 0, max_u = 0, max_v = 0;
  for (const auto& p : world_points.points) {
    const Vec3 pc = cam_from_world.apply(p);
    if (pc.z() <= 0.0) continue;
    const Vec2 px = project(cam, pc);
    if (px.x() < 0 || px.x() >= cam.width || px.y() < 0 ||
        px.y() >= cam.height) {
      continue;
    }
    if (out.in_frame_count == 0) {
      min_u = max_u = px.x();
      min_v = max_v = px.y();
    } else {
      min_u = std::min(min_u, px.x());
      max_u = std::max(max_u, px.x());
      min_v = std::min(min_v, px.y());
      max_v = std::max(max_v, px.y());
    }
    ++out.in_frame_count;
  }
  if (out.in_frame_count < min_projected) {
    fail(ErrorCode::TooFewProjected,
         std::to_string(out.in_frame_count) + " in-frame points, need " +
             std::to_string(min_projected));
  }
  out.roi = BBox2D{min_u, min_v, max_u, max_v};
  return out;
}

BBox3D gaze_box_3d(const std::vector<Vec3>& gaze_world,
                   const std::string& frame_id) {
  if (gaze_world.size() < 4) {
    fail(ErrorCode::TooFewGazePoints,
         "need at least four gaze points, got " +
             std::to_string(gaze_world.size()));
  }
  BBox3D box;
  box.frame_id = frame_id;
  const double n1 = static_cast<double>(gaze_world.size() - 1);
  for (int axis = 0; axis < 3; ++axis) {
    std::vector<double> values;
    values.reserve(gaze_world.size());
    for (const auto& g : gaze_world) values.push_back(g[axis]);
    std::sort(values.begin(), values.end());
    const double median = quantile(values, 0.5 * n1);
    const double q1 = quantile(values, 0.25 * n1);
    const double q3 = quantile(values, 0.75 * n1);
    box.center[axis] = median;
    box.size[axis] = std::max(3.0 * (q3 - q1), 0.01);
  }
  return box;
}

std::vector<ViewOutcome> label_run_cloud(const PointCloud& object_cloud,
                                         const std::vector<Viewpoint>& path,
                                         const PinholeCamera& cam,
                                         size_t min_projected) {
  std::vector<ViewOutcome> outcomes;
  for (size_t i = 0; i < path.size(); ++i) {
    ViewOutcome outcome;
    outcome.path_index = i;
    try {
      outcome.view = label_view(object_cloud, path[i], cam, min_projected);
    } catch (const Error& e) {
      outcome.error = e.what();
    }
    outcomes.push_back(std::move(outcome));
  }
  return outcomes;
}

std::vector<ViewOutcome> label_run_gaze(const std::vector<Vec3>& gaze_world,
                                        const std::vector<Viewpoint>& path,
                                        const PinholeCamera& cam,
                                        const std::vector<Raster>& images,
                                        const GbvsParams& gbvs_params) {
  if (images.size() != path.size()) {
    fail(ErrorCode::InvalidArgument, "one image per waypoint required");
  }
  std::vector<ViewOutcome> outcomes;
  for (size_t i = 0; i < path.size(); ++i) {
    ViewOutcome outcome;
    outcome.path_index = i;
    try {
      const RigidTransform cam_from_world = invert(path[i].world_from_camera);
      std::vector<Vec2> gaze_px;
      size_t in_frame = 0;
      for (const auto& g : gaze_world) {
        const Vec3 pc = cam_from_world.apply(g);
        if (pc.z() <= 0.0) continue;
        const Vec2 px = project(cam, pc);
        gaze_px.push_back(px);
        if (px.x() >= 0 && px.x() < cam.width && px.y() >= 0 &&
            px.y() < cam.height) {
          ++in_frame;
        }
      }
      if (in_frame == 0) {
        fail(ErrorCode::TooFewProjected, "no gaze point lands in frame");
      }
      const SaliencyResult sal = saliency(images[i], gaze_px, gbvs_params);
      const RoiResult roi = extract_roi(sal.field);
      LabeledView view;
      view.viewpoint = path[i];
      view.roi = roi.box;
      view.in_frame_count = in_frame;
      outcome.view = view;
    } catch (const Error& e) {
      outcome.error = e.what();
    }
    outcomes.push_back(std::move(outcome));
  }
  return outcomes;
}

}  // namespace gazetk
