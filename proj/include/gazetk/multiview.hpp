#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gazetk/gbvs.hpp"
#include "gazetk/geometry.hpp"

namespace gazetk {

// Camera pose on the recording path; the optical axis passes through
// `target`.
struct Viewpoint {
  RigidTransform world_from_camera;
  Vec3 target = Vec3::Zero();
};

struct LabeledView {
  Viewpoint viewpoint;
  BBox2D roi;
  size_t in_frame_count = 0;
};

// Chains the marker observations into the base->camera extrinsic:
// bTc = (mbTb)^-1 (hTmb)^-1 (hTmc) (mcTc).
RigidTransform calibrate_extrinsics(const RigidTransform& h_from_mb,
                                    const RigidTransform& h_from_mc,
                                    const RigidTransform& mb_from_b,
                                    const RigidTransform& mc_from_c);

// Equiangular waypoints on a circle about the box center, elevated 45
// degrees, at distance max(2 * |size|, min_dist). Cameras look at the
// center with world +z up (+x when looking straight along z). An optional
// reachability predicate drops waypoints. Throws DegenerateBox when the
// distance collapses.
std::vector<Viewpoint> circular_path(
    const BBox3D& box, int n_waypoints, double min_dist = 0.5,
    const std::function<bool(const Viewpoint&)>& reachable = nullptr);

// Projects a world-frame cloud into the view: points behind the camera are
// dropped, the roi is the min/max box over in-frame projections. Throws
// TooFewProjected when fewer than min_projected points land in frame.
LabeledView label_view(const PointCloud& world_points, const Viewpoint& view,
                       const PinholeCamera& cam, size_t min_projected = 10);

// Median center, 3*IQR extent per axis (quartiles by linear interpolation
// at ranks 0.25(n-1) and 0.75(n-1)); extents floored at 0.01 m. Requires at
// least four points.
BBox3D gaze_box_3d(const std::vector<Vec3>& gaze_world,
                   const std::string& frame_id = "");

// Per-view outcome of a labeling run; failed views carry the error text so
// the run can continue.
struct ViewOutcome {
  size_t path_index = 0;
  std::optional<LabeledView> view;
  std::string error;
};

// Algorithm-style labeling: project the segmented cloud into every waypoint.
std::vector<ViewOutcome> label_run_cloud(const PointCloud& object_cloud,
                                         const std::vector<Viewpoint>& path,
                                         const PinholeCamera& cam,
                                         size_t min_projected = 10);

// Gaze-driven labeling: project the recorded 3D gaze points into each view,
// refine them against the view's image with gaze-assisted saliency, and
// take the Otsu box. `images[i]` belongs to `path[i]`.
std::vector<ViewOutcome> label_run_gaze(const std::vector<Vec3>& gaze_world,
                                        const std::vector<Viewpoint>& path,
                                        const PinholeCamera& cam,
                                        const std::vector<Raster>& images,
                                        const GbvsParams& gbvs_params);

}  // namespace gazetk
