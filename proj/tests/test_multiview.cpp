#include "gazetk/multiview.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "test_util.hpp"

using namespace gazetk;
using testutil::irand;
using testutil::random_transform;
using testutil::urand;

TEST_CASE("calibrate_extrinsics: identities, translations, matrix oracle") {
  const RigidTransform id;
  const RigidTransform out = calibrate_extrinsics(id, id, id, id);
  CHECK(out.translation.norm() == doctest::Approx(0));
  CHECK(out.rotation.angularDistance(Quat::Identity()) == doctest::Approx(0));

  // pure translations: bTc = -mb_b - h_mb + h_mc + mc_c
  RigidTransform h_mb, h_mc, mb_b, mc_c;
  h_mb.translation = Vec3(1, 0, 0);
  h_mc.translation = Vec3(0, 2, 0);
  mb_b.translation = Vec3(0, 0, 3);
  mc_c.translation = Vec3(4, 0, 0);
  const RigidTransform chain = calibrate_extrinsics(h_mb, h_mc, mb_b, mc_c);
  CHECK(chain.translation.isApprox(Vec3(-1 + 0 + 4, 2, -3)));

  std::mt19937 gen(163);
  for (int i = 0; i < 100; ++i) {
    const RigidTransform a = random_transform(gen);
    const RigidTransform b = random_transform(gen);
    const RigidTransform c = random_transform(gen);
    const RigidTransform d = random_transform(gen);
    const Mat4 oracle = c.matrix().inverse() * a.matrix().inverse() *
                        b.matrix() * d.matrix();
    const Mat4 got = calibrate_extrinsics(a, b, c, d).matrix();
    CHECK((got - oracle).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("circular_path: unit cube geometry in closed form") {
  BBox3D box;
  box.center = Vec3(0, 0, 0);
  box.size = Vec3(1, 1, 1);
  const auto path = circular_path(box, 4, 0.5);
  REQUIRE(path.size() == 4);

  const double dist = 2.0 * std::sqrt(3.0);
  const double planar = dist * std::cos(M_PI / 4);
  const double height = dist * std::sin(M_PI / 4);
  const Vec3 expected[4] = {
      Vec3(planar, 0, height), Vec3(0, planar, height),
      Vec3(-planar, 0, height), Vec3(0, -planar, height)};
  for (int i = 0; i < 4; ++i) {
    CHECK((path[i].world_from_camera.translation - expected[i]).norm() < 1e-9);
    CHECK(path[i].world_from_camera.translation.norm() ==
          doctest::Approx(dist));
    // the optical axis (+z of the camera frame) passes through the center
    const Vec3 forward = path[i].world_from_camera.rotation * Vec3(0, 0, 1);
    const Vec3 to_center =
        (box.center - path[i].world_from_camera.translation).normalized();
    CHECK(forward.dot(to_center) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("circular_path: single waypoint, constancy, degenerate box") {
  BBox3D box;
  box.center = Vec3(1, 2, 0.5);
  box.size = Vec3(0.2, 0.1, 0.3);
  const auto one = circular_path(box, 1);
  REQUIRE(one.size() == 1);
  // azimuth 0 puts the camera along +x from the center
  CHECK(one[0].world_from_camera.translation.y() == doctest::Approx(2.0));

  const auto many = circular_path(box, 13);
  for (const auto& vp : many) {
    CHECK((vp.world_from_camera.translation - box.center).norm() ==
          doctest::Approx((many[0].world_from_camera.translation - box.center)
                              .norm())
              .epsilon(1e-12));
  }

  BBox3D degenerate;
  degenerate.center = Vec3(0, 0, 0);
  degenerate.size = Vec3(0, 0, 0);
  CHECK_THROWS_WITH_AS(circular_path(degenerate, 4, 0.0),
                       doctest::Contains("DegenerateBox"), Error);

  // reachability predicate filters waypoints
  const double cx = box.center.x();
  const auto filtered = circular_path(box, 8, 0.5, [cx](const Viewpoint& vp) {
    return vp.world_from_camera.translation.x() > cx;
  });
  CHECK(filtered.size() < 8);
  CHECK(!filtered.empty());
}

TEST_CASE("label_view: single axis point, oracle equality, behind camera") {
  PinholeCamera cam;
  cam.fx = 200;
  cam.fy = 200;
  cam.cx = 64;
  cam.cy = 48;
  cam.width = 128;
  cam.height = 96;

  Viewpoint straight;  // camera at origin looking along +z
  straight.target = Vec3(0, 0, 1);

  PointCloud single;
  single.points = {Vec3(0, 0, 1)};
  const LabeledView lone = label_view(single, straight, cam, 1);
  CHECK(lone.roi == BBox2D{64, 48, 64, 48});
  CHECK(lone.in_frame_count == 1);

  PointCloud behind;
  behind.points = {Vec3(0, 0, -1), Vec3(0, 0, -2)};
  CHECK_THROWS_WITH_AS(label_view(behind, straight, cam, 1),
                       doctest::Contains("TooFewProjected"), Error);

  // synthetic cube cloud against a per-point projection oracle
  std::mt19937 gen(167);
  PointCloud cube;
  for (int i = 0; i < 500; ++i) {
    cube.points.emplace_back(urand(gen, -0.1, 0.1), urand(gen, -0.1, 0.1),
                             urand(gen, 0.9, 1.1));
  }
  const LabeledView view = label_view(cube, straight, cam, 10);
  double min_u = 1e9, min_v = 1e9, max_u = -1e9, max_v = -1e9;
  size_t in_frame = 0;
  for (const auto& p : cube.points) {
    if (p.z() <= 0) continue;
    const double u = cam.fx * p.x() / p.z() + cam.cx;
    const double v = cam.fy * p.y() / p.z() + cam.cy;
    if (u < 0 || u >= cam.width || v < 0 || v >= cam.height) continue;
    ++in_frame;
    min_u = std::min(min_u, u);
    max_u = std::max(max_u, u);
    min_v = std::min(min_v, v);
    max_v = std::max(max_v, v);
  }
  CHECK(view.in_frame_count == in_frame);
  CHECK(view.roi.x1 == min_u);
  CHECK(view.roi.x2 == max_u);
  CHECK(view.roi.y1 == min_v);
  CHECK(view.roi.y2 == max_v);
}

TEST_CASE("gaze_box_3d: degenerate, quantile arithmetic, permutation") {
  std::vector<Vec3> same(5, Vec3(1, 2, 3));
  const BBox3D tiny = gaze_box_3d(same);
  CHECK(tiny.center.isApprox(Vec3(1, 2, 3)));
  CHECK(tiny.size.isApprox(Vec3(0.01, 0.01, 0.01)));

  // axis values 0..9: median 4.5, Q1 2.25, Q3 6.75, size 3*4.5 = 13.5
  std::vector<Vec3> ramp;
  for (int i = 0; i < 10; ++i) ramp.emplace_back(i, 0.5 * i, 1.0);
  const BBox3D box = gaze_box_3d(ramp);
  CHECK(box.center.x() == doctest::Approx(4.5));
  CHECK(box.size.x() == doctest::Approx(13.5));
  CHECK(box.center.y() == doctest::Approx(2.25));
  CHECK(box.size.y() == doctest::Approx(6.75));
  CHECK(box.size.z() == doctest::Approx(0.01));  // floored

  std::mt19937 gen(173);
  std::vector<Vec3> pts;
  for (int i = 0; i < 25; ++i) {
    pts.emplace_back(urand(gen, -1, 1), urand(gen, -1, 1), urand(gen, -1, 1));
  }
  std::vector<Vec3> shuffled = pts;
  for (size_t i = shuffled.size(); i > 1; --i) {
    std::swap(shuffled[i - 1], shuffled[gen() % i]);
  }
  const BBox3D a = gaze_box_3d(pts);
  const BBox3D b = gaze_box_3d(shuffled);
  CHECK(a.center == b.center);
  CHECK(a.size == b.size);

  // translation equivariance
  std::vector<Vec3> moved;
  for (const auto& p : pts) moved.push_back(p + Vec3(10, -3, 2));
  const BBox3D c = gaze_box_3d(moved);
  CHECK((c.center - (a.center + Vec3(10, -3, 2))).norm() < 1e-12);
  CHECK((c.size - a.size).norm() < 1e-12);

  CHECK_THROWS_WITH_AS(gaze_box_3d({Vec3(0, 0, 0), Vec3(1, 1, 1)}),
                       doctest::Contains("TooFewGazePoints"), Error);
}

TEST_CASE("label_run_cloud: rois contain all in-frame projections") {
  std::mt19937 gen(179);
  PointCloud cube;
  cube.frame_id = "world";
  for (int i = 0; i < 400; ++i) {
    cube.points.emplace_back(urand(gen, -0.05, 0.05), urand(gen, -0.05, 0.05),
                             urand(gen, 0.45, 0.55));
  }
  BBox3D box;
  box.center = Vec3(0, 0, 0.5);
  box.size = Vec3(0.1, 0.1, 0.1);
  const auto path = circular_path(box, 8, 0.5);
  PinholeCamera cam;
  cam.fx = 400;
  cam.fy = 400;
  cam.cx = 160;
  cam.cy = 120;
  cam.width = 320;
  cam.height = 240;

  const auto outcomes = label_run_cloud(cube, path, cam);
  REQUIRE(outcomes.size() == 8);
  for (const auto& o : outcomes) {
    REQUIRE(o.view.has_value());
    const RigidTransform cam_from_world =
        invert(o.view->viewpoint.world_from_camera);
    size_t in_frame = 0;
    for (const auto& p : cube.points) {
      const Vec3 pc = cam_from_world.apply(p);
      if (pc.z() <= 0) continue;
      const Vec2 px = project(cam, pc);
      if (px.x() < 0 || px.x() >= cam.width || px.y() < 0 ||
          px.y() >= cam.height) {
        continue;
      }
      ++in_frame;
      CHECK(o.view->roi.contains(px.x(), px.y()));
    }
    CHECK(o.view->in_frame_count == in_frame);
  }

  // empty path gives an empty run
  CHECK(label_run_cloud(cube, {}, cam).empty());
}

TEST_CASE("label_run_gaze: refined roi lands on the painted object") {
  PinholeCamera cam;
  cam.fx = 200;
  cam.fy = 200;
  cam.cx = 96;
  cam.cy = 72;
  cam.width = 192;
  cam.height = 144;

  // camera at the origin looking along +z; object rectangle on z = 0.5
  Viewpoint vp;
  const double z = 0.5;
  const BBox2D world_rect{-0.06, -0.05, 0.07, 0.05};
  const BBox2D box_px{cam.fx * world_rect.x1 / z + cam.cx,
                      cam.fy * world_rect.y1 / z + cam.cy,
                      cam.fx * world_rect.x2 / z + cam.cx,
                      cam.fy * world_rect.y2 / z + cam.cy};
  Raster img(cam.width, cam.height, 3, 0.1);
  for (int y = static_cast<int>(box_px.y1); y <= box_px.y2; ++y) {
    for (int x = static_cast<int>(box_px.x1); x <= box_px.x2; ++x) {
      img.at(x, y, 0) = 0.9;
      img.at(x, y, 1) = 0.75;
      img.at(x, y, 2) = 0.2;
    }
  }
  std::mt19937 gen(227);
  std::vector<Vec3> gaze;
  for (int i = 0; i < 30; ++i) {
    gaze.emplace_back(0.005 + urand(gen, -0.01, 0.01),
                      urand(gen, -0.01, 0.01), z);
  }
  GbvsParams params;
  params.variant = GbvsVariant::GA;
  params.k = 1;
  params.normalize_k = 4;
  const auto outcomes = label_run_gaze(gaze, {vp}, cam, {img}, params);
  REQUIRE(outcomes.size() == 1);
  REQUIRE(outcomes[0].view.has_value());
  CHECK(iou2d(outcomes[0].view->roi, box_px) >= 0.5);
  CHECK(outcomes[0].view->in_frame_count == 30);

  // all gaze behind the camera: error collected, run continues
  std::vector<Vec3> behind{Vec3(0, 0, -1), Vec3(0, 0, -2), Vec3(0, 0, -3),
                           Vec3(0, 0, -4)};
  const auto failed = label_run_gaze(behind, {vp}, cam, {img}, params);
  REQUIRE(failed.size() == 1);
  CHECK_FALSE(failed[0].view.has_value());
  CHECK(failed[0].error.find("TooFewProjected") != std::string::npos);
}

TEST_CASE("label_run_cloud: failed views are collected, run continues") {
  PointCloud points;
  points.frame_id = "world";
  points.points = {Vec3(0, 0, 0.5)};
  BBox3D box;
  box.center = Vec3(0, 0, 0.5);
  box.size = Vec3(0.01, 0.01, 0.01);
  PinholeCamera cam;
  cam.fx = 100;
  cam.fy = 100;
  cam.cx = 50;
  cam.cy = 50;
  cam.width = 100;
  cam.height = 100;
  const auto path = circular_path(box, 3, 0.4);
  const auto outcomes = label_run_cloud(points, path, cam, 5);
  REQUIRE(outcomes.size() == 3);
  for (const auto& o : outcomes) {
    CHECK_FALSE(o.view.has_value());
    CHECK(o.error.find("TooFewProjected") != std::string::npos);
  }
}
