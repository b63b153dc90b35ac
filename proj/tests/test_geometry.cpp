#include "gazetk/geometry.hpp"

#include <doctest.h>

#include "test_util.hpp"

using namespace gazetk;
using testutil::irand;
using testutil::random_transform;
using testutil::urand;

namespace {

// Counts unit cells (centers at half-integers) inside a box; exact for
// integer-corner boxes, so it doubles as a discretized IoU oracle.
double grid_iou2d(const BBox2D& a, const BBox2D& b) {
  const int lo_x = static_cast<int>(std::floor(std::min(a.x1, b.x1))) - 1;
  const int hi_x = static_cast<int>(std::ceil(std::max(a.x2, b.x2))) + 1;
  const int lo_y = static_cast<int>(std::floor(std::min(a.y1, b.y1))) - 1;
  const int hi_y = static_cast<int>(std::ceil(std::max(a.y2, b.y2))) + 1;
  long inter = 0, uni = 0;
  for (int y = lo_y; y < hi_y; ++y) {
    for (int x = lo_x; x < hi_x; ++x) {
      const double cx = x + 0.5, cy = y + 0.5;
      const bool in_a = a.contains(cx, cy);
      const bool in_b = b.contains(cx, cy);
      inter += in_a && in_b;
      uni += in_a || in_b;
    }
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / uni;
}

double voxel_iou3d(const BBox3D& a, const BBox3D& b) {
  const Vec3 lo = a.min_corner().cwiseMin(b.min_corner());
  const Vec3 hi = a.max_corner().cwiseMax(b.max_corner());
  const int steps = 40;
  const Vec3 cell = (hi - lo) / steps;
  long inter = 0, uni = 0;
  for (int z = 0; z < steps; ++z) {
    for (int y = 0; y < steps; ++y) {
      for (int x = 0; x < steps; ++x) {
        const Vec3 c = lo + Vec3((x + 0.5) * cell.x(), (y + 0.5) * cell.y(),
                                 (z + 0.5) * cell.z());
        const bool in_a = (c.array() >= a.min_corner().array()).all() &&
                          (c.array() <= a.max_corner().array()).all();
        const bool in_b = (c.array() >= b.min_corner().array()).all() &&
                          (c.array() <= b.max_corner().array()).all();
        inter += in_a && in_b;
        uni += in_a || in_b;
      }
    }
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / uni;
}

}  // namespace

TEST_CASE("compose identities and pure translations") {
  const RigidTransform id = RigidTransform::identity();
  const RigidTransform c = compose(id, id);
  CHECK(c.translation.norm() == doctest::Approx(0.0));
  CHECK(c.rotation.angularDistance(Quat::Identity()) ==
        doctest::Approx(0.0));

  RigidTransform a, b;
  a.translation = Vec3(1, 0, 0);
  b.translation = Vec3(0, 2, 0);
  const RigidTransform ab = compose(a, b);
  CHECK(ab.translation.isApprox(Vec3(1, 2, 0)));
}

TEST_CASE("compose matches the homogeneous matrix product") {
  std::mt19937 gen(7);
  for (int i = 0; i < 200; ++i) {
    const RigidTransform a = random_transform(gen);
    const RigidTransform b = random_transform(gen);
    const Mat4 oracle = a.matrix() * b.matrix();
    CHECK((compose(a, b).matrix() - oracle).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("compose is associative, invert is a two-sided inverse") {
  std::mt19937 gen(11);
  for (int i = 0; i < 100; ++i) {
    const RigidTransform a = random_transform(gen);
    const RigidTransform b = random_transform(gen);
    const RigidTransform c = random_transform(gen);
    const Mat4 left = compose(compose(a, b), c).matrix();
    const Mat4 right = compose(a, compose(b, c)).matrix();
    CHECK((left - right).cwiseAbs().maxCoeff() < 1e-9);

    const Mat4 fwd = compose(a, invert(a)).matrix();
    const Mat4 bwd = compose(invert(a), a).matrix();
    CHECK((fwd - Mat4::Identity()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((bwd - Mat4::Identity()).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("composition keeps the quaternion normalized") {
  std::mt19937 gen(13);
  RigidTransform t = random_transform(gen);
  for (int i = 0; i < 1000; ++i) {
    t = compose(t, random_transform(gen));
  }
  CHECK(std::abs(t.rotation.norm() - 1.0) < 1e-9);
}

TEST_CASE("project follows the pinhole formula") {
  PinholeCamera cam;
  cam.fx = 100;
  cam.fy = 100;
  cam.cx = 50;
  cam.cy = 40;
  cam.width = 100;
  cam.height = 80;

  const Vec2 axis = project(cam, Vec3(0, 0, 1));
  CHECK(axis.x() == doctest::Approx(50));
  CHECK(axis.y() == doctest::Approx(40));

  // u = fx*x/z + cx = 100*1/2 + 50
  CHECK(project(cam, Vec3(1, 0, 2)).x() == doctest::Approx(100));

  CHECK_THROWS_WITH_AS(project(cam, Vec3(0, 0, -1)), doctest::Contains("BehindCamera"),
                       Error);
  CHECK_THROWS_AS(project(cam, Vec3(0, 0, 0)), Error);
}

TEST_CASE("project and back_project are inverse on the pixel") {
  PinholeCamera cam;
  cam.fx = 320.5;
  cam.fy = 331.25;
  cam.cx = 319.5;
  cam.cy = 239.5;
  cam.width = 640;
  cam.height = 480;
  std::mt19937 gen(17);
  for (int i = 0; i < 500; ++i) {
    const Vec2 px(urand(gen, 0, 639), urand(gen, 0, 479));
    const double z = urand(gen, 0.01, 50.0);
    const Vec2 round_trip = project(cam, back_project(cam, px, z));
    CHECK((round_trip - px).norm() < 1e-6);
  }
}

TEST_CASE("iou2d basics") {
  const BBox2D a{0, 0, 10, 10};
  CHECK(iou2d(a, a) == doctest::Approx(1.0));
  CHECK(iou2d(a, BBox2D{20, 20, 30, 30}) == doctest::Approx(0.0));
  CHECK(iou2d(a, BBox2D{5, 0, 15, 10}) == doctest::Approx(1.0 / 3.0));
  CHECK(grid_iou2d(a, BBox2D{5, 0, 15, 10}) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("iou2d agrees with grid counting on random integer boxes") {
  std::mt19937 gen(19);
  for (int i = 0; i < 300; ++i) {
    const int x1 = irand(gen, -20, 20), y1 = irand(gen, -20, 20);
    const int x2 = x1 + irand(gen, 1, 25), y2 = y1 + irand(gen, 1, 25);
    const int u1 = irand(gen, -20, 20), v1 = irand(gen, -20, 20);
    const int u2 = u1 + irand(gen, 1, 25), v2 = v1 + irand(gen, 1, 25);
    const BBox2D a{double(x1), double(y1), double(x2), double(y2)};
    const BBox2D b{double(u1), double(v1), double(u2), double(v2)};
    const double iou = iou2d(a, b);
    CHECK(iou == doctest::Approx(iou2d(b, a)));
    CHECK(iou >= 0.0);
    CHECK(iou <= 1.0);
    CHECK(iou == doctest::Approx(grid_iou2d(a, b)).epsilon(1e-3));
  }
}

TEST_CASE("iou3d basics and frame checking") {
  BBox3D cube;
  cube.center = Vec3(0, 0, 0);
  cube.size = Vec3(1, 1, 1);
  CHECK(iou3d(cube, cube) == doctest::Approx(1.0));

  BBox3D shifted = cube;
  shifted.center = Vec3(0.5, 0, 0);
  CHECK(iou3d(cube, shifted) == doctest::Approx(1.0 / 3.0));
  CHECK(voxel_iou3d(cube, shifted) == doctest::Approx(1.0 / 3.0).epsilon(0.05));

  BBox3D touching = cube;
  touching.center = Vec3(1.0, 0, 0);
  CHECK(iou3d(cube, touching) == doctest::Approx(0.0));

  BBox3D other_frame = cube;
  other_frame.frame_id = "world";
  CHECK_THROWS_AS(iou3d(cube, other_frame), Error);
}

TEST_CASE("iou3d agrees with voxel counting on random boxes") {
  std::mt19937 gen(23);
  for (int i = 0; i < 50; ++i) {
    BBox3D a, b;
    a.center = Vec3(urand(gen, -2, 2), urand(gen, -2, 2), urand(gen, -2, 2));
    a.size = Vec3(urand(gen, 0.5, 3), urand(gen, 0.5, 3), urand(gen, 0.5, 3));
    b.center = Vec3(urand(gen, -2, 2), urand(gen, -2, 2), urand(gen, -2, 2));
    b.size = Vec3(urand(gen, 0.5, 3), urand(gen, 0.5, 3), urand(gen, 0.5, 3));
    const double iou = iou3d(a, b);
    CHECK(iou == doctest::Approx(iou3d(b, a)));
    CHECK(iou == doctest::Approx(voxel_iou3d(a, b)).epsilon(0.08));
  }
}

TEST_CASE("degenerate zero-area boxes") {
  const BBox2D point{3, 5, 3, 5};
  CHECK(iou2d(point, point) == doctest::Approx(1.0));
  CHECK(iou2d(point, BBox2D{4, 5, 4, 5}) == doctest::Approx(0.0));
}
