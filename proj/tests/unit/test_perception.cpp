#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "doctest.h"
#include "support/oracles.hpp"
#include "tod/core/error.hpp"
#include "tod/perception/camera.hpp"
#include "tod/perception/cluster.hpp"
#include "tod/perception/grid.hpp"
#include "tod/perception/lane.hpp"
#include "tod/perception/stream.hpp"

using namespace tod;
using namespace tod::perception;
using tod::testing::Gen;

namespace {

LaserScan scan_of(std::vector<double> ranges, double angle_min = 0.0, double inc = 0.01) {
  LaserScan s;
  s.frame_id = "laser";
  s.angle_min = angle_min;
  s.angle_increment = inc;
  s.range_min = 0.05;
  s.range_max = 30.0;
  s.ranges = std::move(ranges);
  return s;
}

double max_deviation(const std::vector<Point2>& a, const std::vector<Point2>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::hypot(a[i].x - b[i].x, a[i].y - b[i].y));
  return m;
}

}  // namespace

TEST_CASE("straight lane") {
  VehicleParams p;
  auto lane = predict_lane(0.0, p, 10.0, 11);
  REQUIRE(lane.left.size() == 11);
  REQUIRE(lane.right.size() == 11);
  for (std::size_t k = 0; k < 11; ++k) {
    CHECK(lane.left[k].x == doctest::Approx(p.wheelbase + static_cast<double>(k)));
    CHECK(lane.left[k].y == p.track_width / 2);
    CHECK(lane.right[k].y == -p.track_width / 2);
  }
  CHECK(lane.swa_used == 0.0);
  CHECK(lane.horizon == 10.0);
}

TEST_CASE("curved lane matches the bicycle ODE") {
  VehicleParams p;
  const double delta = std::atan(p.wheelbase / 10.0);
  const double swa = delta * p.steering_ratio;
  auto lane = predict_lane(swa, p, 5.0, 51);
  const auto left = tod::testing::lane_edge_ode(delta, p.wheelbase, p.track_width / 2, 51, 100);
  const auto right = tod::testing::lane_edge_ode(delta, p.wheelbase, -p.track_width / 2, 51, 100);
  CHECK(max_deviation(lane.left, left) < 0.01);
  CHECK(max_deviation(lane.right, right) < 0.01);
  CHECK(max_deviation(lane.left, left) < 1e-6);
  CHECK(lane.left.front().x == doctest::Approx(p.wheelbase));
  CHECK(lane.left.front().y == doctest::Approx(p.track_width / 2));
}

TEST_CASE("lane edges keep their distance from the rotation centre") {
  VehicleParams p;
  for (double swa : {-7.5, -2.0, 0.5, 3.0, 8.0}) {
    auto lane = predict_lane(swa, p, 20.0, 41);
    const double R = p.wheelbase / std::tan(swa / p.steering_ratio);
    const double rl = std::hypot(lane.left.front().x, lane.left.front().y - R);
    const double rr = std::hypot(lane.right.front().x, lane.right.front().y - R);
    for (std::size_t k = 0; k < lane.left.size(); ++k) {
      CHECK(std::abs(std::hypot(lane.left[k].x, lane.left[k].y - R) - rl) < 1e-9);
      CHECK(std::abs(std::hypot(lane.right[k].x, lane.right[k].y - R) - rr) < 1e-9);
    }
    // The rear axle travels the horizon; each edge sweeps the same angle on its own radius.
    double arc_left = 0.0;
    for (std::size_t k = 1; k < lane.left.size(); ++k)
      arc_left += std::hypot(lane.left[k].x - lane.left[k - 1].x, lane.left[k].y - lane.left[k - 1].y);
    CHECK(arc_left == doctest::Approx(20.0 * rl / std::abs(R)).epsilon(1e-3));
  }
}

TEST_CASE("lane mirror symmetry and errors") {
  VehicleParams p;
  auto a = predict_lane(2.5, p, 15.0, 30);
  auto b = predict_lane(-2.5, p, 15.0, 30);
  for (std::size_t k = 0; k < a.left.size(); ++k) {
    CHECK(a.left[k].x == doctest::Approx(b.right[k].x).epsilon(1e-12));
    CHECK(a.left[k].y == doctest::Approx(-b.right[k].y).epsilon(1e-12));
  }
  CHECK_THROWS_AS(predict_lane(std::nan(""), p, 10, 10), Error);
  CHECK_THROWS_AS(predict_lane(0.0, p, 0.0, 10), Error);
  CHECK_THROWS_AS(predict_lane(0.0, p, 10.0, 1), Error);
}

TEST_CASE("pinhole projection") {
  TransformTree tree;
  // Camera optical frame: +Z forward along vehicle +X, +X right (vehicle -Y), +Y down (vehicle -Z).
  tree.add(Transform::from_rpy("vehicle", "camera", {1.5, 0.0, 1.2}, 0, 0, 0));
  tree.add(Transform::from_rpy("camera", "camera_optical", {0, 0, 0}, -std::numbers::pi / 2, 0, -std::numbers::pi / 2));
  CameraModel cam;
  cam.fx = cam.fy = 500;
  cam.cx = 320;
  cam.cy = 240;
  cam.width = 640;
  cam.height = 480;

  auto on_axis = project_points({{0, 0, 5}}, "camera_optical", cam, tree);
  CHECK(on_axis[0].u == doctest::Approx(320));
  CHECK(on_axis[0].v == doctest::Approx(240));
  CHECK(on_axis[0].visibility == Visibility::Visible);

  auto hand = project_points({{1, 0, 5}}, "camera_optical", cam, tree);
  CHECK(hand[0].u == doctest::Approx(420));
  CHECK(hand[0].v == doctest::Approx(240));

  CHECK(project_points({{0, 0, -1}}, "camera_optical", cam, tree)[0].visibility == Visibility::Culled);
  CHECK(project_points({{10, 0, 1}}, "camera_optical", cam, tree)[0].visibility == Visibility::Outside);

  // A point 6.5 m ahead of the vehicle at camera height lies on the optical axis.
  auto from_vehicle = project_points({{6.5, 0, 1.2}, {6.5, 1.0, 1.2}}, "vehicle", cam, tree);
  CHECK(from_vehicle[0].u == doctest::Approx(320));
  CHECK(from_vehicle[0].depth == doctest::Approx(5.0));
  CHECK(from_vehicle[1].u == doctest::Approx(220));  // left of the vehicle = left in the image

  CHECK_THROWS_AS(project_points({{0, 0, 1}}, "nowhere", cam, tree), Error);

  Gen g(11);
  for (int i = 0; i < 500; ++i) {
    const double u = g.real(0, 640), v = g.real(0, 480), z = g.real(0.2, 80);
    auto ip = project_points({back_project(u, v, z, cam)}, "camera_optical", cam, tree)[0];
    CHECK(std::abs(ip.u - u) < 1e-6);
    CHECK(std::abs(ip.v - v) < 1e-6);
  }
}

TEST_CASE("camera validation") {
  CameraModel cam;
  CHECK_NOTHROW(cam.validate());
  cam.cx = cam.width;
  CHECK_THROWS_AS(cam.validate(), Error);
}

TEST_CASE("clustering hand cases") {
  ClusterParams cp{0.3, 2};
  CHECK(cluster_scan(scan_of({kNoReturn, kNoReturn}), cp).objects.empty());

  // Two returns 0.1 m apart across neighbouring beams at the same range.
  const double r = 2.0;
  const double inc = 2 * std::asin(0.05 / r);
  auto out = cluster_scan(scan_of({r, r}, -inc / 2, inc), cp);
  REQUIRE(out.objects.size() == 1);
  CHECK(out.objects[0].point_count == 2);
  CHECK(out.objects[0].centroid_x == doctest::Approx(r * std::cos(inc / 2)));
  CHECK(out.objects[0].centroid_y == doctest::Approx(0.0));
  CHECK(out.frame_id == "laser");

  CHECK(cluster_scan(scan_of({r, r}, -inc / 2, inc), ClusterParams{0.3, 3}).objects.empty());
}

TEST_CASE("clustering matches the brute-force partition") {
  Gen g(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const auto scan = tod::testing::random_clustered_scan(g, 400);
    const double d = g.real(0.1, 1.0);
    const auto sp = scan_to_points(scan);
    const auto labels = label_components(sp.points, d);
    const auto oracle = tod::testing::brute_force_components(sp.points, d);
    std::vector<std::vector<std::size_t>> mine(oracle.size());
    REQUIRE(labels.size() == sp.points.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
      REQUIRE(labels[i] >= 0);
      REQUIRE(static_cast<std::size_t>(labels[i]) < mine.size());
      mine[static_cast<std::size_t>(labels[i])].push_back(i);
    }
    CHECK(mine == oracle);

    // Objects: same order, min_pts filter, centroid inside the box.
    const auto objs = cluster_scan(scan, {d, 3}).objects;
    std::size_t k = 0;
    for (const auto& comp : oracle) {
      if (comp.size() < 3) continue;
      REQUIRE(k < objs.size());
      CHECK(objs[k].point_count == comp.size());
      CHECK(objs[k].centroid_x >= objs[k].min_x);
      CHECK(objs[k].centroid_x <= objs[k].max_x);
      ++k;
    }
    CHECK(k == objs.size());
  }
}

TEST_CASE("clustering is independent of point order") {
  Gen g(5);
  for (int trial = 0; trial < 20; ++trial) {
    auto pts = scan_to_points(tod::testing::random_clustered_scan(g, 300)).points;
    const auto a = label_components(pts, 0.4);
    const std::size_t shift = pts.size() / 3;
    std::vector<Point2> rotated(pts.begin() + static_cast<long>(shift), pts.end());
    rotated.insert(rotated.end(), pts.begin(), pts.begin() + static_cast<long>(shift));
    const auto b = label_components(rotated, 0.4);
    // Same-component relation must agree for every pair.
    std::map<int, int> a_to_b, b_to_a;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const int lb = b[(i + pts.size() - shift) % pts.size()];
      CHECK(a_to_b.try_emplace(a[i], lb).first->second == lb);
      CHECK(b_to_a.try_emplace(lb, a[i]).first->second == a[i]);
    }
  }
}

TEST_CASE("grid construction") {
  GridSpec spec;
  spec.origin_x = 0.0;
  spec.origin_y = 0.0;
  spec.resolution = 0.2;
  spec.width = spec.height = 100;
  const Eigen::Isometry3d id = Eigen::Isometry3d::Identity();

  auto empty = build_grid(scan_of({kNoReturn, kNoReturn}), {1, 1, 0}, id, spec);
  CHECK(empty.grid.occupied_count() == 0);
  CHECK(empty.ignored == 0);

  auto one = build_grid(scan_of({5.0}), {1.0, 1.0, 0.0}, id, spec);
  CHECK(one.grid.occupied_count() == 1);
  CHECK(one.grid.occupied(30, 5));  // x = 6.0 on the 30/31 boundary -> 30, y = 1.0 -> 5

  auto boundary = build_grid(scan_of({0.4}), {0.2, 0.3, 0.0}, id, spec);
  CHECK(boundary.grid.occupied(3, 1));  // x = 0.6 exactly on a boundary goes to the higher cell

  auto outside = build_grid(scan_of({25.0, 1.0}, 0.0, 0.0), {1, 1, 0}, id, spec);
  CHECK(outside.ignored == 1);
  CHECK(outside.grid.occupied_count() == 1);

  Gen g(3);
  for (int t = 0; t < 20; ++t) {
    auto scan = tod::testing::random_clustered_scan(g, 500);
    const auto spec40 = centered_grid_spec(0.0, 0.0);
    auto r = build_grid(scan, {0, 0, 0.3}, id, spec40);
    std::size_t valid = 0;
    for (std::size_t i = 0; i < scan.ranges.size(); ++i) valid += scan.valid_beam(i);
    CHECK(r.grid.occupied_count() <= valid);
    auto again = r.grid;
    accumulate_scan(again, scan, {0, 0, 0.3}, id);
    CHECK(again == r.grid);
  }

  spec.resolution = 0.0;
  CHECK_THROWS_AS(build_grid(scan_of({1.0}), {}, id, spec), Error);
}

TEST_CASE("centered grid spec") {
  auto s = centered_grid_spec(3.05, -1.0, 40.0, 0.2);
  CHECK(s.width == 200);
  CHECK(s.height == 200);
  CHECK(s.origin_x <= 3.05 - 20.0);
  CHECK(s.origin_x + s.width * s.resolution >= 3.05 + 19.8);
}

TEST_CASE("stream controller") {
  AdaptParams ap;
  StreamConfig cfg;
  cfg.mode = StreamMode::Automatic;
  cfg.bitrate_bps = 4e6;
  net::LinkStats st;
  int streak = 0;

  SUBCASE("ample bandwidth keeps the config") {
    st.delivered_bytes_per_s = 500'000;
    CHECK(adapt_stream(st, cfg, ap, streak) == cfg);
  }
  SUBCASE("half capacity steps one rung down") {
    st.delivered_bytes_per_s = 250'000;
    st.capacity_bytes_per_s = 250'000;
    auto out = adapt_stream(st, cfg, ap, streak);
    CHECK(out.bitrate_bps == 2.5e6);
    out = adapt_stream(st, out, ap, streak);
    CHECK(out.bitrate_bps == 1.5e6);
    st.delivered_bytes_per_s = 187'500;
    for (int i = 0; i < 10; ++i) CHECK(adapt_stream(st, out, ap, streak).bitrate_bps == 1.5e6);
  }
  SUBCASE("saturates at the lowest rung") {
    cfg.bitrate_bps = 0.5e6;
    st.delivered_bytes_per_s = 1000;
    CHECK(adapt_stream(st, cfg, ap, streak).bitrate_bps == 0.5e6);
  }
  SUBCASE("steps up after the cooldown") {
    cfg.bitrate_bps = 1.5e6;
    st.delivered_bytes_per_s = 187'500;
    st.capacity_bytes_per_s = 1e6;
    CHECK(adapt_stream(st, cfg, ap, streak).bitrate_bps == 1.5e6);
    CHECK(adapt_stream(st, cfg, ap, streak).bitrate_bps == 1.5e6);
    CHECK(adapt_stream(st, cfg, ap, streak).bitrate_bps == 2.5e6);
    CHECK(streak == 0);
  }
  SUBCASE("manual mode never changes") {
    cfg.mode = StreamMode::Manual;
    st.delivered_bytes_per_s = 0;
    CHECK(adapt_stream(st, cfg, ap, streak) == cfg);
  }
  SUBCASE("one rung per call at most") {
    Gen g(8);
    cfg.bitrate_bps = 4e6;
    for (int i = 0; i < 500; ++i) {
      st.delivered_bytes_per_s = g.real(0, 2e6);
      st.capacity_bytes_per_s = g.coin() ? std::optional<double>(g.real(0, 2e6)) : std::nullopt;
      auto out = adapt_stream(st, cfg, ap, streak);
      auto idx = [&](double b) { return std::find(ap.ladder.begin(), ap.ladder.end(), b) - ap.ladder.begin(); };
      CHECK(std::abs(idx(out.bitrate_bps) - idx(cfg.bitrate_bps)) <= 1);
      cfg = out;
    }
  }
}

TEST_CASE("stream config validation") {
  StreamConfig c;
  CHECK(c.frame_size_bytes() == 12500);
  c.crop = {900, 0, 100, 100};
  CHECK_THROWS_AS(c.validate(), Error);
  c = StreamConfig{};
  c.bitrate_bps = 40e6;
  CHECK_THROWS_AS(c.validate(), Error);
  AdaptParams ap;
  ap.ladder = {2e6, 1e6};
  CHECK_THROWS_AS(ap.validate(), Error);
}
