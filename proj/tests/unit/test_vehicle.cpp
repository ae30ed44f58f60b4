#include <cmath>
#include <numbers>

#include "doctest.h"
#include "tod/core/error.hpp"
#include "tod/core/transform.hpp"
#include "tod/vehicle/frames.hpp"
#include "tod/vehicle/plant.hpp"
#include "tod/vehicle/world.hpp"

using namespace tod;
using namespace tod::vehicle;

namespace {

Actuation drive(double swa, double v, Gear gear = Gear::Drive) {
  Actuation a;
  a.swa_setpoint = swa;
  a.velocity_setpoint = v;
  a.gear = gear;
  return a;
}

VehicleState moving(double v, Gear gear = Gear::Drive, double swa = 0.0) {
  VehicleState s;
  s.velocity = v;
  s.gear = gear;
  s.swa = swa;
  return s;
}

}  // namespace

TEST_CASE("straight line at constant speed") {
  VehicleParams p;
  Plant plant(p);
  plant.reset(moving(5.0));
  for (int i = 0; i < 1000; ++i) plant.step(drive(0.0, 5.0), 0.001);
  CHECK(std::abs(plant.state().pose.x - 5.0) < 1e-6);
  CHECK(plant.state().pose.yaw == 0.0);
  CHECK(plant.state().pose.y == 0.0);
}

TEST_CASE("constant steering traces a 10 m circle") {
  VehicleParams p;
  p.steer_delay = 0.0;
  const double swa = p.steering_ratio * std::atan(p.wheelbase / 10.0);
  Plant plant(p);
  plant.reset(moving(5.0, Gear::Drive, swa));
  const double period = 2 * std::numbers::pi * 10.0 / 5.0;
  const int steps = static_cast<int>(std::round(period / 0.001));
  double sum_r = 0.0, max_err = 0.0;
  for (int i = 0; i < steps; ++i) {
    plant.step(drive(swa, 5.0), 0.001);
    const auto& q = plant.state().pose;
    const double r = std::hypot(q.x, q.y - 10.0);
    sum_r += r;
    max_err = std::max(max_err, std::abs(r - 10.0));
  }
  CHECK(sum_r / steps == doctest::Approx(10.0).epsilon(0.005));
  CHECK(max_err < 0.05);
  // Back near the start after one revolution.
  CHECK(std::hypot(plant.state().pose.x, plant.state().pose.y) < 0.1);
}

TEST_CASE("negative steering mirrors the trajectory") {
  VehicleParams p;
  Plant a(p), b(p);
  a.reset(moving(1.0));
  b.reset(moving(1.0));
  for (int i = 0; i < 3000; ++i) {
    const double swa = 3.0 * std::sin(i * 0.002);
    a.step(drive(swa, 4.0), 0.001);
    b.step(drive(-swa, 4.0), 0.001);
    REQUIRE(std::abs(a.state().pose.x - b.state().pose.x) <= 1e-9);
    REQUIRE(std::abs(a.state().pose.y + b.state().pose.y) <= 1e-9);
    REQUIRE(std::abs(a.state().pose.yaw + b.state().pose.yaw) <= 1e-9);
  }
}

TEST_CASE("steering is a pure delay") {
  VehicleParams p;
  p.steer_delay = 0.04;
  Plant plant(p);
  plant.reset(moving(0.0));
  std::vector<double> swa;
  for (int i = 0; i < 300; ++i) {
    const double set = i >= 200 ? -1.0 : (i >= 100 ? 1.5 : 0.0);
    plant.step(drive(set, 0.0), 0.001);
    swa.push_back(plant.state().swa);
  }
  // Setpoint changed at the start of step 100 (t = 0.100 s); index i holds t = (i + 1) ms.
  for (int i = 0; i < 139; ++i) CHECK(swa[i] == 0.0);
  for (int i = 139; i < 239; ++i) CHECK(swa[i] == 1.5);
  for (int i = 239; i < 300; ++i) CHECK(swa[i] == -1.0);
}

TEST_CASE("velocity follows a first-order lag") {
  VehicleParams p;
  Plant plant(p);
  for (int i = 0; i < 400; ++i) plant.step(drive(0.0, 4.0), 0.001);
  CHECK(plant.state().velocity == doctest::Approx(4.0 * (1 - std::exp(-1.0))).epsilon(1e-9));
}

TEST_CASE("velocity gate by gear and sign") {
  VehicleParams p;
  for (auto [gear, set] : std::vector<std::pair<Gear, double>>{
           {Gear::Park, 3.0}, {Gear::Neutral, 3.0}, {Gear::Drive, -2.0}, {Gear::Reverse, 2.0}}) {
    Plant plant(p);
    for (int i = 0; i < 500; ++i) plant.step(drive(0.0, set, gear), 0.001);
    CHECK(plant.state().velocity == 0.0);
  }
  Plant rev(p);
  for (int i = 0; i < 2000; ++i) rev.step(drive(0.0, -2.0, Gear::Reverse), 0.001);
  CHECK(rev.state().velocity < -1.9);
  CHECK(rev.state().pose.x < 0.0);
}

TEST_CASE("safe stop brakes at max_decel to exactly zero") {
  VehicleParams p;
  Plant plant(p);
  plant.reset(moving(4.0));
  int steps = 0;
  while (plant.state().velocity > 0.0) {
    const double before = plant.state().velocity;
    plant.step(drive(0.0, 4.0), 0.001, DriveMode::SafeStop);
    CHECK(before - plant.state().velocity <= p.max_decel * 0.001 + 1e-12);
    ++steps;
    REQUIRE(steps < 10000);
  }
  CHECK(plant.state().velocity == 0.0);
  CHECK(steps * 0.001 <= 4.0 / p.max_decel + 0.002);
  CHECK(plant.state().mode == DriveMode::SafeStop);
}

TEST_CASE("plant rejects out-of-range steps") {
  Plant plant(VehicleParams{});
  CHECK_THROWS_AS(plant.step(drive(0, 0), 0.0), Error);
  CHECK_THROWS_AS(plant.step(drive(0, 0), 0.06), Error);
}

TEST_CASE("bridge rule table") {
  VehicleParams p;
  PrimaryCommand pc{1.0, 3.0, 9, 100};
  SecondaryCommand sc;

  SUBCASE("gear change refused while moving") {
    sc.gear = Gear::Park;
    auto a = ingest_command(pc, sc, moving(3.0, Gear::Drive), p, 5);
    CHECK(a.gear == Gear::Drive);
    CHECK(a.velocity_setpoint == 3.0);
    CHECK(a.source_seq == 9);
    CHECK(a.applied_at_ns == 5);
  }
  SUBCASE("gear change honored at standstill") {
    sc.gear = Gear::Drive;
    auto a = ingest_command(pc, sc, moving(0.05, Gear::Park), p, 0);
    CHECK(a.gear == Gear::Drive);
    CHECK(a.velocity_setpoint == 3.0);
  }
  SUBCASE("estop overrides velocity") {
    sc.gear = Gear::Drive;
    sc.estop_engaged = true;
    auto a = ingest_command(pc, sc, moving(3.0, Gear::Drive), p, 0);
    CHECK(a.velocity_setpoint == 0.0);
    CHECK(a.estop_engaged);
  }
  SUBCASE("sign gate") {
    sc.gear = Gear::Drive;
    pc.desired_velocity = -2.0;
    auto a = ingest_command(pc, sc, moving(0.0, Gear::Drive), p, 0);
    CHECK(a.velocity_setpoint == 0.0);
  }
  SUBCASE("clamped to limits") {
    sc.gear = Gear::Drive;
    pc.desired_swa = 100.0;
    pc.desired_velocity = 100.0;
    auto a = ingest_command(pc, sc, moving(0.0, Gear::Drive), p, 0);
    CHECK(a.swa_setpoint == p.max_swa);
    CHECK(a.velocity_setpoint == p.max_speed);
  }
  SUBCASE("non-finite rejected") {
    pc.desired_velocity = std::nan("");
    CHECK_THROWS_AS(ingest_command(pc, sc, moving(0.0), p, 0), Error);
  }
}

TEST_CASE("watchdog") {
  VehicleParams p;
  const std::int64_t ms = 1'000'000;
  CHECK(watchdog_check(0, 400 * ms, p) == DriveMode::Normal);
  CHECK(watchdog_check(0, 600 * ms, p) == DriveMode::SafeStop);

  Watchdog w(p.command_timeout);
  CHECK(w.update(std::nullopt, 0, 0.0, false) == DriveMode::SafeStop);
  CHECK(w.update(0, 10 * ms, 0.0, false) == DriveMode::Normal);
  CHECK(w.update(0, 400 * ms, 2.0, false) == DriveMode::Normal);
  CHECK(w.update(0, 600 * ms, 2.0, false) == DriveMode::SafeStop);
  // Commands resume while still rolling: latched.
  CHECK(w.update(1000 * ms, 1010 * ms, 2.0, false) == DriveMode::SafeStop);
  CHECK(w.update(1400 * ms, 1410 * ms, 0.5, false) == DriveMode::SafeStop);
  CHECK(w.update(1800 * ms, 1810 * ms, 0.0, false) == DriveMode::Normal);
  CHECK(w.update(1800 * ms, 1820 * ms, 0.0, true) == DriveMode::SafeStop);
}

TEST_CASE("scan params beam count") {
  ScanParams sp;
  CHECK(sp.beam_count() == 1081);
  sp.angle_increment = 0.0173;
  CHECK_THROWS_AS(sp.beam_count(), Error);
  sp = ScanParams{};
  sp.angle_max = sp.angle_min;
  CHECK_THROWS_AS(sp.validate(), Error);
}

TEST_CASE("raycasting") {
  ScanParams sp;
  sp.angle_min = -std::numbers::pi / 2;
  sp.angle_max = std::numbers::pi / 2;
  sp.angle_increment = std::numbers::pi / 180;
  const Eigen::Isometry3d at_origin = Eigen::Isometry3d::Identity();

  World empty;
  auto s0 = scan_world({}, empty, sp, at_origin);
  REQUIRE(s0.ranges.size() == 181);
  for (double r : s0.ranges) CHECK(r == kNoReturn);

  World wall;
  wall.segments.push_back({5.0, -20.0, 5.0, 20.0});
  auto s1 = scan_world({}, wall, sp, at_origin);
  CHECK(std::abs(s1.ranges[90] - 5.0) < 1e-9);
  // Beam at 30 deg: 5 / cos(30 deg).
  CHECK(std::abs(s1.ranges[120] - 5.0 / std::cos(std::numbers::pi / 6)) < 1e-9);

  // Sensor mounted 1 m ahead of the reference point.
  Eigen::Isometry3d fwd = Eigen::Isometry3d::Identity();
  fwd.translation() = Eigen::Vector3d(1.0, 0.0, 0.0);
  CHECK(std::abs(scan_world({}, wall, sp, fwd).ranges[90] - 4.0) < 1e-9);
  // Vehicle yawed 90 deg: the wall is no longer ahead.
  CHECK(scan_world({0, 0, std::numbers::pi / 2}, wall, sp, at_origin).ranges[90] == kNoReturn);

  // Circle tangent to the 0 rad beam.
  World tangent;
  tangent.circles.push_back({5.0, 1.0, 1.0});
  auto s2 = scan_world({}, tangent, sp, at_origin);
  CHECK(std::abs(s2.ranges[90] - 5.0) < 1e-9);

  World ring;
  ring.circles.push_back({8.0, 0.0, 1.0});
  CHECK(std::abs(scan_world({}, ring, sp, at_origin).ranges[90] - 7.0) < 1e-9);

  // Beyond range_max: no return.
  World far;
  far.segments.push_back({40.0, -1.0, 40.0, 1.0});
  CHECK(scan_world({}, far, sp, at_origin).ranges[90] == kNoReturn);

  CHECK(scan_world({1, 2, 0.3}, wall, sp, fwd) == scan_world({1, 2, 0.3}, wall, sp, fwd));
}

TEST_CASE("world file parsing") {
  auto w = parse_world("# course\nbounds -10 -10 10 10\nsegment 0 0 1 0  # edge\ncircle 3 3 0.5\n\n");
  CHECK(w.segments.size() == 1);
  CHECK(w.circles.size() == 1);
  CHECK(w.bounds.max_x == 10.0);
  try {
    parse_world("segment 0 0 1 0\ncircle 1 1\n");
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Parse);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_world("segment 1 1 1 1\n"), Error);
  CHECK_THROWS_AS(parse_world("cube 1 1\n"), Error);
  CHECK_THROWS_AS(load_world("/nonexistent/world.txt"), Error);
}

TEST_CASE("synthetic frames") {
  perception::StreamConfig cfg;
  cfg.bitrate_bps = 4e6;
  cfg.framerate_hz = 40.0;
  FrameStream stream(cfg);
  auto f1 = stream.next({}, 100);
  REQUIRE(f1);
  CHECK(f1->simulated_size_bytes == 12500);
  CHECK(f1->seq == 1);
  CHECK(f1->stamp_ns == 100);
  CHECK(f1->width == 928);
  CHECK(stream.next({}, 200)->seq == 2);

  cfg.scaling = 0.5;
  stream.reconfigure(cfg);
  auto f3 = stream.next({}, 300);
  CHECK(f3->width == 464);
  CHECK(f3->height == 260);
  CHECK(f3->simulated_size_bytes == 12500);

  cfg.paused = true;
  stream.reconfigure(cfg);
  CHECK_FALSE(stream.next({}, 400).has_value());

  CHECK(generate_frame({1, 2, 3}, cfg, 0, 5) == generate_frame({1, 2, 3}, cfg, 0, 5));
  CHECK(generate_frame({1, 2, 3}, cfg, 0, 5).digest != generate_frame({1, 2, 3}, cfg, 0, 6).digest);

  cfg.scaling = 0.0;
  CHECK_THROWS_AS(stream.reconfigure(cfg), Error);
}
