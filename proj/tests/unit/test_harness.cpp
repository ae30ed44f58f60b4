#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "tod/core/error.hpp"
#include "tod/harness/log.hpp"
#include "tod/harness/runner.hpp"
#include "tod/harness/scenario.hpp"

using namespace tod;
using namespace tod::harness;

namespace {

const std::string kScenarios = std::string(TOD_SOURCE_DIR) + "/scenarios";

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::Aborted;
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

op::LogRow row(double t, double swa, double v, Gear g = Gear::Drive) {
  op::LogRow r;
  r.t_ns = static_cast<std::int64_t>(std::llround(t * 1e9));
  r.desired_swa = swa;
  r.actual_swa = swa;
  r.desired_v = v;
  r.actual_v = v;
  r.gear = g;
  return r;
}

const char* kStepScenario = R"(name step
world open_field.world
duration 6
seed 5
vehicle.steer_delay 0.04
uplink delay 0 jitter 0 loss 0
downlink delay 0 jitter 0 loss 0
at 0 gear park speed 0 swa 0
at 1 gear drive
at 2 swa 0
at 2.001 swa 1
at 6 swa 1
)";

}  // namespace

TEST_CASE("bundled lane change scenario loads") {
  const Scenario s = load_scenario(kScenarios + "/lane_change.scenario");
  CHECK(s.name == "lane_change");
  CHECK(s.duration == doctest::Approx(100.0));
  CHECK(s.seed == 7);
  REQUIRE(s.streams.size() == 1);
  CHECK(s.streams[0].camera_id == "front");
  REQUIRE(s.sensors.size() == 1);
  CHECK(s.sensors[0].name == "laser");
  CHECK(!s.world.segments.empty());
  CHECK(!s.world.circles.empty());
}

TEST_CASE("every bundled scenario validates") {
  for (const auto& entry : std::filesystem::directory_iterator(kScenarios)) {
    if (entry.path().extension() != ".scenario") continue;
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(load_scenario(entry.path().string()));
  }
}

TEST_CASE("scenario errors") {
  SUBCASE("missing world names the path") {
    const auto f = [] { parse_scenario("name x\nworld nowhere.world\nduration 1\nat 0 speed 0\n", "/tmp/none"); };
    CHECK(code_of(f) == ErrorCode::Io);
    CHECK(message_of(f).find("/tmp/none/nowhere.world") != std::string::npos);
  }
  SUBCASE("decreasing trace timestamps") {
    const auto f = [] {
      parse_scenario("name x\nworld open_field.world\nduration 5\nat 2 speed 1\nat 1 speed 0\n", kScenarios);
    };
    CHECK(code_of(f) == ErrorCode::Validation);
  }
  SUBCASE("unknown key reports its line") {
    const auto f = [] { parse_scenario("name x\nworld open_field.world\nbogus 1\n", kScenarios); };
    CHECK(code_of(f) == ErrorCode::Parse);
    CHECK(message_of(f).find("3") != std::string::npos);
  }
  SUBCASE("bad vehicle parameter") {
    const auto f = [] {
      parse_scenario("name x\nworld open_field.world\nduration 5\nvehicle.wheelbase -1\nat 0 speed 0\n", kScenarios);
    };
    CHECK(code_of(f) == ErrorCode::Validation);
    CHECK(message_of(f).find("wheelbase") != std::string::npos);
  }
  SUBCASE("missing scenario file") {
    CHECK(code_of([] { load_scenario(std::string(TOD_SOURCE_DIR) + "/README.md/x.scenario"); }) == ErrorCode::Io);
  }
  SUBCASE("interactive scenarios do not run headless") {
    Scenario s = parse_scenario("name x\nworld open_field.world\nduration 1\ninteractive 1\n", kScenarios);
    CHECK(code_of([&] { run_scenario(s); }) == ErrorCode::Validation);
  }
}

TEST_CASE("trace interpolation") {
  CommandTrace tr;
  TraceKey a;
  a.t = 0;
  a.swa = 0;
  a.speed = 0;
  a.gear = Gear::Park;
  TraceKey b;
  b.t = 2;
  b.swa = 1;
  b.speed = 4;
  b.gear = Gear::Drive;
  TraceKey c;
  c.t = 4;
  c.estop = true;
  tr.keys = {a, b, c};

  CHECK(tr.at(1).swa == doctest::Approx(0.5));
  CHECK(tr.at(1).speed == doctest::Approx(2.0));
  CHECK(tr.at(1).gear == Gear::Park);
  CHECK(tr.at(2).gear == Gear::Drive);
  CHECK(tr.at(3).swa == doctest::Approx(1.0));
  CHECK(tr.at(3).speed == doctest::Approx(4.0));
  CHECK_FALSE(tr.at(3.9).estop);
  CHECK(tr.at(4).estop);
  CHECK(tr.at(100).speed == doctest::Approx(4.0));
  CHECK(tr.at(-1).swa == doctest::Approx(0.0));

  tr.sine = SineSwa{2.0, 0.25, 1.0};
  CHECK(tr.at(0.5).swa == doctest::Approx(0.0));
  CHECK(tr.at(1.5).swa == doctest::Approx(2.0 * std::sin(M_PI / 4)));
  CHECK(tr.at(2.0).swa == doctest::Approx(2.0));
}

TEST_CASE("csv export") {
  SUBCASE("empty table is the header alone") { CHECK(format_csv({}) == std::string(kLogHeader) + "\n"); }
  SUBCASE("one row") {
    const std::string csv = format_csv({row(0.02, 0.5, 1.25)});
    CHECK(csv == std::string(kLogHeader) + "\n0.020000,0.500000,0.500000,1.250000,1.250000,drive,0,normal\n");
  }
  SUBCASE("negative zero prints as zero") {
    CHECK(format_csv({row(0, -0.0, -1e-9)}).find("-0.000000") == std::string::npos);
  }
  SUBCASE("parse and re-export is byte identical") {
    LogTable t;
    for (int i = 0; i < 200; ++i) {
      auto r = row(i * 0.02, std::sin(i * 0.1), i * 0.01, i < 50 ? Gear::Park : Gear::Drive);
      r.mode = i % 37 == 0 ? DriveMode::SafeStop : DriveMode::Normal;
      r.estop = i == 150;
      t.push_back(r);
    }
    const std::string once = format_csv(t);
    CHECK(format_csv(parse_csv(once)) == once);
  }
  SUBCASE("file round trip") {
    const auto path = std::filesystem::temp_directory_path() / "tod_test_log.csv";
    export_logs({row(0, 0, 0), row(0.02, 0.1, 0.2)}, path.string());
    CHECK(read_log(path.string()).size() == 2);
    std::filesystem::remove(path);
  }
  SUBCASE("unwritable path") {
    CHECK(code_of([] { export_logs({}, std::string(TOD_SOURCE_DIR) + "/README.md/log.csv"); }) == ErrorCode::Io);
  }
}

TEST_CASE("csv parse errors") {
  const std::string h = std::string(kLogHeader) + "\n";
  CHECK(code_of([&] { parse_csv("t,x\n"); }) == ErrorCode::Parse);
  CHECK(code_of([&] { parse_csv(h + "0,0,0,0,0,park,0\n"); }) == ErrorCode::Parse);
  CHECK(code_of([&] { parse_csv(h + "0,0,0,0,0,fly,0,normal\n"); }) == ErrorCode::Parse);
  CHECK(code_of([&] { parse_csv(h + "0,0,0,0,0,park,2,normal\n"); }) == ErrorCode::Parse);
  CHECK(code_of([&] { parse_csv(h + "0,0,0,0,x,park,0,normal\n"); }) == ErrorCode::Parse);
  const auto dup = [&] { parse_csv(h + "0.1,0,0,0,0,park,0,normal\n0.1,0,0,0,0,park,0,normal\n"); };
  CHECK(code_of(dup) == ErrorCode::Parse);
  CHECK(message_of(dup).find("3") != std::string::npos);
  CHECK(parse_csv(h).empty());
}

TEST_CASE("summary") {
  LogTable t = {row(0, 0, 0, Gear::Park), row(0.02, 0, 0, Gear::Drive), row(0.04, 0.3, 2.0, Gear::Drive),
                row(0.06, -0.4, 2.0, Gear::Reverse)};
  t[3].mode = DriveMode::SafeStop;
  const LogSummary s = summarize(t);
  CHECK(s.rows == 4);
  CHECK(s.duration_s == doctest::Approx(0.06));
  CHECK(s.command_period_s == doctest::Approx(0.02));
  CHECK(s.peak_actual_v == doctest::Approx(2.0));
  CHECK(s.max_abs_swa == doctest::Approx(0.4));
  CHECK(s.safe_stop_rows == 1);
  CHECK(s.moving_gear_changes == 1);
  const std::string text = format_report(s);
  CHECK(text.find("rows: 4") != std::string::npos);
  CHECK(text.find("actuation_latency_ms: undefined") != std::string::npos);
}

TEST_CASE("zero-delay step shows only the steering delay") {
  const Scenario s = parse_scenario(kStepScenario, kScenarios);
  const RunResult r = run_scenario(s);
  REQUIRE_FALSE(r.aborted);
  const auto& log = r.log;
  std::optional<double> first_desired, first_actual;
  for (const auto& row : log) {
    const double t = row.t_ns * 1e-9;
    if (!first_desired && row.desired_swa > 0.5) first_desired = t;
    if (!first_actual && row.actual_swa > 0.5) first_actual = t;
    CHECK(row.actual_swa <= 1.0 + 1e-12);
  }
  REQUIRE(first_desired);
  REQUIRE(first_actual);
  const double shift = *first_actual - *first_desired;
  // One state period of sampling on top of the delay.
  CHECK(shift >= 0.04 - 1e-9);
  CHECK(shift <= 0.04 + 0.02 + 1e-9);
  CHECK(log.back().actual_swa == doctest::Approx(1.0));
}

TEST_CASE("runs are deterministic in the seed") {
  Scenario s = load_scenario(kScenarios + "/watchdog.scenario");
  s.uplink.jitter = 0.01;
  s.downlink.jitter = 0.01;
  const std::string a = format_csv(run_scenario(s).log);
  const std::string b = format_csv(run_scenario(s).log);
  CHECK(a == b);
  RunOptions other;
  other.seed = 99;
  CHECK(format_csv(run_scenario(s, other).log) != a);
}
