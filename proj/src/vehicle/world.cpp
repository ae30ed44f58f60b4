#include "tod/vehicle/world.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "tod/core/error.hpp"
#include "tod/core/transform.hpp"

namespace tod::vehicle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool finite_all(std::initializer_list<double> values) {
  for (double v : values)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace

void World::validate() const {
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    if (!finite_all({s.x1, s.y1, s.x2, s.y2}))
      throw Error(ErrorCode::Validation, "world.segments[" + std::to_string(i) + "] is not finite");
    if (s.x1 == s.x2 && s.y1 == s.y2)
      throw Error(ErrorCode::Validation, "world.segments[" + std::to_string(i) + "] has zero length");
  }
  for (std::size_t i = 0; i < circles.size(); ++i) {
    const auto& c = circles[i];
    if (!finite_all({c.cx, c.cy, c.r}) || c.r <= 0.0)
      throw Error(ErrorCode::Validation, "world.circles[" + std::to_string(i) + "] needs finite centre and r > 0");
  }
  if (!finite_all({bounds.min_x, bounds.min_y, bounds.max_x, bounds.max_y}) || bounds.max_x <= bounds.min_x ||
      bounds.max_y <= bounds.min_y)
    throw Error(ErrorCode::Validation, "world.bounds is empty or not finite");
}

World parse_world(const std::string& text) {
  World w;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string kind;
    if (!(ls >> kind)) continue;
    auto fail = [&](const std::string& why) {
      throw Error(ErrorCode::Parse, "world line " + std::to_string(lineno) + ": " + why);
    };
    std::vector<double> v;
    double x;
    while (ls >> x) v.push_back(x);
    if (!ls.eof()) fail("expected a number");
    if (kind == "segment") {
      if (v.size() != 4) fail("segment takes 4 numbers");
      w.segments.push_back({v[0], v[1], v[2], v[3]});
    } else if (kind == "circle") {
      if (v.size() != 3) fail("circle takes 3 numbers");
      w.circles.push_back({v[0], v[1], v[2]});
    } else if (kind == "bounds") {
      if (v.size() != 4) fail("bounds takes 4 numbers");
      w.bounds = {v[0], v[1], v[2], v[3]};
    } else {
      fail("unknown record '" + kind + "'");
    }
  }
  w.validate();
  return w;
}

World load_world(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::Io, "cannot read world file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_world(ss.str());
}

std::size_t ScanParams::beam_count() const {
  validate();
  const double n = (angle_max - angle_min) / angle_increment;
  return static_cast<std::size_t>(std::llround(n)) + 1;
}

void ScanParams::validate() const {
  if (!finite_all({angle_min, angle_max, angle_increment, range_min, range_max, rate_hz}))
    throw Error(ErrorCode::Validation, "scan parameters must be finite");
  if (angle_max <= angle_min) throw Error(ErrorCode::Validation, "scan.angle_max must exceed angle_min");
  if (angle_increment <= 0.0) throw Error(ErrorCode::Validation, "scan.angle_increment must be > 0");
  if (range_min < 0.0 || range_max <= range_min) throw Error(ErrorCode::Validation, "scan range limits invalid");
  if (rate_hz <= 0.0) throw Error(ErrorCode::Validation, "scan.rate must be > 0");
  const double n = (angle_max - angle_min) / angle_increment;
  if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n))
    throw Error(ErrorCode::Validation, "scan field of view is not a whole number of increments");
  if (n + 1 > 65535) throw Error(ErrorCode::Validation, "scan has more than 65535 beams");
}

double ray_segment(double ox, double oy, double dx, double dy, const Segment& s, double t_min) noexcept {
  const double ex = s.x2 - s.x1, ey = s.y2 - s.y1;
  const double denom = dx * ey - dy * ex;
  if (denom == 0.0) return kInf;  // parallel; grazing hits are ignored
  const double wx = s.x1 - ox, wy = s.y1 - oy;
  const double t = (wx * ey - wy * ex) / denom;
  const double u = (wx * dy - wy * dx) / denom;
  if (t < t_min || u < 0.0 || u > 1.0) return kInf;
  return t;
}

double ray_circle(double ox, double oy, double dx, double dy, const Circle& c, double t_min) noexcept {
  const double wx = c.cx - ox, wy = c.cy - oy;
  const double b = wx * dx + wy * dy;
  const double disc = b * b - (wx * wx + wy * wy - c.r * c.r);
  if (disc < 0.0) return kInf;
  const double root = std::sqrt(disc);
  if (b - root >= t_min) return b - root;
  if (b + root >= t_min) return b + root;
  return kInf;
}

LaserScan scan_world(const Pose2D& pose, const World& world, const ScanParams& sp,
                     const Eigen::Isometry3d& sensor_in_vehicle, std::uint64_t stamp_ns) {
  const std::size_t n = sp.beam_count();
  const Pose2D sensor = isometry_to_pose2d(pose_to_isometry(pose) * sensor_in_vehicle);
  LaserScan scan;
  scan.frame_id = sp.frame_id;
  scan.angle_min = sp.angle_min;
  scan.angle_increment = sp.angle_increment;
  scan.range_min = sp.range_min;
  scan.range_max = sp.range_max;
  scan.stamp_ns = stamp_ns;
  scan.ranges.assign(n, kNoReturn);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = sensor.yaw + scan.beam_angle(i);
    const double dx = std::cos(a), dy = std::sin(a);
    double best = kInf;
    for (const auto& s : world.segments) best = std::min(best, ray_segment(sensor.x, sensor.y, dx, dy, s, sp.range_min));
    for (const auto& c : world.circles) best = std::min(best, ray_circle(sensor.x, sensor.y, dx, dy, c, sp.range_min));
    if (best <= sp.range_max) scan.ranges[i] = best;
  }
  return scan;
}

}  // namespace tod::vehicle
