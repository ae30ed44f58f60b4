#pragma once

#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Geometry>

#include "tod/core/types.hpp"

namespace tod::vehicle {

struct Segment {
  double x1 = 0.0, y1 = 0.0, x2 = 0.0, y2 = 0.0;
};

struct Circle {
  double cx = 0.0, cy = 0.0, r = 0.0;
};

struct Bounds {
  double min_x = -1e6, min_y = -1e6, max_x = 1e6, max_y = 1e6;

  bool contains(double x, double y) const noexcept { return x >= min_x && x <= max_x && y >= min_y && y <= max_y; }
};

/// Static obstacles in the world frame.
struct World {
  std::vector<Segment> segments;
  std::vector<Circle> circles;
  Bounds bounds;

  /// Throws Error(Validation) on non-finite values, zero-length segments,
  /// non-positive radii or an empty bounds rectangle.
  void validate() const;
};

/// Parses `segment x1 y1 x2 y2`, `circle cx cy r` and `bounds x0 y0 x1 y1`
/// records; `#` starts a comment. Throws Error(Parse) with the line number.
World parse_world(const std::string& text);
/// Throws Error(Io) when the file cannot be read.
World load_world(const std::string& path);

struct ScanParams {
  std::string frame_id = "laser";
  double angle_min = -0.75 * std::numbers::pi;
  double angle_max = 0.75 * std::numbers::pi;
  double angle_increment = std::numbers::pi / 720.0;  // 1081 beams
  double range_min = 0.1;
  double range_max = 30.0;
  double rate_hz = 20.0;

  /// (angle_max - angle_min) / increment + 1. Throws Error(Validation) when
  /// that is not integral within 1e-9 or the limits are inconsistent.
  std::size_t beam_count() const;
  void validate() const;
};

/// Raycasts every beam against the world. `sensor_in_vehicle` is the sensor
/// pose in the vehicle frame; only its planar part is used.
LaserScan scan_world(const Pose2D& pose, const World& world, const ScanParams& sp,
                     const Eigen::Isometry3d& sensor_in_vehicle, std::uint64_t stamp_ns = 0);

/// Nearest ray hit distance t >= t_min (ray origin o, unit direction d), or
/// +inf.
double ray_segment(double ox, double oy, double dx, double dy, const Segment& s, double t_min) noexcept;
double ray_circle(double ox, double oy, double dx, double dy, const Circle& c, double t_min) noexcept;

}  // namespace tod::vehicle
