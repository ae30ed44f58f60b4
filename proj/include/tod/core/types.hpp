#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

namespace tod {

/// Wraps an angle into (-pi, pi].
double normalize_angle(double angle) noexcept;

struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;

  bool operator==(const Pose2D&) const = default;
};

/// Physical limits and response constants of the driven vehicle. All lengths
/// in meters, angles in radians, times in seconds.
struct VehicleParams {
  double wheelbase = 2.9;
  double track_width = 1.7;
  double steering_ratio = 16.0;
  double max_swa = 8.0;
  double max_speed = 10.0;
  double max_decel = 6.0;
  double steer_delay = 0.04;
  double velocity_tau = 0.4;
  double command_timeout = 0.5;

  /// Throws Error(Validation) naming the first offending field.
  void validate() const;

  double road_wheel_angle(double swa) const noexcept { return swa / steering_ratio; }
};

enum class Gear : std::uint8_t { Park = 0, Reverse = 1, Neutral = 2, Drive = 3 };
enum class Indicator : std::uint8_t { Off = 0, Left = 1, Right = 2, Hazard = 3 };
enum class DriveMode : std::uint8_t { Normal = 0, SafeStop = 1 };

std::string_view to_string(Gear gear) noexcept;
std::string_view to_string(Indicator indicator) noexcept;
std::string_view to_string(DriveMode mode) noexcept;
bool parse_gear(std::string_view text, Gear& out) noexcept;
bool parse_indicator(std::string_view text, Indicator& out) noexcept;
bool parse_drive_mode(std::string_view text, DriveMode& out) noexcept;

struct PrimaryCommand {
  double desired_swa = 0.0;
  double desired_velocity = 0.0;
  std::uint32_t seq = 0;
  std::uint64_t stamp_ns = 0;

  bool operator==(const PrimaryCommand&) const = default;
};

struct SecondaryCommand {
  Gear gear = Gear::Park;
  Indicator indicator = Indicator::Off;
  bool estop_engaged = false;
  std::uint32_t seq = 0;
  std::uint64_t stamp_ns = 0;

  bool operator==(const SecondaryCommand&) const = default;
};

struct VehicleState {
  Pose2D pose;
  double velocity = 0.0;
  double swa = 0.0;
  Gear gear = Gear::Park;
  Indicator indicator = Indicator::Off;
  bool estop_engaged = false;
  DriveMode mode = DriveMode::Normal;
  std::uint64_t stamp_ns = 0;

  bool operator==(const VehicleState&) const = default;
};

/// Range returned for beams that hit nothing inside [range_min, range_max].
inline constexpr double kNoReturn = std::numeric_limits<double>::infinity();

struct LaserScan {
  std::string frame_id;
  double angle_min = 0.0;
  double angle_increment = 0.0;
  double range_min = 0.0;
  double range_max = 0.0;
  std::uint64_t stamp_ns = 0;
  std::vector<double> ranges;

  bool valid_beam(std::size_t i) const noexcept;
  double beam_angle(std::size_t i) const noexcept {
    return angle_min + static_cast<double>(i) * angle_increment;
  }

  bool operator==(const LaserScan&) const = default;
};

/// Synthetic camera frame. `simulated_size_bytes` is the full encoded datagram
/// size the frame occupies on the link; the codec pads the payload with a
/// deterministic pattern to reach it.
struct FramePacket {
  std::string camera_id;
  std::uint32_t seq = 0;
  std::uint64_t stamp_ns = 0;
  std::uint16_t width = 0;
  std::uint16_t height = 0;
  std::uint32_t simulated_size_bytes = 0;
  std::uint64_t digest = 0;

  bool operator==(const FramePacket&) const = default;
};

struct DetectedObject {
  double centroid_x = 0.0;
  double centroid_y = 0.0;
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;
  std::uint32_t point_count = 0;

  bool operator==(const DetectedObject&) const = default;
};

struct ObjectList {
  std::string frame_id;
  std::uint64_t stamp_ns = 0;
  std::vector<DetectedObject> objects;

  bool operator==(const ObjectList&) const = default;
};

struct OccupancyGrid {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double resolution = 0.2;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint64_t stamp_ns = 0;
  std::vector<std::uint8_t> cells;  // row-major, 0 free / 1 occupied

  bool occupied(std::uint32_t ix, std::uint32_t iy) const { return cells.at(iy * width + ix) != 0; }
  std::size_t occupied_count() const noexcept;

  bool operator==(const OccupancyGrid&) const = default;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point2&) const = default;
};

struct LanePolylines {
  std::vector<Point2> left;
  std::vector<Point2> right;
  double swa_used = 0.0;
  double horizon = 0.0;
  std::uint64_t stamp_ns = 0;

  bool operator==(const LanePolylines&) const = default;
};

/// Round-trip clock probe. The requester fills t0; the responder adds t1/t2.
struct TimeSyncProbe {
  std::uint64_t t0 = 0;
  std::uint64_t t1 = 0;
  std::uint64_t t2 = 0;
  bool is_reply = false;

  bool operator==(const TimeSyncProbe&) const = default;
};

struct Heartbeat {
  bool operator==(const Heartbeat&) const = default;
};

}  // namespace tod
