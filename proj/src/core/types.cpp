#include "tod/core/types.hpp"

#include <algorithm>
#include <cmath>

#include "tod/core/error.hpp"

namespace tod {

double normalize_angle(double angle) noexcept {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double a = std::fmod(angle, kTwoPi);
  if (a <= -std::numbers::pi) a += kTwoPi;
  if (a > std::numbers::pi) a -= kTwoPi;
  return a;
}

void VehicleParams::validate() const {
  auto positive = [](double value, const char* field) {
    if (!std::isfinite(value) || value <= 0.0)
      throw Error(ErrorCode::Validation, std::string("vehicle.") + field + " must be > 0");
  };
  positive(wheelbase, "wheelbase");
  positive(track_width, "track_width");
  positive(steering_ratio, "steering_ratio");
  positive(max_swa, "max_swa");
  positive(max_speed, "max_speed");
  positive(max_decel, "max_decel");
  positive(velocity_tau, "velocity_tau");
  positive(command_timeout, "command_timeout");
  if (!std::isfinite(steer_delay) || steer_delay < 0.0)
    throw Error(ErrorCode::Validation, "vehicle.steer_delay must be >= 0");
  if (max_swa / steering_ratio >= std::numbers::pi / 2.0)
    throw Error(ErrorCode::Validation, "vehicle.max_swa / steering_ratio must be < pi/2");
}

std::string_view to_string(Gear gear) noexcept {
  switch (gear) {
    case Gear::Park: return "park";
    case Gear::Reverse: return "reverse";
    case Gear::Neutral: return "neutral";
    case Gear::Drive: return "drive";
  }
  return "?";
}

std::string_view to_string(Indicator indicator) noexcept {
  switch (indicator) {
    case Indicator::Off: return "off";
    case Indicator::Left: return "left";
    case Indicator::Right: return "right";
    case Indicator::Hazard: return "hazard";
  }
  return "?";
}

std::string_view to_string(DriveMode mode) noexcept {
  return mode == DriveMode::SafeStop ? "safestop" : "normal";
}

bool parse_gear(std::string_view text, Gear& out) noexcept {
  for (Gear g : {Gear::Park, Gear::Reverse, Gear::Neutral, Gear::Drive}) {
    if (text == to_string(g)) {
      out = g;
      return true;
    }
  }
  return false;
}

bool parse_indicator(std::string_view text, Indicator& out) noexcept {
  for (Indicator i : {Indicator::Off, Indicator::Left, Indicator::Right, Indicator::Hazard}) {
    if (text == to_string(i)) {
      out = i;
      return true;
    }
  }
  return false;
}

bool parse_drive_mode(std::string_view text, DriveMode& out) noexcept {
  if (text == "normal") {
    out = DriveMode::Normal;
    return true;
  }
  if (text == "safestop") {
    out = DriveMode::SafeStop;
    return true;
  }
  return false;
}

bool LaserScan::valid_beam(std::size_t i) const noexcept {
  const double r = ranges[i];
  return std::isfinite(r) && r >= range_min && r <= range_max;
}

std::size_t OccupancyGrid::occupied_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](std::uint8_t c) { return c != 0; }));
}

}  // namespace tod
