#pragma once

#include <cstdint>
#include <deque>
#include <optional>

#include "tod/core/types.hpp"

namespace tod::vehicle {

/// Validated setpoints handed from the bridge to the plant.
struct Actuation {
  double swa_setpoint = 0.0;
  double velocity_setpoint = 0.0;
  std::uint32_t source_seq = 0;
  std::uint64_t applied_at_ns = 0;
  Gear gear = Gear::Park;
  Indicator indicator = Indicator::Off;
  bool estop_engaged = false;

  bool operator==(const Actuation&) const = default;
};

/// Kinematic bicycle with a pure steering delay and a first-order velocity
/// lag. Owns plant time; the delay line is keyed by it.
class Plant {
 public:
  explicit Plant(const VehicleParams& params, const Pose2D& start = {});

  /// Advances by dt seconds, dt in (0, 0.05]. `mode` is the watchdog verdict;
  /// SafeStop or an engaged E-stop brakes at max_decel down to exactly zero.
  void step(const Actuation& act, double dt, DriveMode mode = DriveMode::Normal);

  /// Replaces the state; the delay line is refilled with `s.swa`.
  void reset(const VehicleState& s);

  const VehicleState& state() const noexcept { return state_; }
  std::int64_t time_ns() const noexcept { return t_ns_; }
  const VehicleParams& params() const noexcept { return params_; }

 private:
  double delayed_setpoint(std::int64_t t_ns) const;

  VehicleParams params_;
  VehicleState state_;
  std::int64_t t_ns_ = 0;
  std::deque<std::pair<std::int64_t, double>> swa_history_;
};

/// Velocity target after the gear/sign gate.
double gated_velocity(Gear gear, double setpoint) noexcept;

/// Bridge validation of one primary/secondary pair against the current state.
/// Throws Error(NonFinite) for NaN/inf axes. Stale commands must be filtered
/// by the caller.
Actuation ingest_command(const PrimaryCommand& primary, const SecondaryCommand& secondary, const VehicleState& state,
                         const VehicleParams& params, std::uint64_t now_ns);

/// Command-gap watchdog with a latch: once tripped it stays in SafeStop
/// until commands are fresh again and the vehicle is stationary.
class Watchdog {
 public:
  explicit Watchdog(double timeout_s);

  DriveMode update(std::optional<std::int64_t> last_cmd_ns, std::int64_t now_ns, double velocity, bool estop);
  DriveMode mode() const noexcept { return latched_ ? DriveMode::SafeStop : DriveMode::Normal; }

 private:
  std::int64_t timeout_ns_;
  bool latched_ = true;
};

/// Stateless form of the gap rule, without the latch.
DriveMode watchdog_check(std::int64_t last_cmd_ns, std::int64_t now_ns, const VehicleParams& params) noexcept;

}  // namespace tod::vehicle
