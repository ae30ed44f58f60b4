#include "tod/vehicle/plant.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>

#include "tod/core/error.hpp"
#include "tod/core/limits.hpp"

namespace tod::vehicle {

namespace {

std::int64_t to_ns(double s) { return static_cast<std::int64_t>(std::llround(s * 1e9)); }

}  // namespace

Plant::Plant(const VehicleParams& params, const Pose2D& start) : params_(params) {
  params_.validate();
  state_.pose = start;
  state_.pose.yaw = normalize_angle(start.yaw);
  swa_history_.emplace_back(std::numeric_limits<std::int64_t>::min(), 0.0);
}

void Plant::reset(const VehicleState& s) {
  state_ = s;
  state_.pose.yaw = normalize_angle(s.pose.yaw);
  swa_history_.clear();
  swa_history_.emplace_back(std::numeric_limits<std::int64_t>::min(), s.swa);
}

double Plant::delayed_setpoint(std::int64_t t_ns) const {
  // Last setpoint issued at or before t_ns.
  auto it = std::upper_bound(swa_history_.begin(), swa_history_.end(), t_ns,
                             [](std::int64_t t, const auto& e) { return t < e.first; });
  return std::prev(it)->second;
}

void Plant::step(const Actuation& act, double dt, DriveMode mode) {
  if (!(dt > 0.0 && dt <= 0.05)) throw Error(ErrorCode::InvalidArgument, "plant step dt must be in (0, 0.05]");
  const double swa_cmd = std::clamp(act.swa_setpoint, -params_.max_swa, params_.max_swa);
  if (swa_history_.back().second != swa_cmd) swa_history_.emplace_back(t_ns_, swa_cmd);

  // Pose from the state at the start of the step.
  const double v = state_.velocity;
  const double delta = params_.road_wheel_angle(state_.swa);
  state_.pose.x += v * std::cos(state_.pose.yaw) * dt;
  state_.pose.y += v * std::sin(state_.pose.yaw) * dt;
  state_.pose.yaw = normalize_angle(state_.pose.yaw + v * std::tan(delta) / params_.wheelbase * dt);

  t_ns_ += to_ns(dt);
  const std::int64_t delay_ns = to_ns(params_.steer_delay);
  state_.swa = delayed_setpoint(t_ns_ - delay_ns);
  while (swa_history_.size() > 1 && swa_history_[1].first <= t_ns_ - delay_ns) swa_history_.pop_front();

  if (mode == DriveMode::SafeStop || act.estop_engaged) {
    const double dv = params_.max_decel * dt;
    state_.velocity = std::abs(v) <= dv ? 0.0 : v - std::copysign(dv, v);
  } else {
    const double target = std::clamp(gated_velocity(act.gear, act.velocity_setpoint), -params_.max_speed,
                                     params_.max_speed);
    state_.velocity = target + (v - target) * std::exp(-dt / params_.velocity_tau);
    if (target == 0.0 && std::abs(state_.velocity) < 1e-3) state_.velocity = 0.0;
  }

  state_.gear = act.gear;
  state_.indicator = act.indicator;
  state_.estop_engaged = act.estop_engaged;
  state_.mode = act.estop_engaged ? DriveMode::SafeStop : mode;
  state_.stamp_ns = static_cast<std::uint64_t>(t_ns_);
}

double gated_velocity(Gear gear, double setpoint) noexcept {
  if (gear == Gear::Drive && setpoint >= 0.0) return setpoint;
  if (gear == Gear::Reverse && setpoint <= 0.0) return setpoint;
  return 0.0;
}

Actuation ingest_command(const PrimaryCommand& primary, const SecondaryCommand& secondary, const VehicleState& state,
                         const VehicleParams& params, std::uint64_t now_ns) {
  const PrimaryCommand p = clamp_primary(primary, params);
  Actuation a;
  a.swa_setpoint = p.desired_swa;
  a.source_seq = p.seq;
  a.applied_at_ns = now_ns;
  a.indicator = secondary.indicator;
  a.estop_engaged = secondary.estop_engaged;
  a.gear = std::abs(state.velocity) < 0.1 ? secondary.gear : state.gear;
  a.velocity_setpoint = a.estop_engaged ? 0.0 : gated_velocity(a.gear, p.desired_velocity);
  return a;
}

Watchdog::Watchdog(double timeout_s) : timeout_ns_(to_ns(timeout_s)) {}

DriveMode Watchdog::update(std::optional<std::int64_t> last_cmd_ns, std::int64_t now_ns, double velocity,
                           bool estop) {
  const bool timed_out = !last_cmd_ns || now_ns - *last_cmd_ns > timeout_ns_;
  if (timed_out || estop)
    latched_ = true;
  else if (latched_ && velocity == 0.0)
    latched_ = false;
  return mode();
}

DriveMode watchdog_check(std::int64_t last_cmd_ns, std::int64_t now_ns, const VehicleParams& params) noexcept {
  return now_ns - last_cmd_ns > to_ns(params.command_timeout) ? DriveMode::SafeStop : DriveMode::Normal;
}

}  // namespace tod::vehicle
