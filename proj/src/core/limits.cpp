#include "tod/core/limits.hpp"

#include <algorithm>
#include <cmath>

#include "tod/core/error.hpp"

namespace tod {

PrimaryCommand clamp_primary(const PrimaryCommand& cmd, const VehicleParams& params) {
  if (!std::isfinite(cmd.desired_swa) || !std::isfinite(cmd.desired_velocity))
    throw Error(ErrorCode::NonFinite, "primary command contains a non-finite value");
  PrimaryCommand out = cmd;
  out.desired_swa = std::clamp(cmd.desired_swa, -params.max_swa, params.max_swa);
  out.desired_velocity = std::clamp(cmd.desired_velocity, -params.max_speed, params.max_speed);
  return out;
}

}  // namespace tod
