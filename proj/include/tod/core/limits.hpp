#pragma once

#include "tod/core/types.hpp"

namespace tod {

/// Saturates both axes to the vehicle limits. Throws Error(NonFinite) if
/// either axis is NaN or infinite; such commands are never forwarded.
PrimaryCommand clamp_primary(const PrimaryCommand& cmd, const VehicleParams& params);

}  // namespace tod
