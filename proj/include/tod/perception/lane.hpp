#pragma once

#include <cstddef>

#include "tod/core/types.hpp"

namespace tod::perception {

/// Below this road wheel angle (rad) the lane is drawn straight.
inline constexpr double kStraightDelta = 1e-4;

/// Sweeps the front corners (L, +-W/2) about the instantaneous centre of
/// rotation, holding the current SWA. The rear axle travels `horizon` meters.
/// Throws Error(NonFinite) for a non-finite SWA and Error(InvalidArgument)
/// for horizon <= 0 or n_points < 2.
LanePolylines predict_lane(double swa, const VehicleParams& params, double horizon, std::size_t n_points,
                           std::uint64_t stamp_ns = 0);

}  // namespace tod::perception
