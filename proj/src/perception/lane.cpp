#include "tod/perception/lane.hpp"

#include <cmath>

#include "tod/core/error.hpp"

namespace tod::perception {

LanePolylines predict_lane(double swa, const VehicleParams& params, double horizon, std::size_t n_points,
                           std::uint64_t stamp_ns) {
  if (!std::isfinite(swa)) throw Error(ErrorCode::NonFinite, "lane prediction needs a finite SWA");
  if (!(horizon > 0.0)) throw Error(ErrorCode::InvalidArgument, "lane horizon must be > 0");
  if (n_points < 2) throw Error(ErrorCode::InvalidArgument, "lane needs at least 2 points per edge");

  LanePolylines lane;
  lane.swa_used = swa;
  lane.horizon = horizon;
  lane.stamp_ns = stamp_ns;
  lane.left.reserve(n_points);
  lane.right.reserve(n_points);

  const double L = params.wheelbase;
  const double half_w = params.track_width / 2.0;
  const double delta = params.road_wheel_angle(swa);
  const double denom = static_cast<double>(n_points - 1);

  if (std::abs(delta) < kStraightDelta) {
    for (std::size_t k = 0; k < n_points; ++k) {
      const double s = static_cast<double>(k) * horizon / denom;
      lane.left.push_back({L + s, half_w});
      lane.right.push_back({L + s, -half_w});
    }
    return lane;
  }

  const double R = L / std::tan(delta);  // signed; centre at (0, R)
  const double sweep = horizon / std::abs(R);
  const double sense = delta > 0.0 ? 1.0 : -1.0;
  auto rotate = [&](double px, double py, double phi) {
    const double rx = px, ry = py - R;
    return Point2{rx * std::cos(phi) - ry * std::sin(phi), R + rx * std::sin(phi) + ry * std::cos(phi)};
  };
  for (std::size_t k = 0; k < n_points; ++k) {
    const double phi = sense * static_cast<double>(k) * sweep / denom;
    lane.left.push_back(rotate(L, half_w, phi));
    lane.right.push_back(rotate(L, -half_w, phi));
  }
  return lane;
}

}  // namespace tod::perception
