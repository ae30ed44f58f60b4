#include "tod/perception/grid.hpp"

#include <cmath>

#include "tod/core/error.hpp"
#include "tod/core/transform.hpp"

namespace tod::perception {

namespace {

// Index tolerance: (p - origin) / res can land a hair below an integer for a
// point that sits exactly on a boundary.
constexpr double kBoundaryEps = 1e-9;

}  // namespace

void GridSpec::validate() const {
  if (!(resolution > 0.0) || !std::isfinite(resolution)) throw Error(ErrorCode::Validation, "grid.resolution must be > 0");
  if (width == 0 || height == 0) throw Error(ErrorCode::Validation, "grid must have at least one cell");
  if (!std::isfinite(origin_x) || !std::isfinite(origin_y)) throw Error(ErrorCode::Validation, "grid origin must be finite");
}

GridSpec centered_grid_spec(double x, double y, double extent, double resolution) {
  GridSpec s;
  s.resolution = resolution;
  s.width = s.height = static_cast<std::uint32_t>(std::ceil(extent / resolution - kBoundaryEps));
  s.origin_x = std::floor((x - extent / 2.0) / resolution) * resolution;
  s.origin_y = std::floor((y - extent / 2.0) / resolution) * resolution;
  s.validate();
  return s;
}

OccupancyGrid empty_grid(const GridSpec& spec, std::uint64_t stamp_ns) {
  spec.validate();
  OccupancyGrid g;
  g.origin_x = spec.origin_x;
  g.origin_y = spec.origin_y;
  g.resolution = spec.resolution;
  g.width = spec.width;
  g.height = spec.height;
  g.stamp_ns = stamp_ns;
  g.cells.assign(static_cast<std::size_t>(spec.width) * spec.height, 0);
  return g;
}

bool cell_of(const OccupancyGrid& grid, double x, double y, std::uint32_t& ix, std::uint32_t& iy) noexcept {
  const double fx = std::floor((x - grid.origin_x) / grid.resolution + kBoundaryEps);
  const double fy = std::floor((y - grid.origin_y) / grid.resolution + kBoundaryEps);
  if (!(fx >= 0.0 && fx < grid.width && fy >= 0.0 && fy < grid.height)) return false;
  ix = static_cast<std::uint32_t>(fx);
  iy = static_cast<std::uint32_t>(fy);
  return true;
}

std::size_t accumulate_scan(OccupancyGrid& grid, const LaserScan& scan, const Pose2D& vehicle_pose,
                            const Eigen::Isometry3d& sensor_in_vehicle) {
  const Eigen::Isometry3d to_world = pose_to_isometry(vehicle_pose) * sensor_in_vehicle;
  std::size_t ignored = 0;
  for (std::size_t i = 0; i < scan.ranges.size(); ++i) {
    if (!scan.valid_beam(i)) continue;
    const double a = scan.beam_angle(i);
    const Eigen::Vector3d p = to_world * Eigen::Vector3d(scan.ranges[i] * std::cos(a), scan.ranges[i] * std::sin(a), 0.0);
    std::uint32_t ix, iy;
    if (cell_of(grid, p.x(), p.y(), ix, iy))
      grid.cells[static_cast<std::size_t>(iy) * grid.width + ix] = 1;
    else
      ++ignored;
  }
  return ignored;
}

GridResult build_grid(const LaserScan& scan, const Pose2D& vehicle_pose, const Eigen::Isometry3d& sensor_in_vehicle,
                      const GridSpec& spec) {
  GridResult r;
  r.grid = empty_grid(spec, scan.stamp_ns);
  r.ignored = accumulate_scan(r.grid, scan, vehicle_pose, sensor_in_vehicle);
  return r;
}

}  // namespace tod::perception
