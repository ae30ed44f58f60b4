#pragma once

#include <cstdint>

#include <Eigen/Geometry>

#include "tod/core/types.hpp"

namespace tod::perception {

struct GridSpec {
  double origin_x = -20.0;  // world coords of the (0, 0) cell corner
  double origin_y = -20.0;
  double resolution = 0.2;
  std::uint32_t width = 200;
  std::uint32_t height = 200;

  /// Throws Error(Validation).
  void validate() const;
};

/// Grid of `extent` x `extent` meters around (x, y), origin snapped to the
/// resolution lattice.
GridSpec centered_grid_spec(double x, double y, double extent = 40.0, double resolution = 0.2);

OccupancyGrid empty_grid(const GridSpec& spec, std::uint64_t stamp_ns = 0);

/// Marks the cell of every valid beam endpoint. Cell index is
/// floor((p - origin) / resolution), so a point on a cell boundary belongs to
/// the higher-index cell. Returns the number of endpoints outside the grid.
std::size_t accumulate_scan(OccupancyGrid& grid, const LaserScan& scan, const Pose2D& vehicle_pose,
                            const Eigen::Isometry3d& sensor_in_vehicle);

struct GridResult {
  OccupancyGrid grid;
  std::size_t ignored = 0;
};

/// Per-scan grid: empty_grid followed by one accumulate_scan.
GridResult build_grid(const LaserScan& scan, const Pose2D& vehicle_pose, const Eigen::Isometry3d& sensor_in_vehicle,
                      const GridSpec& spec);

/// Cell containing world point (x, y), if inside the grid.
bool cell_of(const OccupancyGrid& grid, double x, double y, std::uint32_t& ix, std::uint32_t& iy) noexcept;

}  // namespace tod::perception
