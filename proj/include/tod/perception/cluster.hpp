#pragma once

#include <cstddef>
#include <vector>

#include "tod/core/types.hpp"

namespace tod::perception {

struct ClusterParams {
  double distance = 0.5;  // d_c, meters
  std::size_t min_points = 3;
};

/// Valid beams as Cartesian points in the scan frame, in beam order, with
/// their beam indices.
struct ScanPoints {
  std::vector<Point2> points;
  std::vector<std::size_t> beams;
};
ScanPoints scan_to_points(const LaserScan& scan);

/// Component label per point (-1 for none); labels are contiguous from 0 in
/// order of each component's first point.
std::vector<int> label_components(const std::vector<Point2>& points, double distance);

/// Connected components of the "distance <= d_c" graph over valid beams,
/// keeping those with at least min_points members, ordered by first beam.
ObjectList cluster_scan(const LaserScan& scan, const ClusterParams& params);

}  // namespace tod::perception
