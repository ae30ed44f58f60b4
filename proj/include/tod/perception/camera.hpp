#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "tod/core/transform.hpp"

namespace tod::perception {

/// Pinhole intrinsics. `frame_id` names the optical frame: +Z forward,
/// +X right, +Y down.
struct CameraModel {
  std::string frame_id = "camera_optical";
  double fx = 500.0;
  double fy = 500.0;
  double cx = 464.0;
  double cy = 260.0;
  int width = 928;
  int height = 520;
  double z_min = 0.1;

  /// Throws Error(Validation).
  void validate() const;
};

enum class Visibility : std::uint8_t { Visible, Outside, Culled };

struct ImagePoint {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
  Visibility visibility = Visibility::Culled;
};

/// Projects points given in `source_frame` into the image. Points with depth
/// below z_min are culled; points landing outside the image keep their
/// coordinates and are flagged Outside. Throws on unresolvable frames.
std::vector<ImagePoint> project_points(const std::vector<Eigen::Vector3d>& points, std::string_view source_frame,
                                       const CameraModel& cam, const TransformTree& tree);

/// Optical-frame point at `depth` that projects to (u, v).
Eigen::Vector3d back_project(double u, double v, double depth, const CameraModel& cam);

}  // namespace tod::perception
