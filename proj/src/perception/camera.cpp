#include "tod/perception/camera.hpp"

#include <cmath>

#include "tod/core/error.hpp"

namespace tod::perception {

void CameraModel::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw Error(ErrorCode::Validation, "camera fx and fy must be > 0");
  if (width <= 0 || height <= 0) throw Error(ErrorCode::Validation, "camera size must be positive");
  if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height))
    throw Error(ErrorCode::Validation, "camera principal point must lie inside the image");
  if (!(z_min > 0.0)) throw Error(ErrorCode::Validation, "camera z_min must be > 0");
}

std::vector<ImagePoint> project_points(const std::vector<Eigen::Vector3d>& points, std::string_view source_frame,
                                       const CameraModel& cam, const TransformTree& tree) {
  const Eigen::Isometry3d to_cam = tree.resolve(source_frame, cam.frame_id);
  std::vector<ImagePoint> out;
  out.reserve(points.size());
  for (const auto& p : points) {
    const Eigen::Vector3d q = to_cam * p;
    ImagePoint ip;
    ip.depth = q.z();
    if (q.z() < cam.z_min) {
      out.push_back(ip);
      continue;
    }
    ip.u = cam.fx * q.x() / q.z() + cam.cx;
    ip.v = cam.fy * q.y() / q.z() + cam.cy;
    const bool inside = ip.u >= 0.0 && ip.u < cam.width && ip.v >= 0.0 && ip.v < cam.height;
    ip.visibility = inside ? Visibility::Visible : Visibility::Outside;
    out.push_back(ip);
  }
  return out;
}

Eigen::Vector3d back_project(double u, double v, double depth, const CameraModel& cam) {
  return {(u - cam.cx) * depth / cam.fx, (v - cam.cy) * depth / cam.fy, depth};
}

}  // namespace tod::perception
