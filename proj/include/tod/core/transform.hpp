#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Geometry>

#include "tod/core/types.hpp"

namespace tod {

/// Pose of `child` expressed in `parent`: p_parent = rotation * p_child + translation.
struct Transform {
  std::string parent;
  std::string child;
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();

  static Transform from_rpy(std::string parent, std::string child, const Eigen::Vector3d& translation,
                            double roll, double pitch, double yaw);
};

/// Single-parent, acyclic frame tree.
class TransformTree {
 public:
  TransformTree() = default;
  explicit TransformTree(const std::vector<Transform>& transforms);

  /// Throws Error(Validation) when the child already has a parent, the edge
  /// would close a cycle, or the rotation is not unit within 1e-9.
  void add(const Transform& t);
  /// Replaces the existing edge into `t.child`, or adds it.
  void set(const Transform& t);

  bool has_frame(std::string_view frame) const;
  std::vector<std::string> frames() const;
  std::vector<Transform> edges() const;

  /// Rigid map taking coordinates in `from` to coordinates in `to`.
  /// Throws Error(UnknownFrame) or Error(DisconnectedFrames).
  Eigen::Isometry3d resolve(std::string_view from, std::string_view to) const;

 private:
  // Pose of `frame` in its root, plus the root name.
  Eigen::Isometry3d pose_in_root(const std::string& frame, std::string& root) const;

  std::map<std::string, Transform, std::less<>> parent_of_;  // keyed by child
  std::map<std::string, int, std::less<>> known_;
};

Eigen::Isometry3d pose_to_isometry(const Pose2D& pose);

/// Planar (x, y, yaw) part of a 3D rigid transform.
Pose2D isometry_to_pose2d(const Eigen::Isometry3d& iso);

/// Transform resolution as a free function over an edge set.
Eigen::Isometry3d resolve_transform(const std::vector<Transform>& tree, std::string_view from, std::string_view to);

}  // namespace tod
