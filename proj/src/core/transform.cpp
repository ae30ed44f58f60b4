#include "tod/core/transform.hpp"

#include <cmath>

#include "tod/core/error.hpp"

namespace tod {

Transform Transform::from_rpy(std::string parent, std::string child, const Eigen::Vector3d& translation, double roll,
                              double pitch, double yaw) {
  Transform t;
  t.parent = std::move(parent);
  t.child = std::move(child);
  t.translation = translation;
  t.rotation = Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()) * Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitY()) *
               Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitX());
  t.rotation.normalize();
  return t;
}

TransformTree::TransformTree(const std::vector<Transform>& transforms) {
  for (const auto& t : transforms) add(t);
}

void TransformTree::add(const Transform& t) {
  if (t.parent.empty() || t.child.empty()) throw Error(ErrorCode::Validation, "transform frame id is empty");
  if (t.parent == t.child) throw Error(ErrorCode::Validation, "transform " + t.child + " is its own parent");
  if (std::abs(t.rotation.norm() - 1.0) > 1e-9)
    throw Error(ErrorCode::Validation, "transform " + t.parent + "->" + t.child + " rotation is not a unit quaternion");
  if (!t.translation.allFinite()) throw Error(ErrorCode::Validation, "transform translation is not finite");
  if (parent_of_.count(t.child)) throw Error(ErrorCode::Validation, "frame " + t.child + " already has a parent");
  // Walking up from the new parent must not reach the child.
  std::string cursor = t.parent;
  while (true) {
    if (cursor == t.child) throw Error(ErrorCode::Validation, "transform " + t.parent + "->" + t.child + " forms a cycle");
    auto it = parent_of_.find(cursor);
    if (it == parent_of_.end()) break;
    cursor = it->second.parent;
  }
  parent_of_.emplace(t.child, t);
  known_[t.parent] = 1;
  known_[t.child] = 1;
}

void TransformTree::set(const Transform& t) {
  auto it = parent_of_.find(t.child);
  if (it != parent_of_.end() && it->second.parent == t.parent) {
    if (std::abs(t.rotation.norm() - 1.0) > 1e-9) throw Error(ErrorCode::Validation, "rotation is not unit");
    it->second = t;
    return;
  }
  if (it != parent_of_.end()) parent_of_.erase(it);
  add(t);
}

bool TransformTree::has_frame(std::string_view frame) const { return known_.count(frame) != 0; }

std::vector<std::string> TransformTree::frames() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : known_) out.push_back(name);
  return out;
}

std::vector<Transform> TransformTree::edges() const {
  std::vector<Transform> out;
  for (const auto& [_, t] : parent_of_) out.push_back(t);
  return out;
}

Eigen::Isometry3d TransformTree::pose_in_root(const std::string& frame, std::string& root) const {
  Eigen::Isometry3d pose = Eigen::Isometry3d::Identity();
  std::string cursor = frame;
  while (true) {
    auto it = parent_of_.find(cursor);
    if (it == parent_of_.end()) break;
    Eigen::Isometry3d edge = Eigen::Isometry3d::Identity();
    edge.linear() = it->second.rotation.toRotationMatrix();
    edge.translation() = it->second.translation;
    pose = edge * pose;
    cursor = it->second.parent;
  }
  root = cursor;
  return pose;
}

Eigen::Isometry3d TransformTree::resolve(std::string_view from, std::string_view to) const {
  if (!has_frame(from)) throw Error(ErrorCode::UnknownFrame, "unknown frame " + std::string(from));
  if (!has_frame(to)) throw Error(ErrorCode::UnknownFrame, "unknown frame " + std::string(to));
  if (from == to) return Eigen::Isometry3d::Identity();
  std::string root_from, root_to;
  const Eigen::Isometry3d from_in_root = pose_in_root(std::string(from), root_from);
  const Eigen::Isometry3d to_in_root = pose_in_root(std::string(to), root_to);
  if (root_from != root_to)
    throw Error(ErrorCode::DisconnectedFrames, std::string(from) + " and " + std::string(to) + " are not connected");
  return to_in_root.inverse(Eigen::Isometry) * from_in_root;
}

Eigen::Isometry3d pose_to_isometry(const Pose2D& pose) {
  Eigen::Isometry3d iso = Eigen::Isometry3d::Identity();
  iso.linear() = Eigen::AngleAxisd(pose.yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  iso.translation() = Eigen::Vector3d(pose.x, pose.y, 0.0);
  return iso;
}

Pose2D isometry_to_pose2d(const Eigen::Isometry3d& iso) {
  const Eigen::Vector3d heading = iso.linear() * Eigen::Vector3d::UnitX();
  return Pose2D{iso.translation().x(), iso.translation().y(), normalize_angle(std::atan2(heading.y(), heading.x()))};
}

Eigen::Isometry3d resolve_transform(const std::vector<Transform>& tree, std::string_view from, std::string_view to) {
  return TransformTree(tree).resolve(from, to);
}

}  // namespace tod
