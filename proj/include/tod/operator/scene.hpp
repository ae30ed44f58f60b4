#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tod/core/codec.hpp"
#include "tod/core/transform.hpp"

namespace tod::op {

enum class EntityKind : std::uint8_t {
  SceneCamera,
  CoordinateFrame,
  VehicleModel,
  Speedometer,
  VideoCanvas,
  LaserScanView,
  VehicleLane,
  TopView,
};

inline constexpr std::size_t kEntityKindCount = 8;
std::string_view to_string(EntityKind kind) noexcept;

/// Where an entity sits: a frame of the scene tree plus a planar offset.
struct TransformComponent {
  std::string frame;
  Pose2D offset;
};

struct SceneCameraData {
  std::string follow;
  double height = 30.0;
};
struct CoordinateFrameData {};
struct VehicleModelData {
  Pose2D pose;
  double length = 0.0;
  double width = 0.0;
  double swa = 0.0;
  Indicator indicator = Indicator::Off;
};
struct SpeedometerData {
  double commanded_velocity = 0.0;
  double actual_velocity = 0.0;
  Gear commanded_gear = Gear::Park;
  Gear gear = Gear::Park;
  bool estop_engaged = false;
  DriveMode mode = DriveMode::Normal;
};
struct VideoCanvasData {
  std::string camera;
  std::uint32_t seq = 0;
  std::uint64_t stamp_ns = 0;
  std::uint16_t width = 0;
  std::uint16_t height = 0;
  std::uint32_t bytes = 0;
  std::uint64_t digest = 0;
};
struct LaserScanViewData {
  std::string sensor;
  std::vector<Point2> points;  // vehicle frame
  std::vector<DetectedObject> objects;
};
struct VehicleLaneData {
  LanePolylines lane;
};
struct TopViewData {
  std::optional<OccupancyGrid> grid;
  double extent = 40.0;
};

using EntityData = std::variant<SceneCameraData, CoordinateFrameData, VehicleModelData, SpeedometerData, VideoCanvasData,
                                LaserScanViewData, VehicleLaneData, TopViewData>;

struct StyleComponent {
  std::string color = "#ffffff";
  bool visible = true;
};

struct SceneEntity {
  std::string id;
  EntityKind kind = EntityKind::CoordinateFrame;
  TransformComponent transform;
  EntityData data;
  StyleComponent style;
};

struct SceneConfig {
  std::string vehicle_name = "ego";
  VehicleParams params;
  /// Static sensor and camera frames below "vehicle".
  std::vector<Transform> transforms;
  std::vector<std::string> scans;    // sensor names
  std::vector<std::string> cameras;  // camera ids
};

/// Table-of-entities model of the operator's visual scene. Single writer.
class SceneRegistry {
 public:
  static constexpr const char* kWorldFrame = "map";
  static constexpr const char* kVehicleFrame = "vehicle";

  SceneRegistry(SceneConfig cfg, const TopicRegistry& topics);

  /// Applies one incoming message. Returns the ids of changed entities;
  /// empty for repeated (topic, seq) pairs, unknown topics and kinds without
  /// a scene representation.
  std::vector<std::string> apply(const WireMessage& msg);
  void set_commanded(double velocity, Gear gear);

  const std::vector<SceneEntity>& entities() const noexcept { return entities_; }
  const SceneEntity* find(std::string_view id) const;
  std::size_t count(EntityKind kind) const;
  const TransformTree& tree() const noexcept { return tree_; }
  std::uint64_t unknown_topics() const noexcept { return unknown_topics_; }
  std::uint64_t repeated() const noexcept { return repeated_; }

  /// `{"type":"scene_snapshot", "entities":[...]}` as one JSON line.
  std::string snapshot_json(std::uint64_t stamp_ns) const;

 private:
  SceneEntity& entity(std::string_view id);
  void add(SceneEntity e);

  SceneConfig cfg_;
  const TopicRegistry& topics_;
  TransformTree tree_;
  std::vector<SceneEntity> entities_;
  std::map<std::uint16_t, std::uint32_t> last_seq_;
  std::uint64_t unknown_topics_ = 0;
  std::uint64_t repeated_ = 0;
};

}  // namespace tod::op
