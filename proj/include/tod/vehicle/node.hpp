#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tod/core/topics.hpp"
#include "tod/core/transform.hpp"
#include "tod/net/control.hpp"
#include "tod/net/datagram.hpp"
#include "tod/perception/cluster.hpp"
#include "tod/perception/stream.hpp"
#include "tod/vehicle/frames.hpp"
#include "tod/vehicle/plant.hpp"
#include "tod/vehicle/world.hpp"

namespace tod::vehicle {

struct SensorConfig {
  std::string name;
  ScanParams scan;  // scan.frame_id must be a frame of the transform list
};

struct VehicleNodeConfig {
  std::string name = "ego";
  VehicleParams params;
  Pose2D start_pose;
  World world;
  std::vector<Transform> transforms;  // rooted at "vehicle"
  std::vector<SensorConfig> sensors;
  std::vector<perception::StreamConfig> streams;
  double plant_rate_hz = 1000.0;
  double state_rate_hz = 100.0;
  double lane_rate_hz = 10.0;
  double lane_horizon = 20.0;
  std::size_t lane_points = 21;
  perception::ClusterParams cluster;
  double grid_extent = 40.0;
  double grid_resolution = 0.2;
  /// Vehicle clock minus scheduler clock.
  std::int64_t clock_offset_ns = 0;

  /// Throws Error(Validation) naming the offending field.
  void validate() const;
};

/// Topic table for one vehicle and its sensors and cameras.
TopicRegistry make_registry(std::string_view vehicle_name, const std::vector<std::string>& scans,
                            const std::vector<std::string>& cameras);

std::string status_topic(std::string_view vehicle_name);

struct VehicleCounters {
  std::uint64_t commands_applied = 0;
  std::uint64_t stale_dropped = 0;
  std::uint64_t rejected = 0;
  std::uint64_t frames_sent = 0;
  std::uint64_t scans_sent = 0;
  std::uint64_t send_failures = 0;
  std::uint64_t grid_ignored = 0;
};

/// Vehicle side: bridge, watchdog, plant loop, sensors, stream source and
/// telemetry. Hosts the control broker's status topic.
class VehicleNode {
 public:
  VehicleNode(net::Scheduler& sched, VehicleNodeConfig cfg, const TopicRegistry& topics, net::DatagramTransport& rx,
              net::DatagramTransport& tx, net::ControlBroker& broker);
  ~VehicleNode();

  void start();
  /// Drains received datagrams.
  void pump();

  const VehicleState& state() const noexcept { return plant_.state(); }
  const Actuation& actuation() const noexcept { return actuation_; }
  const VehicleCounters& counters() const noexcept { return counters_; }
  const VehicleNodeConfig& config() const noexcept { return cfg_; }
  std::uint64_t clock_ns() const;
  std::optional<perception::StreamConfig> stream_config(std::string_view camera) const;

  /// Called once if the vehicle leaves the world bounds.
  std::function<void(const std::string&)> on_abort;

 private:
  struct Camera;

  void plant_tick();
  void publish_state();
  void publish_status();
  void scan_tick(std::size_t sensor);
  void lane_tick();
  void frame_tick(Camera& cam);
  void arm_camera(Camera& cam);
  void ingest(bool from_primary);
  void send(std::uint16_t topic, Payload payload);

  net::Scheduler& sched_;
  VehicleNodeConfig cfg_;
  const TopicRegistry& topics_;
  net::DatagramSender sender_;
  net::DatagramHub hub_;
  net::ControlBroker& broker_;
  net::ControlBroker::SessionId local_session_ = 0;

  Plant plant_;
  Watchdog watchdog_;
  TransformTree tree_;
  Actuation actuation_;
  std::optional<PrimaryCommand> last_primary_;
  SecondaryCommand last_secondary_;
  std::optional<std::int64_t> last_cmd_ns_;
  DriveMode last_status_mode_ = DriveMode::Normal;
  bool status_sent_ = false;
  bool aborted_ = false;
  VehicleCounters counters_;

  std::shared_ptr<net::Subscription> sub_primary_;
  std::shared_ptr<net::Subscription> sub_secondary_;
  std::shared_ptr<net::Subscription> sub_sync_;
  std::vector<std::uint16_t> scan_topics_;
  std::vector<std::uint16_t> object_topics_;
  std::vector<Eigen::Isometry3d> sensor_mounts_;
  std::vector<std::unique_ptr<Camera>> cameras_;
  std::vector<std::unique_ptr<net::PeriodicTask>> tasks_;
  std::vector<std::pair<std::string, std::vector<std::uint8_t>>> pending_control_;
};

}  // namespace tod::vehicle
