#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tod/core/transform.hpp"
#include "tod/core/types.hpp"
#include "tod/net/profile.hpp"
#include "tod/operator/manager.hpp"
#include "tod/perception/stream.hpp"
#include "tod/vehicle/node.hpp"
#include "tod/vehicle/world.hpp"

namespace tod::harness {

enum class LinkSelector : std::uint8_t { Uplink, Downlink, Both };

/// A timed change of one channel-profile field.
struct NetworkEvent {
  double t = 0.0;
  LinkSelector link = LinkSelector::Both;
  std::string field;  // delay | jitter | loss | cap | queue
  std::optional<double> value;  // nullopt only for "cap none"
};

/// One trace keyframe. Unset fields hold the previous keyframe's value.
struct TraceKey {
  double t = 0.0;
  std::optional<double> swa;
  std::optional<double> speed;
  std::optional<Gear> gear;
  std::optional<bool> estop;
  std::optional<Indicator> indicator;
};

struct SineSwa {
  double amplitude = 0.0;  // rad at the steering wheel
  double freq_hz = 0.0;
  double start = 0.0;      // s
};

/// Scripted operator. swa and speed interpolate linearly between keyframes;
/// gear, indicator and E-stop hold. A sine, if present, supplies swa.
struct CommandTrace {
  std::vector<TraceKey> keys;
  std::optional<SineSwa> sine;

  struct Value {
    double swa = 0.0;
    double speed = 0.0;
    Gear gear = Gear::Park;
    bool estop = false;
    Indicator indicator = Indicator::Off;
  };
  Value at(double t) const;
  double end_time() const noexcept { return keys.empty() ? 0.0 : keys.back().t; }
};

/// A session-manager event the scripted operator issues at time t.
struct SessionStep {
  double t = 0.0;
  op::ManagerEvent event;
};

struct DisplayStub {
  double processing_s = 0.0;
  double refresh_hz = 60.0;
};

struct Scenario {
  std::string name;
  std::string path;  // source file, for messages
  std::string world_path;
  vehicle::World world;
  double duration = 0.0;
  std::uint64_t seed = 1;
  VehicleParams params;
  Pose2D start_pose;
  double command_rate_hz = 50.0;
  double state_rate_hz = 100.0;
  double plant_rate_hz = 1000.0;
  std::vector<Transform> transforms;
  std::vector<vehicle::SensorConfig> sensors;
  std::vector<perception::StreamConfig> streams;
  perception::StreamMode video_rate_mode = perception::StreamMode::Manual;
  perception::AdaptParams adapt;
  net::ChannelProfile uplink;
  net::ChannelProfile downlink;
  std::vector<NetworkEvent> events;
  std::vector<SessionStep> session;
  DisplayStub display;
  double clock_offset_s = 0.0;
  bool interactive = false;
  CommandTrace trace;

  /// Throws Error(Validation) naming the field.
  void validate() const;
};

/// Line-based scenario text. Relative world paths resolve against
/// `base_dir`. Throws Error(Parse) with the line number, Error(Io) naming a
/// missing file, Error(Validation) with the field path.
Scenario parse_scenario(const std::string& text, const std::string& base_dir, const std::string& origin = "scenario");
Scenario load_scenario(const std::string& path);

/// Handles a key the scenario format does not know; returns false to reject
/// it. Throw Error(Parse) to report a bad value.
using ExtraKeyHandler = std::function<bool(const std::vector<std::string>& tokens)>;

/// Live node configuration: the scenario format minus the trace, plus
/// node-specific keys. `world` is optional; duration 0 runs until stopped.
Scenario parse_node_config(const std::string& text, const std::string& base_dir, const std::string& origin,
                           const ExtraKeyHandler& extra);
Scenario load_node_config(const std::string& path, const ExtraKeyHandler& extra);

/// Seeds the two link RNGs from the scenario seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

}  // namespace tod::harness
