#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tod/net/clock_sync.hpp"
#include "tod/net/control.hpp"
#include "tod/net/datagram.hpp"
#include "tod/operator/inputs.hpp"
#include "tod/operator/manager.hpp"
#include "tod/operator/metrics.hpp"
#include "tod/operator/scene.hpp"
#include "tod/perception/stream.hpp"

namespace tod::op {

/// Device name under which a scripted command source is selected.
inline constexpr const char* kScriptDevice = "script";

struct ScriptCommand {
  double swa = 0.0;
  double velocity = 0.0;
  Gear gear = Gear::Park;
  Indicator indicator = Indicator::Off;
  bool estop = false;
};

using CommandSource = std::function<ScriptCommand(net::TimeNs now_ns)>;
using PipeFactory = std::function<std::shared_ptr<net::ControlPipe>()>;

struct OperatorNodeConfig {
  std::string client_id = "operator";
  VehicleParams params;
  double command_rate_hz = 50.0;
  InputMapping mapping;
  SceneConfig scene;
  std::vector<perception::StreamConfig> streams;
  perception::AdaptParams adapt;
  double stats_window_s = 1.0;
  double time_sync_rate_hz = 1.0;
  double snapshot_rate_hz = 10.0;
  /// Length of the trailing window for the periodic metrics message.
  double metrics_window_s = 10.0;
  net::ControlClientConfig control;

  /// Throws Error(Validation).
  void validate() const;
};

struct LogRow {
  std::int64_t t_ns = 0;
  double desired_swa = 0.0;
  double actual_swa = 0.0;
  double desired_v = 0.0;
  double actual_v = 0.0;
  Gear gear = Gear::Park;
  bool estop = false;
  DriveMode mode = DriveMode::Normal;
};

struct StreamLogRow {
  std::int64_t t_ns = 0;
  std::string camera;
  double bitrate_bps = 0.0;
  double delivered_bytes_per_s = 0.0;
  double delivered_fps = 0.0;
};

struct OperatorCounters {
  std::uint64_t cycles = 0;
  std::uint64_t primary_sent = 0;
  std::uint64_t primary_sent_outside_teleop = 0;
  std::uint64_t send_failures = 0;
  std::uint64_t rejected_events = 0;
  std::uint64_t ui_errors = 0;
  std::uint64_t frames_received = 0;
  std::uint64_t stream_changes = 0;
};

std::string session_json(const SessionState& s, const std::string& reason);
/// Parses the UI form of a manager event. Throws Error(Parse).
ManagerEvent parse_manager_event_json(const std::string& json_text);

/// Operator side: session manager, command dispatch, scene registry, clock
/// sync, stream-rate control and the metrics for the UI.
class OperatorNode {
 public:
  OperatorNode(net::Scheduler& sched, OperatorNodeConfig cfg, const TopicRegistry& topics, net::DatagramTransport& tx,
               net::DatagramTransport& rx, std::shared_ptr<net::LinkStatsCollector> rx_stats);
  ~OperatorNode();

  void set_pipe_factory(PipeFactory factory) { pipe_factory_ = std::move(factory); }
  void set_command_source(CommandSource source) { script_ = std::move(source); }

  void start();
  /// Drains received datagrams.
  void pump();

  Transition handle_event(const ManagerEvent& e);
  void submit_input(const InputSample& sample);
  /// A frame stamp was displayed at the current time.
  /// Throws Error(Validation) unless the frame was received and not yet acknowledged.
  void render_ack(const std::string& camera, std::uint64_t frame_stamp_ns);
  /// One NDJSON line from the UI. Malformed lines produce an error line.
  void handle_ui_line(const std::string& line);

  /// Each received frame, after the scene is updated.
  std::function<void(const FramePacket&)> on_frame;
  /// After every accepted or rejected event and each committed selection.
  std::function<void(const SessionState&)> on_session;
  /// Each line for the UI.
  std::function<void(const std::string&)> on_ui_line;

  const SessionState& session() const noexcept { return session_; }
  const std::vector<LogRow>& log() const noexcept { return log_; }
  const std::vector<StreamLogRow>& stream_log() const noexcept { return stream_log_; }
  const std::vector<FrameAck>& acks() const noexcept { return acks_; }
  /// Every stream configuration this node published, with its time.
  const std::vector<std::pair<std::int64_t, perception::StreamConfig>>& stream_history() const noexcept {
    return stream_history_;
  }
  const net::ClockSync& clock_sync() const noexcept { return sync_.state(); }
  const OperatorCounters& counters() const noexcept { return counters_; }
  const SceneRegistry& scene() const noexcept { return scene_; }
  const std::optional<VehicleState>& last_vehicle_state() const noexcept { return vehicle_state_; }
  std::optional<perception::StreamConfig> stream_config(std::string_view camera) const;
  /// Last retained vehicle status JSON seen on the control channel.
  const std::string& vehicle_status() const noexcept { return vehicle_status_; }
  /// Metrics over the whole log.
  LoopMetrics metrics() const;

  /// Publishes a new configuration for one camera. Throws Error(Validation).
  void configure_stream(const perception::StreamConfig& cfg);

 private:
  struct Camera;

  void command_cycle();
  std::pair<PrimaryCommand, SecondaryCommand> produce_command(std::uint64_t now);
  void run_actions(const std::vector<ManagerAction>& actions);
  void open_channel();
  void close_channel();
  void control_tick();
  void stats_tick();
  void sync_tick();
  void publish_session(const std::string& reason);
  void emit(const std::string& line);
  void emit_metrics();

  net::Scheduler& sched_;
  OperatorNodeConfig cfg_;
  const TopicRegistry& topics_;
  net::DatagramSender sender_;
  net::DatagramHub hub_;
  std::shared_ptr<net::LinkStatsCollector> rx_stats_;
  std::vector<std::shared_ptr<net::Subscription>> subs_;

  SessionState session_;
  SceneRegistry scene_;
  InputMapper mapper_;
  CommandSource script_;
  std::optional<InputSample> latest_input_;
  std::optional<std::pair<PrimaryCommand, SecondaryCommand>> last_mapped_;
  std::uint32_t script_primary_seq_ = 0;
  std::uint32_t script_secondary_seq_ = 0;

  PipeFactory pipe_factory_;
  std::shared_ptr<net::ControlPipe> pipe_;
  std::unique_ptr<net::ControlClient> client_;
  std::shared_ptr<net::ControlStream> status_stream_;
  std::string vehicle_status_;

  net::ClockSyncEstimator sync_;
  std::map<std::uint64_t, bool> probes_in_flight_;
  std::optional<VehicleState> vehicle_state_;
  std::vector<LogRow> log_;
  std::vector<StreamLogRow> stream_log_;
  std::vector<FrameAck> acks_;
  static constexpr std::size_t kMaxAwaitingDisplay = 256;
  std::set<std::pair<std::string, std::uint64_t>> awaiting_display_;
  std::vector<std::pair<std::int64_t, perception::StreamConfig>> stream_history_;
  std::vector<std::unique_ptr<Camera>> cameras_;
  OperatorCounters counters_;
  std::vector<std::unique_ptr<net::PeriodicTask>> tasks_;
  std::unique_ptr<net::PeriodicTask> control_task_;
};

}  // namespace tod::op
