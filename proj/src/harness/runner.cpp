#include "tod/harness/runner.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>

#include <nlohmann/json.hpp>

#include "tod/core/error.hpp"
#include "tod/net/emulator.hpp"
#include "tod/operator/node.hpp"

namespace tod::harness {

using net::TimeNs;
using nlohmann::json;

namespace {

// Records what the operator hands to the uplink before passing it on.
class TapTransport final : public net::DatagramTransport {
 public:
  TapTransport(net::DatagramTransport& inner, const net::Scheduler& clock, std::vector<UplinkSend>& out)
      : inner_(inner), clock_(clock), out_(out) {}

  bool send(std::span<const std::uint8_t> bytes) override {
    out_.push_back({clock_.now_ns(), net::peek_topic(bytes).value_or(0xFFFF)});
    return inner_.send(bytes);
  }
  std::optional<net::Datagram> poll() override { return inner_.poll(); }
  void close() override { inner_.close(); }
  bool closed() const override { return inner_.closed(); }

 private:
  net::DatagramTransport& inner_;
  const net::Scheduler& clock_;
  std::vector<UplinkSend>& out_;
};

void apply_event(net::ChannelProfile& p, const NetworkEvent& e) {
  if (e.field == "delay") p.one_way_delay = *e.value;
  else if (e.field == "jitter") p.jitter = *e.value;
  else if (e.field == "loss") p.loss_prob = *e.value;
  else if (e.field == "queue") p.queue_limit = *e.value;
  else if (e.field == "cap") p.bandwidth_cap = e.value;
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

RunResult run_scenario(const Scenario& s, const RunOptions& opts) {
  s.validate();
  if (s.interactive) throw Error(ErrorCode::Validation, "interactive: scenario needs a human operator, use 'tod operator'");
  const std::uint64_t seed = opts.seed.value_or(s.seed);
  const std::string vehicle_name = "ego";

  RunResult r;
  net::VirtualScheduler sched;

  std::vector<std::string> scan_names, camera_names;
  for (const auto& sc : s.sensors) scan_names.push_back(sc.name);
  for (const auto& c : s.streams) camera_names.push_back(c.camera_id);
  const TopicRegistry topics = vehicle::make_registry(vehicle_name, scan_names, camera_names);

  net::ChannelProfile up_profile = s.uplink, down_profile = s.downlink;
  up_profile.seed = mix_seed(seed, 1);
  down_profile.seed = mix_seed(seed, 2);
  auto down_stats = std::make_shared<net::LinkStatsCollector>(1.0);
  net::EmulatedLink uplink(sched, up_profile);
  net::EmulatedLink downlink(sched, down_profile, down_stats);
  TapTransport op_tx(uplink, sched, r.uplink_sends);
  net::ControlBroker broker;
  std::vector<std::unique_ptr<net::EmulatedControlLink>> control_links;

  vehicle::VehicleNodeConfig vc;
  vc.name = vehicle_name;
  vc.params = s.params;
  vc.start_pose = s.start_pose;
  vc.world = s.world;
  vc.transforms = s.transforms;
  vc.sensors = s.sensors;
  vc.streams = s.streams;
  vc.plant_rate_hz = s.plant_rate_hz;
  vc.state_rate_hz = s.state_rate_hz;
  vc.clock_offset_ns = net::seconds_to_ns(s.clock_offset_s);
  vehicle::VehicleNode vehicle(sched, vc, topics, uplink, downlink, broker);

  op::OperatorNodeConfig oc;
  oc.params = s.params;
  oc.command_rate_hz = s.command_rate_hz;
  oc.scene.vehicle_name = vehicle_name;
  oc.scene.params = s.params;
  oc.scene.transforms = s.transforms;
  oc.scene.scans = scan_names;
  oc.scene.cameras = camera_names;
  oc.streams = s.streams;
  oc.adapt = s.adapt;
  op::OperatorNode op(sched, oc, topics, op_tx, downlink, down_stats);

  uplink.set_on_delivery([&] { vehicle.pump(); });
  downlink.set_on_delivery([&] { op.pump(); });

  op.set_pipe_factory([&] {
    control_links.push_back(std::make_unique<net::EmulatedControlLink>(sched, broker, up_profile, down_profile));
    return std::shared_ptr<net::ControlPipe>(std::shared_ptr<void>(), &control_links.back()->client_pipe());
  });
  op.set_command_source([&](TimeNs now) {
    const auto v = s.trace.at(net::ns_to_seconds(now));
    return op::ScriptCommand{v.swa, v.speed, v.gear, v.indicator, v.estop};
  });

  // Display stub: a frame shows at the first refresh after processing.
  const double refresh_ns = 1e9 / s.display.refresh_hz;
  op.on_frame = [&](const FramePacket& f) {
    const double ready = static_cast<double>(sched.now_ns()) + s.display.processing_s * 1e9;
    const auto shown = static_cast<TimeNs>(std::llround(std::ceil(ready / refresh_ns - 1e-9) * refresh_ns));
    sched.at(shown, [&op, cam = f.camera_id, stamp = f.stamp_ns] { op.render_ack(cam, stamp); });
  };

  bool started = false;
  op.on_session = [&](const op::SessionState& st) {
    if (r.phases.empty() || r.phases.back().phase != st.phase) r.phases.push_back({sched.now_ns(), st.phase});
    if (st.phase == op::SessionPhase::Connected && !started) {
      started = true;
      sched.at(sched.now_ns(), [&] {
        op::ManagerEvent e;
        e.type = op::ManagerEventType::SelectInputDevice;
        e.device = op::kScriptDevice;
        op.handle_event(e);
        e.type = op::ManagerEventType::SelectVideoRateMode;
        e.video_rate_mode = s.video_rate_mode;
        op.handle_event(e);
        e.type = op::ManagerEventType::Start;
        op.handle_event(e);
      });
    }
  };

  vehicle.on_abort = [&](const std::string& why) {
    if (r.aborted) return;
    r.aborted = true;
    r.abort_reason = why;
  };

  for (const auto& e : s.events) {
    sched.at(net::seconds_to_ns(e.t), [&, e] {
      if (e.link != LinkSelector::Downlink) {
        apply_event(up_profile, e);
        uplink.set_profile(up_profile);
        for (auto& c : control_links) c->set_uplink(up_profile);
      }
      if (e.link != LinkSelector::Uplink) {
        apply_event(down_profile, e);
        downlink.set_profile(down_profile);
        for (auto& c : control_links) c->set_downlink(down_profile);
      }
    });
  }

  for (const auto& step : s.session)
    sched.at(net::seconds_to_ns(step.t), [&op, e = step.event] { op.handle_event(e); });

  vehicle.start();
  op.start();
  {
    op::ManagerEvent e;
    e.type = op::ManagerEventType::SetEndpoints;
    e.vehicle_endpoint = "emulated:vehicle";
    e.operator_endpoint = "emulated:operator";
    op.handle_event(e);
    e.type = op::ManagerEventType::Connect;
    op.handle_event(e);
  }

  const TimeNs end = net::seconds_to_ns(s.duration);
  const TimeNs step = net::seconds_to_ns(0.1);
  TimeNs t = 0;
  while (t < end && !r.aborted) {
    t = std::min(end, t + step);
    sched.run_until(t);
  }

  r.end_time_s = net::ns_to_seconds(sched.now_ns());
  r.log = op.log();
  r.metrics = op.metrics();
  r.stream_log = op.stream_log();
  r.stream_changes = op.stream_history();
  r.operator_counters = op.counters();
  r.vehicle_counters = vehicle.counters();
  r.final_state = vehicle.state();
  r.clock_offset_ns = op.clock_sync().offset_ns;
  r.frame_acks = op.acks().size();
  return r;
}

std::size_t primaries_outside_teleop(const RunResult& r) {
  std::size_t n = 0;
  for (const auto& send : r.uplink_sends) {
    if (send.topic != topic_ids::kCmdPrimary) continue;
    op::SessionPhase phase = op::SessionPhase::Idle;
    for (const auto& p : r.phases) {
      if (p.t_ns > send.t_ns) break;
      phase = p.phase;
    }
    if (phase != op::SessionPhase::Teleoperating) ++n;
  }
  return n;
}

std::string metrics_json(const RunResult& r, const Scenario& s) {
  json g2g = json::object();
  for (const auto& [cam, v] : r.metrics.g2g_ms) g2g[cam] = v;
  const json j = {
      {"scenario", s.name},
      {"aborted", r.aborted},
      {"abort_reason", r.aborted ? json(r.abort_reason) : json(nullptr)},
      {"end_time_s", r.end_time_s},
      {"rows", r.log.size()},
      {"actuation_latency_ms", opt(r.metrics.actuation_latency_ms)},
      {"swa_rmse", opt(r.metrics.swa_rmse)},
      {"velocity_rmse", opt(r.metrics.velocity_rmse)},
      {"command_rate_hz", opt(r.metrics.command_rate_hz)},
      {"g2g_ms", g2g},
      {"clock_offset_ns", r.clock_offset_ns ? json(*r.clock_offset_ns) : json(nullptr)},
      {"primary_sent", r.operator_counters.primary_sent},
      {"primary_outside_teleop", primaries_outside_teleop(r)},
      {"frames_received", r.operator_counters.frames_received},
      {"frame_acks", r.frame_acks},
      {"stream_changes", r.stream_changes.size()},
      {"stale_commands_dropped", r.vehicle_counters.stale_dropped},
      {"final_pose", {r.final_state.pose.x, r.final_state.pose.y, r.final_state.pose.yaw}},
  };
  return j.dump(2) + "\n";
}

void write_outputs(const RunResult& r, const Scenario& s, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create output directory '" + dir + "': " + ec.message());
  export_logs(r.log, (fs::path(dir) / "log.csv").string());
  auto write = [&](const std::string& name, const std::string& body) {
    const std::string path = (fs::path(dir) / name).string();
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
    f << body;
  };
  write("metrics.json", metrics_json(r, s));
  if (!s.streams.empty()) {
    std::string csv = "t,camera,bitrate_bps,delivered_bytes_per_s,delivered_fps\n";
    char buf[256];
    for (const auto& row : r.stream_log) {
      std::snprintf(buf, sizeof(buf), "%.6f,%s,%.0f,%.6f,%.6f\n", net::ns_to_seconds(row.t_ns), row.camera.c_str(),
                    row.bitrate_bps, row.delivered_bytes_per_s, row.delivered_fps);
      csv += buf;
    }
    write("streams.csv", csv);
  }
}

}  // namespace tod::harness
