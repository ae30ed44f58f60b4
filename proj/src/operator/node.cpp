#include "tod/operator/node.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "tod/core/error.hpp"
#include "tod/core/limits.hpp"

namespace tod::op {

using nlohmann::json;
using net::TimeNs;

namespace {

TimeNs period_ns(double hz) { return static_cast<TimeNs>(std::llround(1e9 / hz)); }

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

void OperatorNodeConfig::validate() const {
  params.validate();
  mapping.validate();
  adapt.validate();
  for (const auto& s : streams) s.validate();
  const std::pair<const char*, double> rates[] = {{"command_rate", command_rate_hz},
                                                  {"time_sync_rate", time_sync_rate_hz},
                                                  {"snapshot_rate", snapshot_rate_hz}};
  for (const auto& [name, r] : rates)
    if (!(r > 0.0 && r <= 1000.0)) throw Error(ErrorCode::Validation, std::string(name) + " must be in (0, 1000] Hz");
  if (!(stats_window_s > 0.0)) throw Error(ErrorCode::Validation, "stats_window must be positive");
  if (!(metrics_window_s > 0.0)) throw Error(ErrorCode::Validation, "metrics_window must be positive");
}

std::string session_json(const SessionState& s, const std::string& reason) {
  json j = {{"type", "session"},
            {"phase", to_string(s.phase)},
            {"vehicle_endpoint", s.vehicle_endpoint},
            {"operator_endpoint", s.operator_endpoint},
            {"input_device", s.active_input_device ? json(*s.active_input_device) : json(nullptr)},
            {"control_mode", to_string(s.control_mode)},
            {"video_rate_mode", perception::to_string(s.video_rate_mode)},
            {"handshake_pending", s.handshake_pending}};
  if (!reason.empty()) j["rejected"] = reason;
  return j.dump();
}

ManagerEvent parse_manager_event_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    ManagerEvent e;
    if (!parse_event_type(j.at("event").get<std::string>(), e.type))
      throw Error(ErrorCode::Parse, "unknown manager event " + j.at("event").get<std::string>());
    e.vehicle_endpoint = j.value("vehicle_endpoint", "");
    e.operator_endpoint = j.value("operator_endpoint", "");
    e.device = j.value("device", "");
    if (j.contains("control_mode") && !parse_control_mode(j["control_mode"].get<std::string>(), e.control_mode))
      throw Error(ErrorCode::Parse, "unknown control mode");
    if (j.contains("video_rate_mode") &&
        !perception::parse_stream_mode(j["video_rate_mode"].get<std::string>(), e.video_rate_mode))
      throw Error(ErrorCode::Parse, "unknown video rate mode");
    return e;
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::Parse, std::string("manager_event: ") + ex.what());
  }
}

struct OperatorNode::Camera {
  perception::StreamConfig cfg;
  perception::StreamController controller;
  std::uint16_t topic = 0;
  std::optional<TimeNs> first_frame_ns;
};

OperatorNode::OperatorNode(net::Scheduler& sched, OperatorNodeConfig cfg, const TopicRegistry& topics,
                           net::DatagramTransport& tx, net::DatagramTransport& rx,
                           std::shared_ptr<net::LinkStatsCollector> rx_stats)
    : sched_(sched),
      cfg_((cfg.validate(), std::move(cfg))),
      topics_(topics),
      sender_(tx),
      hub_(rx, topics),
      rx_stats_(std::move(rx_stats)),
      scene_(cfg_.scene, topics),
      mapper_(cfg_.mapping, cfg_.params) {
  for (const auto& e : topics_.entries())
    if (e.id >= topic_ids::kVehicleState) subs_.push_back(hub_.subscribe(e.id));
  for (const auto& s : cfg_.streams) {
    const auto topic = topics_.id_of(vehicle_topic(cfg_.scene.vehicle_name, "frame/" + s.camera_id));
    cameras_.push_back(std::make_unique<Camera>(Camera{s, perception::StreamController(cfg_.adapt), topic, {}}));
  }
}

OperatorNode::~OperatorNode() = default;

std::optional<perception::StreamConfig> OperatorNode::stream_config(std::string_view camera) const {
  for (const auto& c : cameras_)
    if (c->cfg.camera_id == camera) return c->cfg;
  return std::nullopt;
}

void OperatorNode::start() {
  const TimeNs t0 = sched_.now_ns();
  tasks_.push_back(std::make_unique<net::PeriodicTask>(sched_, t0, period_ns(cfg_.command_rate_hz),
                                                       [this](TimeNs) { command_cycle(); }));
  tasks_.push_back(std::make_unique<net::PeriodicTask>(sched_, t0 + net::seconds_to_ns(cfg_.stats_window_s),
                                                       net::seconds_to_ns(cfg_.stats_window_s),
                                                       [this](TimeNs) { stats_tick(); }));
  tasks_.push_back(std::make_unique<net::PeriodicTask>(sched_, t0, period_ns(cfg_.time_sync_rate_hz),
                                                       [this](TimeNs) { sync_tick(); }));
  tasks_.push_back(std::make_unique<net::PeriodicTask>(sched_, t0, period_ns(cfg_.snapshot_rate_hz), [this](TimeNs) {
    if (on_ui_line) emit(scene_.snapshot_json(static_cast<std::uint64_t>(sched_.now_ns())));
  }));
  tasks_.push_back(std::make_unique<net::PeriodicTask>(sched_, t0 + net::seconds_to_ns(1.0), net::seconds_to_ns(1.0),
                                                       [this](TimeNs) { emit_metrics(); }));
  publish_session("");
}

void OperatorNode::emit(const std::string& line) {
  if (on_ui_line) on_ui_line(line);
}

// --- session ---

Transition OperatorNode::handle_event(const ManagerEvent& e) {
  Transition t = manager_transition(session_, e);
  if (!t.accepted) {
    ++counters_.rejected_events;
    publish_session(t.reason);
    return t;
  }
  session_ = t.state;
  run_actions(t.actions);
  publish_session("");
  return t;
}

void OperatorNode::run_actions(const std::vector<ManagerAction>& actions) {
  for (auto a : actions) {
    switch (a) {
      case ManagerAction::OpenControlChannel: open_channel(); break;
      case ManagerAction::CloseControlChannel: close_channel(); break;
      // Dispatch follows the session phase at each command cycle.
      case ManagerAction::StartDispatch:
      case ManagerAction::StopDispatch: break;
    }
  }
}

void OperatorNode::open_channel() {
  close_channel();
  if (!pipe_factory_) return;
  try {
    pipe_ = pipe_factory_();
  } catch (const Error& e) {
    emit(json{{"type", "error"}, {"message", e.what()}}.dump());
    return;
  }
  client_ = std::make_unique<net::ControlClient>(sched_, cfg_.control);
  client_->on_connected = [this] {
    ManagerEvent ack;
    ack.type = ManagerEventType::ConnectAck;
    handle_event(ack);
    for (const auto& c : cameras_) {
      try {
        client_->publish(perception::video_config_topic(c->cfg.camera_id),
                         net::to_bytes(perception::stream_config_json(c->cfg)), true);
      } catch (const Error&) {
      }
    }
  };
  client_->on_lost = [this] {
    ManagerEvent lost;
    lost.type = ManagerEventType::ControlChannelLost;
    handle_event(lost);
  };
  status_stream_ = client_->subscribe("/vehicle/+/status");
  client_->connect(*pipe_);
  control_task_ = std::make_unique<net::PeriodicTask>(sched_, sched_.now_ns(), net::seconds_to_ns(0.01),
                                                      [this](TimeNs) { control_tick(); });
}

void OperatorNode::close_channel() {
  if (control_task_) control_task_->cancel();
  control_task_.reset();
  if (pipe_) pipe_->close();
  // The client may be mid-callback; retire it on the scheduler.
  if (client_) {
    std::shared_ptr<net::ControlClient> old(client_.release());
    std::shared_ptr<net::ControlPipe> old_pipe = std::move(pipe_);
    sched_.at(sched_.now_ns(), [old, old_pipe] {});
  }
  pipe_.reset();
  status_stream_.reset();
}

void OperatorNode::control_tick() {
  if (!client_) return;
  client_->tick();
  if (!status_stream_) return;
  while (auto d = status_stream_->poll()) vehicle_status_ = net::to_text(d->payload);
}

void OperatorNode::publish_session(const std::string& reason) {
  const std::string line = session_json(session_, reason);
  if (client_ && client_->connected()) {
    try {
      client_->publish("/operator/session", net::to_bytes(line), true);
    } catch (const Error&) {
    }
  }
  emit(line);
  if (on_session) on_session(session_);
}

// --- commands ---

void OperatorNode::submit_input(const InputSample& sample) {
  sample.validate();
  latest_input_ = sample;
}

std::pair<PrimaryCommand, SecondaryCommand> OperatorNode::produce_command(std::uint64_t now) {
  const auto& device = session_.active_input_device;
  if (device && *device == kScriptDevice && script_) {
    const ScriptCommand c = script_(static_cast<TimeNs>(now));
    PrimaryCommand p{c.swa, c.velocity, ++script_primary_seq_, now};
    SecondaryCommand s{c.gear, c.indicator, c.estop, ++script_secondary_seq_, now};
    return {clamp_primary(p, cfg_.params), s};
  }
  if (device && latest_input_ && latest_input_->device == *device) {
    if (auto m = mapper_.map(*latest_input_, now)) last_mapped_ = *m;
  }
  if (last_mapped_) {
    last_mapped_->first.stamp_ns = now;
    last_mapped_->second.stamp_ns = now;
    return *last_mapped_;
  }
  return {PrimaryCommand{0.0, 0.0, 0, now}, mapper_.secondary()};
}

void OperatorNode::command_cycle() {
  ++counters_.cycles;
  const SessionState before = session_;
  session_ = apply_pending(session_);
  if (!(session_ == before)) publish_session("");

  const auto now = static_cast<std::uint64_t>(sched_.now_ns());
  std::pair<PrimaryCommand, SecondaryCommand> cmd;
  try {
    cmd = produce_command(now);
  } catch (const Error& e) {
    ++counters_.ui_errors;
    emit(json{{"type", "error"}, {"message", e.what()}}.dump());
    cmd = {PrimaryCommand{0.0, 0.0, 0, now}, mapper_.secondary()};
  }
  const auto& [primary, secondary] = cmd;

  if (session_.phase == SessionPhase::Teleoperating) {
    try {
      sender_.send(topic_ids::kCmdSecondary, secondary, now);
      sender_.send(topic_ids::kCmdPrimary, primary, now);
      ++counters_.primary_sent;
    } catch (const Error&) {
      ++counters_.send_failures;
    }
  }

  LogRow row;
  row.t_ns = sched_.now_ns();
  row.desired_swa = primary.desired_swa;
  row.desired_v = primary.desired_velocity;
  if (vehicle_state_) {
    row.actual_swa = vehicle_state_->swa;
    row.actual_v = vehicle_state_->velocity;
    row.gear = vehicle_state_->gear;
    row.estop = vehicle_state_->estop_engaged;
    row.mode = vehicle_state_->mode;
  }
  log_.push_back(row);
  scene_.set_commanded(primary.desired_velocity, secondary.gear);
}

// --- downlink ---

void OperatorNode::pump() {
  hub_.pump();
  for (auto& sub : subs_) {
    while (auto r = sub->poll()) {
      const WireMessage& msg = r->msg;
      if (msg.topic_id == topic_ids::kTimeSyncReply) {
        const auto& p = std::get<TimeSyncProbe>(msg.payload);
        if (p.is_reply && probes_in_flight_.erase(p.t0))
          sync_.add(p.t0, p.t1, p.t2, static_cast<std::uint64_t>(r->recv_ns));
        continue;
      }
      if (r->stale) continue;
      scene_.apply(msg);
      if (msg.topic_id == topic_ids::kVehicleState) {
        vehicle_state_ = std::get<VehicleState>(msg.payload);
      } else if (const auto* f = std::get_if<FramePacket>(&msg.payload)) {
        ++counters_.frames_received;
        awaiting_display_.insert({f->camera_id, f->stamp_ns});
        // Frames the display never acknowledges age out.
        if (awaiting_display_.size() > kMaxAwaitingDisplay) awaiting_display_.erase(awaiting_display_.begin());
        for (auto& c : cameras_)
          if (c->topic == msg.topic_id && !c->first_frame_ns) c->first_frame_ns = r->recv_ns;
        if (on_frame) on_frame(*f);
      }
    }
  }
}

void OperatorNode::render_ack(const std::string& camera, std::uint64_t frame_stamp_ns) {
  auto it = awaiting_display_.find({camera, frame_stamp_ns});
  if (it == awaiting_display_.end())
    throw Error(ErrorCode::Validation, "render_ack for a frame that was not received: " + camera + " @ " +
                                           std::to_string(frame_stamp_ns));
  awaiting_display_.erase(it);
  acks_.push_back(FrameAck{camera, frame_stamp_ns, sched_.now_ns()});
}

void OperatorNode::sync_tick() {
  const auto t0 = static_cast<std::uint64_t>(sched_.now_ns());
  // Keeps the table bounded when replies never come back.
  if (probes_in_flight_.size() > 64) probes_in_flight_.erase(probes_in_flight_.begin());
  probes_in_flight_[t0] = true;
  try {
    sender_.send(topic_ids::kTimeSyncRequest, TimeSyncProbe{t0, 0, 0, false}, t0);
  } catch (const Error&) {
    ++counters_.send_failures;
  }
}

// --- streams ---

void OperatorNode::configure_stream(const perception::StreamConfig& cfg) {
  cfg.validate();
  for (auto& c : cameras_) {
    if (c->cfg.camera_id != cfg.camera_id) continue;
    c->cfg = cfg;
    ++counters_.stream_changes;
    stream_history_.emplace_back(sched_.now_ns(), cfg);
    if (client_ && client_->connected()) {
      try {
        client_->publish(perception::video_config_topic(cfg.camera_id), net::to_bytes(perception::stream_config_json(cfg)),
                         true);
      } catch (const Error&) {
      }
    }
    return;
  }
  throw Error(ErrorCode::Validation, "unknown camera " + cfg.camera_id);
}

void OperatorNode::stats_tick() {
  if (!rx_stats_) return;
  const TimeNs now = sched_.now_ns();
  const TimeNs window = net::seconds_to_ns(cfg_.stats_window_s);
  for (auto& c : cameras_) {
    const net::LinkStats stats = rx_stats_->snapshot(now, c->topic);
    stream_log_.push_back(StreamLogRow{now, c->cfg.camera_id, c->cfg.bitrate_bps, stats.delivered_bytes_per_s,
                                       stats.delivered_datagrams_per_s});
    // A window that does not yet cover a full second of the stream says
    // nothing about the link.
    if (!c->first_frame_ns || now - *c->first_frame_ns < window) continue;
    perception::StreamConfig current = c->cfg;
    current.mode = session_.video_rate_mode;
    const perception::StreamConfig next = c->controller.update(stats, current);
    if (next.bitrate_bps != c->cfg.bitrate_bps) configure_stream(next);
  }
}

// --- metrics and UI ---

LoopMetrics OperatorNode::metrics() const {
  std::vector<SignalSample> window;
  window.reserve(log_.size());
  for (const auto& r : log_) window.push_back({r.t_ns, r.desired_swa, r.actual_swa, r.desired_v, r.actual_v});
  MetricsParams p;
  p.command_period_s = 1.0 / cfg_.command_rate_hz;
  return compute_metrics(window, acks_, sync_.state(), p);
}

void OperatorNode::emit_metrics() {
  if (!on_ui_line) return;
  const TimeNs from = sched_.now_ns() - net::seconds_to_ns(cfg_.metrics_window_s);
  std::vector<SignalSample> window;
  for (const auto& r : log_)
    if (r.t_ns >= from) window.push_back({r.t_ns, r.desired_swa, r.actual_swa, r.desired_v, r.actual_v});
  std::vector<FrameAck> acks;
  for (const auto& a : acks_)
    if (a.ack_ns >= from) acks.push_back(a);
  MetricsParams p;
  p.command_period_s = 1.0 / cfg_.command_rate_hz;
  const LoopMetrics m = compute_metrics(window, acks, sync_.state(), p);
  json j = {{"type", "metrics"},
            {"actuation_latency_ms", optional_number(m.actuation_latency_ms)},
            {"swa_rmse", optional_number(m.swa_rmse)},
            {"velocity_rmse", optional_number(m.velocity_rmse)},
            {"command_rate_hz", optional_number(m.command_rate_hz)},
            {"g2g_ms", m.g2g_ms},
            {"clock_offset_ns", sync_.state().offset_ns ? json(*sync_.state().offset_ns) : json(nullptr)},
            {"vehicle_status", vehicle_status_.empty() ? json(nullptr) : json::parse(vehicle_status_, nullptr, false)}};
  emit(j.dump());
}

void OperatorNode::handle_ui_line(const std::string& line) {
  try {
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Parse, std::string("ui line is not JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("type")) throw Error(ErrorCode::Parse, "ui message has no type");
    const std::string type = j["type"].get<std::string>();
    if (type == "input_sample") {
      InputSample s;
      s.device = j.value("device", cfg_.mapping.device);
      s.axes = j.value("axes", std::vector<double>{});
      s.buttons = j.value("buttons", std::vector<bool>{});
      s.stamp_ns = static_cast<std::uint64_t>(sched_.now_ns());
      submit_input(s);
    } else if (type == "manager_event") {
      handle_event(parse_manager_event_json(line));
    } else if (type == "render_ack") {
      render_ack(j.at("camera").get<std::string>(), j.at("stamp").get<std::uint64_t>());
    } else if (type == "stream_config") {
      const auto cam = j.at("camera").get<std::string>();
      const auto current = stream_config(cam);
      if (!current) throw Error(ErrorCode::Validation, "unknown camera " + cam);
      configure_stream(perception::parse_stream_config_json(line, *current));
    } else {
      throw Error(ErrorCode::Parse, "unknown ui message type " + type);
    }
  } catch (const json::exception& e) {
    ++counters_.ui_errors;
    emit(json{{"type", "error"}, {"message", e.what()}}.dump());
  } catch (const Error& e) {
    ++counters_.ui_errors;
    emit(json{{"type", "error"}, {"message", e.what()}}.dump());
  }
}

}  // namespace tod::op
