#include "tod/vehicle/node.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "tod/core/error.hpp"
#include "tod/perception/grid.hpp"
#include "tod/perception/lane.hpp"

namespace tod::vehicle {

using nlohmann::json;
using net::TimeNs;

namespace {

TimeNs period_ns(double hz) { return static_cast<TimeNs>(std::llround(1e9 / hz)); }

}  // namespace

void VehicleNodeConfig::validate() const {
  if (name.empty()) throw Error(ErrorCode::Validation, "vehicle.name is empty");
  params.validate();
  world.validate();
  for (double r : {plant_rate_hz, state_rate_hz, lane_rate_hz})
    if (!(r > 0.0 && r <= 10000.0)) throw Error(ErrorCode::Validation, "node rates must be in (0, 10000] Hz");
  if (1.0 / plant_rate_hz > 0.05) throw Error(ErrorCode::Validation, "plant rate must be at least 20 Hz");
  TransformTree tree(transforms);
  for (const auto& s : sensors) {
    s.scan.validate();
    if (!tree.has_frame(s.scan.frame_id))
      throw Error(ErrorCode::Validation, "sensor " + s.name + " frame " + s.scan.frame_id + " has no transform");
    tree.resolve(s.scan.frame_id, "vehicle");
  }
  for (const auto& c : streams) c.validate();
  if (sensors.size() > net::kMaxDatagramSize) throw Error(ErrorCode::Validation, "too many sensors");
  if (!world.bounds.contains(start_pose.x, start_pose.y))
    throw Error(ErrorCode::Validation, "start_pose lies outside the world bounds");
}

TopicRegistry make_registry(std::string_view vehicle_name, const std::vector<std::string>& scans,
                            const std::vector<std::string>& cameras) {
  TopicRegistry r = TopicRegistry::standard(vehicle_name);
  for (const auto& s : scans) {
    r.add_scan(vehicle_name, s);
    r.add_objects(vehicle_name, s);
  }
  for (const auto& c : cameras) r.add_frame(vehicle_name, c);
  return r;
}

std::string status_topic(std::string_view vehicle_name) { return vehicle_topic(vehicle_name, "status"); }
struct VehicleNode::Camera {
  FrameStream stream;
  std::uint16_t topic = 0;
  std::unique_ptr<net::PeriodicTask> task;
};

VehicleNode::VehicleNode(net::Scheduler& sched, VehicleNodeConfig cfg, const TopicRegistry& topics,
                         net::DatagramTransport& rx, net::DatagramTransport& tx, net::ControlBroker& broker)
    : sched_(sched),
      cfg_((cfg.validate(), std::move(cfg))),
      topics_(topics),
      sender_(tx),
      hub_(rx, topics),
      broker_(broker),
      plant_(cfg_.params, cfg_.start_pose),
      watchdog_(cfg_.params.command_timeout),
      tree_(cfg_.transforms) {
  sub_primary_ = hub_.subscribe(topic_ids::kCmdPrimary);
  sub_secondary_ = hub_.subscribe(topic_ids::kCmdSecondary);
  sub_sync_ = hub_.subscribe(topic_ids::kTimeSyncRequest);
  for (const auto& s : cfg_.sensors) {
    scan_topics_.push_back(topics_.id_of(vehicle_topic(cfg_.name, "scan/" + s.name)));
    object_topics_.push_back(topics_.id_of(vehicle_topic(cfg_.name, "objects/" + s.name)));
    sensor_mounts_.push_back(tree_.resolve(s.scan.frame_id, "vehicle"));
  }
  for (const auto& sc : cfg_.streams) {
    auto cam = std::make_unique<Camera>(Camera{FrameStream(sc), topics_.id_of(vehicle_topic(cfg_.name, "frame/" + sc.camera_id)), nullptr});
    cameras_.push_back(std::move(cam));
  }
  actuation_.gear = plant_.state().gear;
}

VehicleNode::~VehicleNode() {
  if (local_session_) broker_.detach(local_session_);
}

std::uint64_t VehicleNode::clock_ns() const { return static_cast<std::uint64_t>(sched_.now_ns() + cfg_.clock_offset_ns); }

std::optional<perception::StreamConfig> VehicleNode::stream_config(std::string_view camera) const {
  for (const auto& c : cameras_)
    if (c->stream.config().camera_id == camera) return c->stream.config();
  return std::nullopt;
}

void VehicleNode::start() {
  local_session_ = broker_.attach(
      [this](const net::ControlFrame& f) {
        if (f.type == net::ControlFrameType::Pub || f.type == net::ControlFrameType::PubRetain)
          pending_control_.emplace_back(f.topic, f.payload);
      },
      sched_.now_ns());
  broker_.handle(local_session_, {net::ControlFrameType::Sub, "/operator/video/+", {}}, sched_.now_ns());

  const TimeNs t0 = sched_.now_ns();
  const TimeNs plant_period = period_ns(cfg_.plant_rate_hz);
  tasks_.push_back(std::make_unique<net::PeriodicTask>(sched_, t0, plant_period, [this](TimeNs) { plant_tick(); }));
  tasks_.push_back(std::make_unique<net::PeriodicTask>(sched_, t0, period_ns(cfg_.state_rate_hz),
                                                       [this](TimeNs) { publish_state(); }));
  tasks_.push_back(std::make_unique<net::PeriodicTask>(sched_, t0, period_ns(cfg_.lane_rate_hz),
                                                       [this](TimeNs) { lane_tick(); }));
  for (std::size_t i = 0; i < cfg_.sensors.size(); ++i)
    tasks_.push_back(std::make_unique<net::PeriodicTask>(sched_, t0, period_ns(cfg_.sensors[i].scan.rate_hz),
                                                         [this, i](TimeNs) { scan_tick(i); }));
  for (auto& c : cameras_) arm_camera(*c);
  publish_status();
}

void VehicleNode::arm_camera(Camera& cam) {
  cam.task = std::make_unique<net::PeriodicTask>(sched_, sched_.now_ns(), period_ns(cam.stream.config().framerate_hz),
                                                 [this, &cam](TimeNs) { frame_tick(cam); });
}

void VehicleNode::send(std::uint16_t topic, Payload payload) {
  try {
    sender_.send(topic, std::move(payload), clock_ns());
  } catch (const Error&) {
    ++counters_.send_failures;
  }
}

void VehicleNode::pump() {
  hub_.pump();
  bool primary = false, secondary = false;
  while (auto r = sub_secondary_->poll()) {
    if (r->stale) {
      ++counters_.stale_dropped;
      continue;
    }
    last_secondary_ = std::get<SecondaryCommand>(r->msg.payload);
    secondary = true;
  }
  while (auto r = sub_primary_->poll()) {
    if (r->stale) {
      ++counters_.stale_dropped;
      continue;
    }
    last_primary_ = std::get<PrimaryCommand>(r->msg.payload);
    primary = true;
  }
  if (primary || secondary) ingest(primary);
  while (auto r = sub_sync_->poll()) {
    auto probe = std::get<TimeSyncProbe>(r->msg.payload);
    if (probe.is_reply) continue;
    probe.t1 = probe.t2 = clock_ns();
    probe.is_reply = true;
    send(topic_ids::kTimeSyncReply, probe);
  }
}

void VehicleNode::ingest(bool from_primary) {
  if (!last_primary_) return;
  try {
    actuation_ = ingest_command(*last_primary_, last_secondary_, plant_.state(), cfg_.params, clock_ns());
    ++counters_.commands_applied;
    if (from_primary) last_cmd_ns_ = sched_.now_ns();
  } catch (const Error&) {
    ++counters_.rejected;
  }
}

void VehicleNode::plant_tick() {
  for (auto& [topic, payload] : pending_control_) {
    for (auto& cam : cameras_) {
      if (perception::video_config_topic(cam->stream.config().camera_id) != topic) continue;
      try {
        const auto before = cam->stream.config();
        cam->stream.reconfigure(perception::parse_stream_config_json(net::to_text(payload), before));
        if (cam->stream.config().framerate_hz != before.framerate_hz) arm_camera(*cam);
      } catch (const Error&) {
        ++counters_.rejected;
      }
    }
  }
  pending_control_.clear();

  const bool estop = actuation_.estop_engaged;
  const DriveMode mode = watchdog_.update(last_cmd_ns_, sched_.now_ns(), plant_.state().velocity, estop);
  plant_.step(actuation_, 1.0 / cfg_.plant_rate_hz, mode);
  if (plant_.state().mode != last_status_mode_) publish_status();

  const auto& p = plant_.state().pose;
  if (!aborted_ && !cfg_.world.bounds.contains(p.x, p.y)) {
    aborted_ = true;
    if (on_abort) {
      char buf[128];
      std::snprintf(buf, sizeof(buf), "vehicle left the world bounds at (%.3f, %.3f)", p.x, p.y);
      on_abort(buf);
    }
  }
}

void VehicleNode::publish_state() {
  VehicleState s = plant_.state();
  s.stamp_ns = clock_ns();
  send(topic_ids::kVehicleState, s);
}

void VehicleNode::publish_status() {
  last_status_mode_ = plant_.state().mode;
  const json status = {{"vehicle", cfg_.name}, {"ready", true}, {"mode", to_string(plant_.state().mode)}};
  broker_.publish(status_topic(cfg_.name), net::to_bytes(status.dump()), true);
  status_sent_ = true;
}

void VehicleNode::scan_tick(std::size_t i) {
  const auto& sensor = cfg_.sensors[i];
  const LaserScan scan = scan_world(plant_.state().pose, cfg_.world, sensor.scan, sensor_mounts_[i], clock_ns());
  send(scan_topics_[i], scan);
  ++counters_.scans_sent;
  send(object_topics_[i], perception::cluster_scan(scan, cfg_.cluster));
  if (i == 0) {
    const auto& pose = plant_.state().pose;
    auto grid = perception::build_grid(
        scan, pose, sensor_mounts_[i], perception::centered_grid_spec(pose.x, pose.y, cfg_.grid_extent, cfg_.grid_resolution));
    counters_.grid_ignored += grid.ignored;
    send(topic_ids::kGrid, std::move(grid.grid));
  }
}

void VehicleNode::lane_tick() {
  send(topic_ids::kLane,
       perception::predict_lane(plant_.state().swa, cfg_.params, cfg_.lane_horizon, cfg_.lane_points, clock_ns()));
}

void VehicleNode::frame_tick(Camera& cam) {
  if (auto f = cam.stream.next(plant_.state().pose, clock_ns())) {
    send(cam.topic, std::move(*f));
    ++counters_.frames_sent;
  }
}

}  // namespace tod::vehicle
