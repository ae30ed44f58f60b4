#include "tod/operator/scene.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "tod/core/error.hpp"

namespace tod::op {

using nlohmann::json;

std::string_view to_string(EntityKind kind) noexcept {
  switch (kind) {
    case EntityKind::SceneCamera: return "scene_camera";
    case EntityKind::CoordinateFrame: return "coordinate_frame";
    case EntityKind::VehicleModel: return "vehicle_model";
    case EntityKind::Speedometer: return "speedometer";
    case EntityKind::VideoCanvas: return "video_canvas";
    case EntityKind::LaserScanView: return "laser_scan";
    case EntityKind::VehicleLane: return "vehicle_lane";
    case EntityKind::TopView: return "top_view";
  }
  return "?";
}

SceneRegistry::SceneRegistry(SceneConfig cfg, const TopicRegistry& topics) : cfg_(std::move(cfg)), topics_(topics) {
  tree_.add(Transform{kWorldFrame, kVehicleFrame, Eigen::Vector3d::Zero(), Eigen::Quaterniond::Identity()});
  for (const auto& t : cfg_.transforms) tree_.add(t);

  add({"top_view", EntityKind::TopView, {kVehicleFrame, {}}, TopViewData{}, {"#202020", true}});
  add({"scene_camera", EntityKind::SceneCamera, {kVehicleFrame, {}}, SceneCameraData{"vehicle", 30.0}, {}});
  VehicleModelData vm;
  vm.length = cfg_.params.wheelbase * 1.5;
  vm.width = cfg_.params.track_width;
  add({"vehicle", EntityKind::VehicleModel, {kVehicleFrame, {}}, vm, {"#3070ff", true}});
  add({"speedometer", EntityKind::Speedometer, {kVehicleFrame, {}}, SpeedometerData{}, {}});
  add({"lane", EntityKind::VehicleLane, {kVehicleFrame, {}}, VehicleLaneData{}, {"#30ff70", true}});
  for (const auto& f : tree_.frames())
    add({"frame:" + f, EntityKind::CoordinateFrame, {f, {}}, CoordinateFrameData{}, {"#808080", f == kVehicleFrame}});
  for (const auto& s : cfg_.scans) {
    LaserScanViewData d;
    d.sensor = s;
    add({"scan:" + s, EntityKind::LaserScanView, {kVehicleFrame, {}}, d, {"#ff3030", true}});
  }
  for (const auto& c : cfg_.cameras) {
    VideoCanvasData d;
    d.camera = c;
    add({"video:" + c, EntityKind::VideoCanvas, {kVehicleFrame, {}}, d, {}});
  }
}

void SceneRegistry::add(SceneEntity e) {
  if (find(e.id)) throw Error(ErrorCode::Validation, "duplicate scene entity " + e.id);
  if (!tree_.has_frame(e.transform.frame))
    throw Error(ErrorCode::UnknownFrame, "entity " + e.id + " sits in unknown frame " + e.transform.frame);
  entities_.push_back(std::move(e));
}

const SceneEntity* SceneRegistry::find(std::string_view id) const {
  auto it = std::find_if(entities_.begin(), entities_.end(), [&](const auto& e) { return e.id == id; });
  return it == entities_.end() ? nullptr : &*it;
}

SceneEntity& SceneRegistry::entity(std::string_view id) {
  auto it = std::find_if(entities_.begin(), entities_.end(), [&](const auto& e) { return e.id == id; });
  if (it == entities_.end()) throw Error(ErrorCode::InvalidArgument, "no scene entity " + std::string(id));
  return *it;
}

std::size_t SceneRegistry::count(EntityKind kind) const {
  return static_cast<std::size_t>(std::count_if(entities_.begin(), entities_.end(), [&](const auto& e) { return e.kind == kind; }));
}

void SceneRegistry::set_commanded(double velocity, Gear gear) {
  auto& d = std::get<SpeedometerData>(entity("speedometer").data);
  d.commanded_velocity = velocity;
  d.commanded_gear = gear;
}

std::vector<std::string> SceneRegistry::apply(const WireMessage& msg) {
  const TopicEntry* topic = topics_.find(msg.topic_id);
  if (!topic) {
    ++unknown_topics_;
    return {};
  }
  auto [it, fresh] = last_seq_.try_emplace(msg.topic_id, msg.seq);
  if (!fresh) {
    if (msg.seq <= it->second) {
      ++repeated_;
      return {};
    }
    it->second = msg.seq;
  }
  // Sensor name is the last path element of scan/objects/frame topics.
  const std::string leaf = topic->name.substr(topic->name.rfind('/') + 1);

  return std::visit(
      [&](const auto& p) -> std::vector<std::string> {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, VehicleState>) {
          tree_.set(Transform::from_rpy(kWorldFrame, kVehicleFrame, {p.pose.x, p.pose.y, 0.0}, 0, 0, p.pose.yaw));
          auto& vm = std::get<VehicleModelData>(entity("vehicle").data);
          vm.pose = p.pose;
          vm.swa = p.swa;
          vm.indicator = p.indicator;
          auto& sp = std::get<SpeedometerData>(entity("speedometer").data);
          sp.actual_velocity = p.velocity;
          sp.gear = p.gear;
          sp.estop_engaged = p.estop_engaged;
          sp.mode = p.mode;
          return {"vehicle", "speedometer"};
        } else if constexpr (std::is_same_v<T, LaserScan>) {
          const std::string id = "scan:" + leaf;
          if (!find(id) || !tree_.has_frame(p.frame_id)) return {};
          const Eigen::Isometry3d to_vehicle = tree_.resolve(p.frame_id, kVehicleFrame);
          auto& d = std::get<LaserScanViewData>(entity(id).data);
          d.points.clear();
          for (std::size_t i = 0; i < p.ranges.size(); ++i) {
            if (!p.valid_beam(i)) continue;
            const double a = p.beam_angle(i);
            const Eigen::Vector3d q = to_vehicle * Eigen::Vector3d(p.ranges[i] * std::cos(a), p.ranges[i] * std::sin(a), 0.0);
            d.points.push_back({q.x(), q.y()});
          }
          return {id};
        } else if constexpr (std::is_same_v<T, ObjectList>) {
          const std::string id = "scan:" + leaf;
          if (!find(id)) return {};
          std::get<LaserScanViewData>(entity(id).data).objects = p.objects;
          return {id};
        } else if constexpr (std::is_same_v<T, LanePolylines>) {
          std::get<VehicleLaneData>(entity("lane").data).lane = p;
          return {"lane"};
        } else if constexpr (std::is_same_v<T, OccupancyGrid>) {
          std::get<TopViewData>(entity("top_view").data).grid = p;
          return {"top_view"};
        } else if constexpr (std::is_same_v<T, FramePacket>) {
          const std::string id = "video:" + p.camera_id;
          if (!find(id)) return {};
          auto& d = std::get<VideoCanvasData>(entity(id).data);
          d = {p.camera_id, p.seq, p.stamp_ns, p.width, p.height, p.simulated_size_bytes, p.digest};
          return {id};
        } else {
          return {};
        }
      },
      msg.payload);
}

namespace {

json points_json(const std::vector<Point2>& pts) {
  json a = json::array();
  for (const auto& p : pts) a.push_back({p.x, p.y});
  return a;
}

json data_json(const EntityData& data) {
  return std::visit(
      [](const auto& d) -> json {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, SceneCameraData>) {
          return {{"follow", d.follow}, {"height", d.height}};
        } else if constexpr (std::is_same_v<T, CoordinateFrameData>) {
          return json::object();
        } else if constexpr (std::is_same_v<T, VehicleModelData>) {
          return {{"x", d.pose.x}, {"y", d.pose.y}, {"yaw", d.pose.yaw}, {"length", d.length},
                  {"width", d.width}, {"swa", d.swa}, {"indicator", to_string(d.indicator)}};
        } else if constexpr (std::is_same_v<T, SpeedometerData>) {
          return {{"commanded_velocity", d.commanded_velocity}, {"actual_velocity", d.actual_velocity},
                  {"commanded_gear", to_string(d.commanded_gear)}, {"gear", to_string(d.gear)},
                  {"estop", d.estop_engaged}, {"mode", to_string(d.mode)}};
        } else if constexpr (std::is_same_v<T, VideoCanvasData>) {
          return {{"camera", d.camera}, {"seq", d.seq}, {"stamp_ns", d.stamp_ns}, {"width", d.width},
                  {"height", d.height}, {"bytes", d.bytes}};
        } else if constexpr (std::is_same_v<T, LaserScanViewData>) {
          json objs = json::array();
          for (const auto& o : d.objects)
            objs.push_back({{"x", o.centroid_x}, {"y", o.centroid_y}, {"aabb", {o.min_x, o.min_y, o.max_x, o.max_y}},
                            {"points", o.point_count}});
          return {{"sensor", d.sensor}, {"points", points_json(d.points)}, {"objects", objs}};
        } else if constexpr (std::is_same_v<T, VehicleLaneData>) {
          return {{"swa", d.lane.swa_used}, {"horizon", d.lane.horizon}, {"left", points_json(d.lane.left)},
                  {"right", points_json(d.lane.right)}};
        } else {
          json j = {{"extent", d.extent}};
          if (d.grid) {
            json cells = json::array();
            for (std::size_t i = 0; i < d.grid->cells.size(); ++i)
              if (d.grid->cells[i]) cells.push_back(i);
            j["grid"] = {{"origin", {d.grid->origin_x, d.grid->origin_y}}, {"resolution", d.grid->resolution},
                         {"width", d.grid->width}, {"height", d.grid->height}, {"occupied", cells}};
          }
          return j;
        }
      },
      data);
}

}  // namespace

std::string SceneRegistry::snapshot_json(std::uint64_t stamp_ns) const {
  json ents = json::array();
  for (const auto& e : entities_) {
    ents.push_back({{"id", e.id},
                    {"kind", to_string(e.kind)},
                    {"transform",
                     {{"frame", e.transform.frame},
                      {"x", e.transform.offset.x},
                      {"y", e.transform.offset.y},
                      {"yaw", e.transform.offset.yaw}}},
                    {"data", data_json(e.data)},
                    {"style", {{"color", e.style.color}, {"visible", e.style.visible}}}});
  }
  return json{{"type", "scene_snapshot"}, {"stamp_ns", stamp_ns}, {"entities", ents}}.dump();
}

}  // namespace tod::op
