#include "tod/core/topics.hpp"

#include "tod/core/error.hpp"

namespace tod {

namespace {
constexpr PayloadKind kAllKinds[] = {
    PayloadKind::Heartbeat,  PayloadKind::PrimaryCommand, PayloadKind::SecondaryCommand,
    PayloadKind::VehicleState, PayloadKind::LaserScan,    PayloadKind::FramePacket,
    PayloadKind::ObjectList, PayloadKind::OccupancyGrid,  PayloadKind::LanePolylines,
    PayloadKind::TimeSyncProbe,
};
}  // namespace

std::string_view to_string(PayloadKind kind) noexcept {
  switch (kind) {
    case PayloadKind::Heartbeat: return "heartbeat";
    case PayloadKind::PrimaryCommand: return "primary_command";
    case PayloadKind::SecondaryCommand: return "secondary_command";
    case PayloadKind::VehicleState: return "vehicle_state";
    case PayloadKind::LaserScan: return "laser_scan";
    case PayloadKind::FramePacket: return "frame";
    case PayloadKind::ObjectList: return "object_list";
    case PayloadKind::OccupancyGrid: return "occupancy_grid";
    case PayloadKind::LanePolylines: return "lane";
    case PayloadKind::TimeSyncProbe: return "time_sync";
  }
  return "?";
}

bool parse_payload_kind(std::string_view text, PayloadKind& out) noexcept {
  for (PayloadKind k : kAllKinds) {
    if (to_string(k) == text) {
      out = k;
      return true;
    }
  }
  return false;
}

std::string vehicle_topic(std::string_view vehicle_name, std::string_view channel) {
  std::string topic = "/vehicle/";
  topic += vehicle_name;
  topic += '/';
  topic += channel;
  return topic;
}

TopicRegistry TopicRegistry::standard(std::string_view vehicle_name) {
  using namespace topic_ids;
  TopicRegistry r;
  r.add(kHeartbeat, "/operator/heartbeat", PayloadKind::Heartbeat);
  r.add(kCmdPrimary, "/operator/cmd_primary", PayloadKind::PrimaryCommand);
  r.add(kCmdSecondary, "/operator/cmd_secondary", PayloadKind::SecondaryCommand);
  r.add(kTimeSyncRequest, "/operator/time_sync", PayloadKind::TimeSyncProbe);
  r.add(kVehicleState, vehicle_topic(vehicle_name, "state"), PayloadKind::VehicleState);
  r.add(kTimeSyncReply, vehicle_topic(vehicle_name, "time_sync"), PayloadKind::TimeSyncProbe);
  r.add(kLane, vehicle_topic(vehicle_name, "lane"), PayloadKind::LanePolylines);
  r.add(kGrid, vehicle_topic(vehicle_name, "grid"), PayloadKind::OccupancyGrid);
  return r;
}

void TopicRegistry::add(std::uint16_t id, std::string name, PayloadKind kind) {
  if (by_id_.count(id)) throw Error(ErrorCode::Validation, "duplicate topic id " + std::to_string(id));
  if (by_name_.count(name)) throw Error(ErrorCode::Validation, "duplicate topic name " + name);
  by_name_.emplace(name, id);
  by_id_.emplace(id, TopicEntry{id, std::move(name), kind});
}

std::uint16_t TopicRegistry::next_free(std::uint16_t base) const {
  for (std::uint16_t id = base; id < base + topic_ids::kPerKindSlots; ++id)
    if (!by_id_.count(id)) return id;
  throw Error(ErrorCode::Validation, "no free topic slot above " + std::to_string(base));
}

std::uint16_t TopicRegistry::add_scan(std::string_view vehicle_name, std::string_view sensor) {
  const std::uint16_t id = next_free(topic_ids::kScanBase);
  add(id, vehicle_topic(vehicle_name, "scan/" + std::string(sensor)), PayloadKind::LaserScan);
  return id;
}

std::uint16_t TopicRegistry::add_objects(std::string_view vehicle_name, std::string_view sensor) {
  const std::uint16_t id = next_free(topic_ids::kObjectsBase);
  add(id, vehicle_topic(vehicle_name, "objects/" + std::string(sensor)), PayloadKind::ObjectList);
  return id;
}

std::uint16_t TopicRegistry::add_frame(std::string_view vehicle_name, std::string_view camera) {
  const std::uint16_t id = next_free(topic_ids::kFrameBase);
  add(id, vehicle_topic(vehicle_name, "frame/" + std::string(camera)), PayloadKind::FramePacket);
  return id;
}

const TopicEntry* TopicRegistry::find(std::uint16_t id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &it->second;
}

const TopicEntry* TopicRegistry::find(std::string_view name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? nullptr : find(it->second);
}

std::uint16_t TopicRegistry::id_of(std::string_view name) const {
  const TopicEntry* e = find(name);
  if (!e) throw Error(ErrorCode::UnknownTopic, "unknown topic " + std::string(name));
  return e->id;
}

std::vector<TopicEntry> TopicRegistry::entries() const {
  std::vector<TopicEntry> out;
  out.reserve(by_id_.size());
  for (const auto& [id, e] : by_id_) out.push_back(e);
  return out;
}

}  // namespace tod
