#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tod {

enum class PayloadKind : std::uint8_t {
  Heartbeat = 0,
  PrimaryCommand,
  SecondaryCommand,
  VehicleState,
  LaserScan,
  FramePacket,
  ObjectList,
  OccupancyGrid,
  LanePolylines,
  TimeSyncProbe,
};

std::string_view to_string(PayloadKind kind) noexcept;
bool parse_payload_kind(std::string_view text, PayloadKind& out) noexcept;

namespace topic_ids {
inline constexpr std::uint16_t kHeartbeat = 0;
inline constexpr std::uint16_t kCmdPrimary = 1;
inline constexpr std::uint16_t kCmdSecondary = 2;
inline constexpr std::uint16_t kTimeSyncRequest = 3;
inline constexpr std::uint16_t kVehicleState = 16;
inline constexpr std::uint16_t kTimeSyncReply = 17;
inline constexpr std::uint16_t kLane = 18;
inline constexpr std::uint16_t kGrid = 19;
inline constexpr std::uint16_t kScanBase = 32;
inline constexpr std::uint16_t kObjectsBase = 48;
inline constexpr std::uint16_t kFrameBase = 64;
inline constexpr std::uint16_t kPerKindSlots = 16;
}  // namespace topic_ids

struct TopicEntry {
  std::uint16_t id = 0;
  std::string name;
  PayloadKind kind = PayloadKind::Heartbeat;
};

/// Numeric topic id <-> name <-> payload kind table.
class TopicRegistry {
 public:
  TopicRegistry() = default;

  /// Operator topics plus the per-vehicle state/lane/grid/time-sync topics.
  static TopicRegistry standard(std::string_view vehicle_name);

  /// Throws Error(Validation) on a duplicate id or name.
  void add(std::uint16_t id, std::string name, PayloadKind kind);
  std::uint16_t add_scan(std::string_view vehicle_name, std::string_view sensor);
  std::uint16_t add_objects(std::string_view vehicle_name, std::string_view sensor);
  std::uint16_t add_frame(std::string_view vehicle_name, std::string_view camera);

  const TopicEntry* find(std::uint16_t id) const;
  const TopicEntry* find(std::string_view name) const;
  /// Throws Error(UnknownTopic).
  std::uint16_t id_of(std::string_view name) const;
  std::vector<TopicEntry> entries() const;

 private:
  std::uint16_t next_free(std::uint16_t base) const;

  std::map<std::uint16_t, TopicEntry> by_id_;
  std::map<std::string, std::uint16_t, std::less<>> by_name_;
};

std::string vehicle_topic(std::string_view vehicle_name, std::string_view channel);

}  // namespace tod
