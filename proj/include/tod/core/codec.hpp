#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "tod/core/topics.hpp"
#include "tod/core/types.hpp"

namespace tod {

using Payload = std::variant<Heartbeat, PrimaryCommand, SecondaryCommand, VehicleState, LaserScan,
                             FramePacket, ObjectList, OccupancyGrid, LanePolylines, TimeSyncProbe>;

PayloadKind payload_kind(const Payload& payload) noexcept;

struct WireMessage {
  std::uint16_t topic_id = 0;
  std::uint32_t seq = 0;
  std::uint64_t stamp_ns = 0;
  Payload payload;

  bool operator==(const WireMessage&) const = default;
};

// Header: magic "TOD", version, topic LE16, seq LE32, stamp LE64, payload_len LE16.
inline constexpr std::array<std::uint8_t, 3> kWireMagic{0x54, 0x4F, 0x44};
inline constexpr std::uint8_t kWireVersion = 1;
inline constexpr std::size_t kHeaderSize = 3 + 1 + 2 + 4 + 8 + 2;
inline constexpr std::size_t kMaxPayloadSize = 65535;

std::vector<std::uint8_t> encode_message(const WireMessage& msg);

/// Throws Error with BadMagic, UnknownVersion, UnknownTopic, LengthMismatch,
/// Truncated or InvalidField.
WireMessage decode_message(std::span<const std::uint8_t> bytes, const TopicRegistry& registry);

}  // namespace tod
