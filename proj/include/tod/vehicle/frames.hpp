#pragma once

#include <cstdint>
#include <optional>

#include "tod/core/types.hpp"
#include "tod/perception/stream.hpp"

namespace tod::vehicle {

/// One synthetic frame for `cfg` at `now_ns`. The digest stands in for the
/// pixels and depends on camera, sequence number and pose only.
FramePacket generate_frame(const Pose2D& pose, const perception::StreamConfig& cfg, std::uint64_t now_ns,
                           std::uint32_t seq);

/// Sequenced frame source for one camera.
class FrameStream {
 public:
  explicit FrameStream(perception::StreamConfig cfg);

  /// nullopt while paused.
  std::optional<FramePacket> next(const Pose2D& pose, std::uint64_t now_ns);
  /// Throws Error(Validation); keeps the previous config on failure.
  void reconfigure(const perception::StreamConfig& cfg);
  const perception::StreamConfig& config() const noexcept { return cfg_; }

 private:
  perception::StreamConfig cfg_;
  std::uint32_t seq_ = 0;
};

}  // namespace tod::vehicle
