#include "tod/vehicle/frames.hpp"

#include <bit>
#include <cstring>

namespace tod::vehicle {

namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
  h = (h ^ (h >> 30)) * 0xBF58476D1CE4E5B9ull;
  return h ^ (h >> 31);
}

}  // namespace

FramePacket generate_frame(const Pose2D& pose, const perception::StreamConfig& cfg, std::uint64_t now_ns,
                           std::uint32_t seq) {
  FramePacket f;
  f.camera_id = cfg.camera_id;
  f.seq = seq;
  f.stamp_ns = now_ns;
  f.width = cfg.scaled_width();
  f.height = cfg.scaled_height();
  f.simulated_size_bytes = cfg.frame_size_bytes();
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (char c : cfg.camera_id) h = mix(h, static_cast<unsigned char>(c));
  h = mix(h, seq);
  h = mix(h, std::bit_cast<std::uint64_t>(pose.x));
  h = mix(h, std::bit_cast<std::uint64_t>(pose.y));
  h = mix(h, std::bit_cast<std::uint64_t>(pose.yaw));
  f.digest = h;
  return f;
}

FrameStream::FrameStream(perception::StreamConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

std::optional<FramePacket> FrameStream::next(const Pose2D& pose, std::uint64_t now_ns) {
  if (cfg_.paused) return std::nullopt;
  return generate_frame(pose, cfg_, now_ns, ++seq_);
}

void FrameStream::reconfigure(const perception::StreamConfig& cfg) {
  cfg.validate();
  cfg_ = cfg;
}

}  // namespace tod::vehicle
