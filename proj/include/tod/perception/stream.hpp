#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tod/net/link_stats.hpp"

namespace tod::perception {

enum class StreamMode : std::uint8_t { Manual = 0, Automatic = 1 };

std::string_view to_string(StreamMode mode) noexcept;
bool parse_stream_mode(std::string_view text, StreamMode& out) noexcept;

struct Crop {
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  std::uint16_t width = 928;
  std::uint16_t height = 520;

  bool operator==(const Crop&) const = default;
};

/// Synthetic video stream settings. The frame size on the link is driven by
/// bitrate and framerate only; scaling and crop change the nominal resolution.
struct StreamConfig {
  std::string camera_id = "front";
  double bitrate_bps = 4e6;
  double framerate_hz = 40.0;
  double scaling = 1.0;
  std::uint16_t nominal_width = 928;
  std::uint16_t nominal_height = 520;
  Crop crop;
  StreamMode mode = StreamMode::Manual;
  bool paused = false;

  /// Throws Error(Validation).
  void validate() const;
  /// ceil(bitrate / (8 * framerate)).
  std::uint32_t frame_size_bytes() const;
  std::uint16_t scaled_width() const;
  std::uint16_t scaled_height() const;

  bool operator==(const StreamConfig&) const = default;
};

struct AdaptParams {
  std::vector<double> ladder{0.5e6, 1e6, 1.5e6, 2.5e6, 4e6, 6e6, 8e6};  // bits/s, ascending
  double starve_ratio = 0.9;
  double headroom_ratio = 0.95;
  int cooldown = 3;  // windows of head-room before stepping up

  void validate() const;
};

/// Per-stream rate controller, called once per statistics window.
class StreamController {
 public:
  explicit StreamController(AdaptParams params);

  StreamConfig update(const net::LinkStats& stats, const StreamConfig& cfg);
  const AdaptParams& params() const noexcept { return params_; }

 private:
  std::size_t rung_of(double bitrate) const;

  AdaptParams params_;
  int headroom_streak_ = 0;
};

/// Control-channel topic carrying reconfiguration requests for a camera.
std::string video_config_topic(std::string_view camera);
/// JSON body of a stream reconfiguration request.
std::string stream_config_json(const StreamConfig& cfg);
/// Applies the fields present in `json_text` on top of `base`, then
/// validates. Throws Error(Parse) or Error(Validation).
StreamConfig parse_stream_config_json(const std::string& json_text, const StreamConfig& base);

/// One controller step with an explicit streak counter.
StreamConfig adapt_stream(const net::LinkStats& stats, const StreamConfig& cfg, const AdaptParams& params,
                          int& headroom_streak);

}  // namespace tod::perception
