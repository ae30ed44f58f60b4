#include "tod/perception/stream.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "tod/core/error.hpp"

namespace tod::perception {

std::string_view to_string(StreamMode mode) noexcept { return mode == StreamMode::Manual ? "manual" : "automatic"; }

bool parse_stream_mode(std::string_view text, StreamMode& out) noexcept {
  if (text == "manual") out = StreamMode::Manual;
  else if (text == "automatic") out = StreamMode::Automatic;
  else return false;
  return true;
}

void StreamConfig::validate() const {
  if (camera_id.empty()) throw Error(ErrorCode::Validation, "stream.camera is empty");
  if (!(bitrate_bps > 0.0) || !std::isfinite(bitrate_bps)) throw Error(ErrorCode::Validation, "stream.bitrate must be > 0");
  if (!(framerate_hz > 0.0) || framerate_hz > 1000.0) throw Error(ErrorCode::Validation, "stream.framerate must be in (0, 1000]");
  if (!(scaling > 0.0 && scaling <= 1.0)) throw Error(ErrorCode::Validation, "stream.scaling must be in (0, 1]");
  if (crop.width == 0 || crop.height == 0) throw Error(ErrorCode::Validation, "stream.crop is empty");
  if (crop.x + crop.width > nominal_width || crop.y + crop.height > nominal_height)
    throw Error(ErrorCode::Validation, "stream.crop exceeds the nominal frame");
  if (frame_size_bytes() > 65507) throw Error(ErrorCode::Validation, "stream frame size exceeds one datagram");
}

std::uint32_t StreamConfig::frame_size_bytes() const {
  return static_cast<std::uint32_t>(std::ceil(bitrate_bps / (8.0 * framerate_hz) - 1e-9));
}

std::uint16_t StreamConfig::scaled_width() const {
  return static_cast<std::uint16_t>(std::max(1L, std::lround(crop.width * scaling)));
}

std::uint16_t StreamConfig::scaled_height() const {
  return static_cast<std::uint16_t>(std::max(1L, std::lround(crop.height * scaling)));
}

void AdaptParams::validate() const {
  if (ladder.empty()) throw Error(ErrorCode::Validation, "stream ladder is empty");
  if (!std::is_sorted(ladder.begin(), ladder.end()) ||
      std::adjacent_find(ladder.begin(), ladder.end()) != ladder.end() || ladder.front() <= 0.0)
    throw Error(ErrorCode::Validation, "stream ladder must be positive and strictly ascending");
  if (cooldown < 1) throw Error(ErrorCode::Validation, "stream cooldown must be >= 1");
}

StreamController::StreamController(AdaptParams params) : params_(std::move(params)) { params_.validate(); }

StreamConfig StreamController::update(const net::LinkStats& stats, const StreamConfig& cfg) {
  return adapt_stream(stats, cfg, params_, headroom_streak_);
}

StreamConfig adapt_stream(const net::LinkStats& stats, const StreamConfig& cfg, const AdaptParams& params,
                          int& headroom_streak) {
  if (cfg.mode == StreamMode::Manual) {
    headroom_streak = 0;
    return cfg;
  }
  const auto& ladder = params.ladder;
  // Highest rung not above the current bitrate.
  auto it = std::upper_bound(ladder.begin(), ladder.end(), cfg.bitrate_bps * (1 + 1e-12));
  std::size_t rung = it == ladder.begin() ? 0 : static_cast<std::size_t>(it - ladder.begin()) - 1;

  StreamConfig out = cfg;
  if (stats.delivered_bytes_per_s < params.starve_ratio * cfg.bitrate_bps / 8.0) {
    headroom_streak = 0;
    out.bitrate_bps = ladder[rung > 0 && ladder[rung] >= cfg.bitrate_bps * (1 - 1e-12) ? rung - 1 : rung];
    return out;
  }
  if (rung + 1 < ladder.size() && stats.capacity_bytes_per_s &&
      params.headroom_ratio * *stats.capacity_bytes_per_s >= ladder[rung + 1] / 8.0) {
    if (++headroom_streak >= params.cooldown) {
      headroom_streak = 0;
      out.bitrate_bps = ladder[rung + 1];
    }
    return out;
  }
  headroom_streak = 0;
  return out;
}

using nlohmann::json;

std::string video_config_topic(std::string_view camera) { return "/operator/video/" + std::string(camera); }

std::string stream_config_json(const StreamConfig& c) {
  return json{{"camera", c.camera_id},
              {"bitrate", c.bitrate_bps},
              {"framerate", c.framerate_hz},
              {"scaling", c.scaling},
              {"crop", {c.crop.x, c.crop.y, c.crop.width, c.crop.height}},
              {"mode", to_string(c.mode)},
              {"paused", c.paused}}
      .dump();
}

StreamConfig parse_stream_config_json(const std::string& text, const StreamConfig& base) {
  StreamConfig c = base;
  try {
    const json j = json::parse(text);
    if (j.contains("bitrate")) c.bitrate_bps = j.at("bitrate").get<double>();
    if (j.contains("framerate")) c.framerate_hz = j.at("framerate").get<double>();
    if (j.contains("scaling")) c.scaling = j.at("scaling").get<double>();
    if (j.contains("paused")) c.paused = j.at("paused").get<bool>();
    if (j.contains("crop")) {
      const auto& a = j.at("crop");
      c.crop = {a.at(0).get<std::uint16_t>(), a.at(1).get<std::uint16_t>(), a.at(2).get<std::uint16_t>(),
                a.at(3).get<std::uint16_t>()};
    }
    if (j.contains("mode") && !parse_stream_mode(j.at("mode").get<std::string>(), c.mode))
      throw Error(ErrorCode::Parse, "unknown stream mode");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("stream config: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace tod::perception
