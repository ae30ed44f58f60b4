#include "tod/harness/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include "tod/core/error.hpp"
#include "text.hpp"

namespace tod::harness {

namespace fs = std::filesystem;
using detail::LineParser;
using detail::vehicle_field;

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  net::DeterministicRng rng(seed ^ (stream * 0xD1B54A32D192ED03ull));
  rng.next();
  return rng.next();
}

CommandTrace::Value CommandTrace::at(double t) const {
  Value v;
  if (keys.empty()) return v;
  // Holds: last keyframe at or before t that sets the field.
  std::size_t hi = 0;
  while (hi < keys.size() && keys[hi].t <= t) ++hi;
  for (std::size_t i = 0; i < hi; ++i) {
    const auto& k = keys[i];
    if (k.gear) v.gear = *k.gear;
    if (k.estop) v.estop = *k.estop;
    if (k.indicator) v.indicator = *k.indicator;
  }
  auto interp = [&](auto field) {
    // Neighbouring keyframes that set this field.
    std::optional<std::size_t> before, after;
    for (std::size_t i = 0; i < keys.size(); ++i) {
      if (!(keys[i].*field)) continue;
      if (keys[i].t <= t) before = i;
      else if (!after) after = i;
    }
    if (!before) return 0.0;
    const double a = *(keys[*before].*field);
    if (!after) return a;
    const double b = *(keys[*after].*field);
    const double t0 = keys[*before].t, t1 = keys[*after].t;
    return a + (b - a) * (t - t0) / (t1 - t0);
  };
  v.swa = interp(&TraceKey::swa);
  v.speed = interp(&TraceKey::speed);
  if (sine) v.swa = t >= sine->start ? sine->amplitude * std::sin(2.0 * std::numbers::pi * sine->freq_hz * (t - sine->start)) : 0.0;
  return v;
}

namespace {

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::Validation, field + ": " + why);
}

void check_finite(const std::string& field, double v) {
  if (!std::isfinite(v)) invalid(field, "must be finite");
}

void parse_profile(const LineParser& lp, net::ChannelProfile& p) {
  lp.options(1, {{"delay", [&](std::size_t i) { p.one_way_delay = lp.number(i); }},
                 {"jitter", [&](std::size_t i) { p.jitter = lp.number(i); }},
                 {"loss", [&](std::size_t i) { p.loss_prob = lp.number(i); }},
                 {"queue", [&](std::size_t i) { p.queue_limit = lp.number(i); }},
                 {"cap", [&](std::size_t i) {
                    if (lp.at(i) == "none") p.bandwidth_cap.reset();
                    else p.bandwidth_cap = lp.number(i);
                  }}});
}

}  // namespace

void Scenario::validate() const {
  if (name.empty()) invalid("name", "is required");
  if (!(duration > 0.0 && duration <= 24 * 3600.0)) invalid("duration", "must be in (0, 86400] s");
  try {
    params.validate();
  } catch (const Error& e) {
    invalid("vehicle", e.what());
  }
  const std::pair<const char*, double> rates[] = {
      {"command_rate", command_rate_hz}, {"state_rate", state_rate_hz}, {"plant_rate", plant_rate_hz}};
  for (const auto& [field, r] : rates)
    if (!(r > 0.0 && r <= 10000.0)) invalid(field, "must be in (0, 10000] Hz");
  if (plant_rate_hz < 20.0) invalid("plant_rate", "must be at least 20 Hz");
  for (const auto& [field, prof] : {std::pair{"uplink", &uplink}, std::pair{"downlink", &downlink}}) {
    try {
      prof->validate();
    } catch (const Error& e) {
      invalid(field, e.what());
    }
  }
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    const std::string f = "event[" + std::to_string(i) + "]";
    if (!(e.t >= 0.0 && e.t <= duration)) invalid(f + ".t", "must lie within the run");
    if (i > 0 && e.t < events[i - 1].t) invalid(f + ".t", "events must be in time order");
    if (!e.value && e.field != "cap") invalid(f + ".value", "only cap accepts none");
    net::ChannelProfile probe = uplink;
    if (e.field == "delay") probe.one_way_delay = *e.value;
    else if (e.field == "jitter") probe.jitter = *e.value;
    else if (e.field == "loss") probe.loss_prob = *e.value;
    else if (e.field == "queue") probe.queue_limit = *e.value;
    else if (e.field == "cap") probe.bandwidth_cap = e.value;
    else invalid(f + ".field", "unknown field '" + e.field + "'");
    try {
      probe.validate();
    } catch (const Error& ex) {
      invalid(f, ex.what());
    }
  }
  for (std::size_t i = 0; i < session.size(); ++i) {
    const std::string f = "session[" + std::to_string(i) + "].t";
    if (!(session[i].t >= 0.0 && session[i].t <= duration)) invalid(f, "must lie within the run");
    if (i > 0 && session[i].t < session[i - 1].t) invalid(f, "session steps must be in time order");
  }
  try {
    TransformTree tree(transforms);
    for (std::size_t i = 0; i < sensors.size(); ++i) {
      const std::string f = "sensor[" + std::to_string(i) + "]";
      const auto& s = sensors[i];
      if (s.name.empty()) invalid(f + ".name", "is empty");
      for (std::size_t j = 0; j < i; ++j)
        if (sensors[j].name == s.name) invalid(f + ".name", "duplicate sensor " + s.name);
      try {
        s.scan.validate();
      } catch (const Error& e) {
        invalid(f, e.what());
      }
      if (!tree.has_frame(s.scan.frame_id)) invalid(f + ".frame", "frame '" + s.scan.frame_id + "' has no transform");
      tree.resolve(s.scan.frame_id, "vehicle");
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Validation) throw;
    invalid("transform", e.what());
  }
  for (std::size_t i = 0; i < streams.size(); ++i) {
    const std::string f = "stream[" + std::to_string(i) + "]";
    try {
      streams[i].validate();
    } catch (const Error& e) {
      invalid(f, e.what());
    }
    for (std::size_t j = 0; j < i; ++j)
      if (streams[j].camera_id == streams[i].camera_id) invalid(f + ".camera", "duplicate camera");
  }
  try {
    adapt.validate();
  } catch (const Error& e) {
    invalid("ladder", e.what());
  }
  if (!(display.refresh_hz > 0.0 && display.refresh_hz <= 1000.0)) invalid("display.refresh", "must be in (0, 1000] Hz");
  if (!(display.processing_s >= 0.0 && display.processing_s < 10.0)) invalid("display.processing", "must be in [0, 10) s");
  check_finite("clock_offset", clock_offset_s);
  if (std::abs(clock_offset_s) > 1e6) invalid("clock_offset", "must be within 1e6 s");
  try {
    world.validate();
  } catch (const Error& e) {
    invalid("world", e.what());
  }
  if (!world.bounds.contains(start_pose.x, start_pose.y)) invalid("start_pose", "lies outside the world bounds");

  if (!interactive && trace.keys.empty() && !trace.sine) invalid("trace", "a scripted scenario needs a command trace");
  for (std::size_t i = 0; i < trace.keys.size(); ++i) {
    const auto& k = trace.keys[i];
    const std::string f = "trace[" + std::to_string(i) + "]";
    if (!(k.t >= 0.0) || !std::isfinite(k.t)) invalid(f + ".t", "must be a finite time >= 0");
    if (i > 0 && !(k.t > trace.keys[i - 1].t)) invalid(f + ".t", "timestamps must strictly increase");
    if (k.swa) check_finite(f + ".swa", *k.swa);
    if (k.speed) check_finite(f + ".speed", *k.speed);
  }
  if (trace.end_time() > duration) invalid("duration", "does not cover the trace");
  if (trace.sine) {
    check_finite("sine.amplitude", trace.sine->amplitude);
    if (!(trace.sine->freq_hz > 0.0 && trace.sine->freq_hz < command_rate_hz / 2))
      invalid("sine.freq", "must be in (0, command_rate/2)");
  }
}

namespace {

Scenario parse_impl(const std::string& text, const std::string& base_dir, const std::string& origin,
                    const ExtraKeyHandler* extra) {
  Scenario s;
  s.path = origin;
  LineParser lp;
  lp.origin = origin;
  std::istringstream in(text);
  std::string line;
  std::map<std::string, int> once;
  std::optional<std::string> world_ref;

  while (std::getline(in, line)) {
    ++lp.lineno;
    lp.tok = detail::tokenize(line);
    if (lp.tok.empty()) continue;
    const std::string& key = lp.tok[0];

    static const char* repeatable[] = {"event", "session", "transform", "sensor", "stream", "at"};
    if (std::none_of(std::begin(repeatable), std::end(repeatable), [&](const char* r) { return key == r; }) &&
        once[key]++ > 0)
      lp.fail("'" + key + "' given twice");

    if (key == "name") {
      lp.arity(2);
      s.name = lp.tok[1];
    } else if (key == "world") {
      lp.arity(2);
      world_ref = lp.tok[1];
    } else if (key == "duration") {
      lp.arity(2);
      s.duration = lp.number(1);
    } else if (key == "seed") {
      lp.arity(2);
      s.seed = lp.unsigned_int(1);
    } else if (key == "interactive") {
      lp.arity(2);
      s.interactive = lp.flag(1);
    } else if (key.rfind("vehicle.", 0) == 0) {
      lp.arity(2);
      double* f = vehicle_field(s.params, key.substr(8));
      if (!f) lp.fail("unknown vehicle field '" + key.substr(8) + "'");
      *f = lp.number(1);
    } else if (key == "start_pose") {
      lp.arity(4);
      s.start_pose = {lp.number(1), lp.number(2), lp.number(3)};
    } else if (key == "command_rate") {
      lp.arity(2);
      s.command_rate_hz = lp.number(1);
    } else if (key == "state_rate") {
      lp.arity(2);
      s.state_rate_hz = lp.number(1);
    } else if (key == "plant_rate") {
      lp.arity(2);
      s.plant_rate_hz = lp.number(1);
    } else if (key == "uplink" || key == "downlink") {
      parse_profile(lp, key == "uplink" ? s.uplink : s.downlink);
    } else if (key == "event") {
      lp.arity(5);
      NetworkEvent e;
      e.t = lp.number(1);
      const std::string& link = lp.tok[2];
      if (link == "uplink") e.link = LinkSelector::Uplink;
      else if (link == "downlink") e.link = LinkSelector::Downlink;
      else if (link == "both") e.link = LinkSelector::Both;
      else lp.fail("event link must be uplink, downlink or both");
      e.field = lp.tok[3];
      if (lp.tok[4] != "none") e.value = lp.number(4);
      s.events.push_back(e);
    } else if (key == "session") {
      SessionStep step;
      step.t = lp.number(1);
      if (!op::parse_event_type(lp.at(2), step.event.type)) lp.fail("unknown session event '" + lp.tok[2] + "'");
      auto& e = step.event;
      switch (e.type) {
        case op::ManagerEventType::SelectInputDevice:
          lp.arity(4);
          e.device = lp.tok[3];
          break;
        case op::ManagerEventType::SelectControlMode:
          lp.arity(4);
          if (!op::parse_control_mode(lp.tok[3], e.control_mode)) lp.fail("unknown control mode '" + lp.tok[3] + "'");
          break;
        case op::ManagerEventType::SelectVideoRateMode:
          lp.arity(4);
          if (!perception::parse_stream_mode(lp.tok[3], e.video_rate_mode))
            lp.fail("unknown video rate mode '" + lp.tok[3] + "'");
          break;
        case op::ManagerEventType::SetEndpoints:
          lp.arity(5);
          e.vehicle_endpoint = lp.tok[3];
          e.operator_endpoint = lp.tok[4];
          break;
        default:
          lp.arity(3);
      }
      s.session.push_back(step);
    } else if (key == "transform") {
      lp.arity(9);
      s.transforms.push_back(Transform::from_rpy(lp.tok[1], lp.tok[2], {lp.number(3), lp.number(4), lp.number(5)},
                                                 lp.number(6), lp.number(7), lp.number(8)));
    } else if (key == "sensor") {
      vehicle::SensorConfig sc;
      sc.name = lp.at(1);
      sc.scan.frame_id = sc.name;
      auto& p = sc.scan;
      lp.options(2, {{"frame", [&](std::size_t i) { p.frame_id = lp.at(i); }},
                     {"angle_min", [&](std::size_t i) { p.angle_min = lp.number(i); }},
                     {"angle_max", [&](std::size_t i) { p.angle_max = lp.number(i); }},
                     {"increment", [&](std::size_t i) { p.angle_increment = lp.number(i); }},
                     {"range_min", [&](std::size_t i) { p.range_min = lp.number(i); }},
                     {"range_max", [&](std::size_t i) { p.range_max = lp.number(i); }},
                     {"rate", [&](std::size_t i) { p.rate_hz = lp.number(i); }}});
      s.sensors.push_back(sc);
    } else if (key == "stream") {
      perception::StreamConfig c;
      c.camera_id = lp.at(1);
      lp.options(2, {{"bitrate", [&](std::size_t i) { c.bitrate_bps = lp.number(i); }},
                     {"framerate", [&](std::size_t i) { c.framerate_hz = lp.number(i); }},
                     {"scaling", [&](std::size_t i) { c.scaling = lp.number(i); }},
                     {"paused", [&](std::size_t i) { c.paused = lp.flag(i); }}});
      s.streams.push_back(c);
    } else if (key == "video_rate_mode") {
      lp.arity(2);
      if (!perception::parse_stream_mode(lp.tok[1], s.video_rate_mode)) lp.fail("video_rate_mode is manual or automatic");
    } else if (key == "ladder") {
      if (lp.tok.size() < 2) lp.fail("ladder needs at least one rung");
      s.adapt.ladder.clear();
      for (std::size_t i = 1; i < lp.tok.size(); ++i) s.adapt.ladder.push_back(lp.number(i) * 1e6);
    } else if (key == "adapt") {
      lp.options(1, {{"starve", [&](std::size_t i) { s.adapt.starve_ratio = lp.number(i); }},
                     {"headroom", [&](std::size_t i) { s.adapt.headroom_ratio = lp.number(i); }},
                     {"cooldown", [&](std::size_t i) { s.adapt.cooldown = static_cast<int>(lp.unsigned_int(i)); }}});
    } else if (key == "display") {
      lp.options(1, {{"processing", [&](std::size_t i) { s.display.processing_s = lp.number(i); }},
                     {"refresh", [&](std::size_t i) { s.display.refresh_hz = lp.number(i); }}});
    } else if (key == "clock_offset") {
      lp.arity(2);
      s.clock_offset_s = lp.number(1);
    } else if (key == "at") {
      TraceKey k;
      k.t = lp.number(1);
      lp.options(2, {{"swa", [&](std::size_t i) { k.swa = lp.number(i); }},
                     {"speed", [&](std::size_t i) { k.speed = lp.number(i); }},
                     {"speed_kmh", [&](std::size_t i) { k.speed = lp.number(i) / 3.6; }},
                     {"gear", [&](std::size_t i) {
                        Gear g{};
                        if (!parse_gear(lp.at(i), g)) lp.fail("unknown gear '" + lp.at(i) + "'");
                        k.gear = g;
                      }},
                     {"indicator", [&](std::size_t i) {
                        Indicator ind{};
                        if (!parse_indicator(lp.at(i), ind)) lp.fail("unknown indicator '" + lp.at(i) + "'");
                        k.indicator = ind;
                      }},
                     {"estop", [&](std::size_t i) { k.estop = lp.flag(i); }}});
      s.trace.keys.push_back(k);
    } else if (key == "sine") {
      SineSwa sw;
      lp.options(1, {{"amplitude", [&](std::size_t i) { sw.amplitude = lp.number(i); }},
                     {"freq", [&](std::size_t i) { sw.freq_hz = lp.number(i); }},
                     {"start", [&](std::size_t i) { sw.start = lp.number(i); }}});
      s.trace.sine = sw;
    } else {
      bool handled = false;
      if (extra) {
        try {
          handled = (*extra)(lp.tok);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::Parse) throw;
          lp.fail(e.what());
        }
      }
      if (!handled) lp.fail("unknown key '" + key + "'");
    }
  }

  if (extra) {
    if (!s.trace.keys.empty() || s.trace.sine) invalid("trace", "live nodes take commands from the operator");
    if (!s.session.empty()) invalid("session", "live sessions are driven from the UI");
    s.interactive = true;
    if (s.duration == 0.0) s.duration = 24 * 3600.0;
    if (!world_ref) {
      s.validate();
      return s;
    }
  }
  if (!world_ref) invalid("world", "is required");
  fs::path wp(*world_ref);
  if (wp.is_relative()) wp = fs::path(base_dir) / wp;
  s.world_path = wp.lexically_normal().string();
  if (!fs::exists(wp)) throw Error(ErrorCode::Io, "world file not found: " + s.world_path);
  s.world = vehicle::load_world(s.world_path);
  s.validate();
  return s;
}

std::string read_text(const std::string& path, const char* what) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::Io, std::string("cannot read ") + what + " file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& base_dir, const std::string& origin) {
  return parse_impl(text, base_dir, origin, nullptr);
}

Scenario load_scenario(const std::string& path) {
  return parse_impl(read_text(path, "scenario"), fs::path(path).parent_path().string(), path, nullptr);
}

Scenario parse_node_config(const std::string& text, const std::string& base_dir, const std::string& origin,
                           const ExtraKeyHandler& extra) {
  return parse_impl(text, base_dir, origin, &extra);
}

Scenario load_node_config(const std::string& path, const ExtraKeyHandler& extra) {
  return parse_impl(read_text(path, "config"), fs::path(path).parent_path().string(), path, &extra);
}

}  // namespace tod::harness
