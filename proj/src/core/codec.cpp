#include "tod/core/codec.hpp"

#include <string>

#include "tod/core/bytes.hpp"
#include "tod/core/error.hpp"

namespace tod {

namespace {

template <typename E>
E checked_enum(std::uint8_t raw, std::uint8_t max_value, const char* what) {
  if (raw > max_value) throw Error(ErrorCode::InvalidField, std::string("invalid ") + what + " value");
  return static_cast<E>(raw);
}

std::uint16_t checked_count(std::size_t n, const char* what) {
  if (n > 0xFFFF) throw Error(ErrorCode::Oversize, std::string(what) + " has more than 65535 entries");
  return static_cast<std::uint16_t>(n);
}

// --- payload writers, fields in declared order ---

void put(ByteWriter&, const Heartbeat&) {}

void put(ByteWriter& w, const PrimaryCommand& c) {
  w.f64(c.desired_swa);
  w.f64(c.desired_velocity);
  w.u32(c.seq);
  w.u64(c.stamp_ns);
}

void put(ByteWriter& w, const SecondaryCommand& c) {
  w.u8(static_cast<std::uint8_t>(c.gear));
  w.u8(static_cast<std::uint8_t>(c.indicator));
  w.boolean(c.estop_engaged);
  w.u32(c.seq);
  w.u64(c.stamp_ns);
}

void put(ByteWriter& w, const VehicleState& s) {
  w.f64(s.pose.x);
  w.f64(s.pose.y);
  w.f64(s.pose.yaw);
  w.f64(s.velocity);
  w.f64(s.swa);
  w.u8(static_cast<std::uint8_t>(s.gear));
  w.u8(static_cast<std::uint8_t>(s.indicator));
  w.boolean(s.estop_engaged);
  w.u8(static_cast<std::uint8_t>(s.mode));
  w.u64(s.stamp_ns);
}

void put(ByteWriter& w, const LaserScan& s) {
  w.str16(s.frame_id);
  w.f64(s.angle_min);
  w.f64(s.angle_increment);
  w.f64(s.range_min);
  w.f64(s.range_max);
  w.u64(s.stamp_ns);
  w.u16(checked_count(s.ranges.size(), "scan"));
  for (double r : s.ranges) w.f64(r);
}

void put(ByteWriter& w, const FramePacket& f) {
  const std::size_t start = w.size();
  w.str16(f.camera_id);
  w.u32(f.seq);
  w.u64(f.stamp_ns);
  w.u16(f.width);
  w.u16(f.height);
  w.u32(f.simulated_size_bytes);
  w.u64(f.digest);
  // Pad so the whole datagram occupies simulated_size_bytes on the link.
  const std::size_t fields = w.size() - start;
  const std::size_t used = kHeaderSize + fields;
  if (f.simulated_size_bytes > used) {
    const std::size_t pad = f.simulated_size_bytes - used;
    for (std::size_t i = 0; i < pad; ++i)
      w.u8(static_cast<std::uint8_t>((f.digest >> (8 * (i % 8))) ^ (i & 0xFF)));
  }
}

void put(ByteWriter& w, const ObjectList& l) {
  w.str16(l.frame_id);
  w.u64(l.stamp_ns);
  w.u16(checked_count(l.objects.size(), "object list"));
  for (const auto& o : l.objects) {
    w.f64(o.centroid_x);
    w.f64(o.centroid_y);
    w.f64(o.min_x);
    w.f64(o.min_y);
    w.f64(o.max_x);
    w.f64(o.max_y);
    w.u32(o.point_count);
  }
}

void put(ByteWriter& w, const OccupancyGrid& g) {
  w.f64(g.origin_x);
  w.f64(g.origin_y);
  w.f64(g.resolution);
  w.u32(g.width);
  w.u32(g.height);
  w.u64(g.stamp_ns);
  const std::size_t n = static_cast<std::size_t>(g.width) * g.height;
  if (g.cells.size() != n) throw Error(ErrorCode::InvalidField, "grid cell count does not match width*height");
  std::uint8_t acc = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (g.cells[i]) acc |= static_cast<std::uint8_t>(1u << (i % 8));
    if (i % 8 == 7) {
      w.u8(acc);
      acc = 0;
    }
  }
  if (n % 8 != 0) w.u8(acc);
}

void put_points(ByteWriter& w, const std::vector<Point2>& pts) {
  w.u16(checked_count(pts.size(), "polyline"));
  for (const auto& p : pts) {
    w.f64(p.x);
    w.f64(p.y);
  }
}

void put(ByteWriter& w, const LanePolylines& l) {
  w.f64(l.swa_used);
  w.f64(l.horizon);
  w.u64(l.stamp_ns);
  put_points(w, l.left);
  put_points(w, l.right);
}

void put(ByteWriter& w, const TimeSyncProbe& p) {
  w.u64(p.t0);
  w.u64(p.t1);
  w.u64(p.t2);
  w.boolean(p.is_reply);
}

// --- payload readers ---

PrimaryCommand get_primary(ByteReader& r) {
  PrimaryCommand c;
  c.desired_swa = r.f64();
  c.desired_velocity = r.f64();
  c.seq = r.u32();
  c.stamp_ns = r.u64();
  return c;
}

SecondaryCommand get_secondary(ByteReader& r) {
  SecondaryCommand c;
  c.gear = checked_enum<Gear>(r.u8(), 3, "gear");
  c.indicator = checked_enum<Indicator>(r.u8(), 3, "indicator");
  c.estop_engaged = r.boolean();
  c.seq = r.u32();
  c.stamp_ns = r.u64();
  return c;
}

VehicleState get_state(ByteReader& r) {
  VehicleState s;
  s.pose.x = r.f64();
  s.pose.y = r.f64();
  s.pose.yaw = r.f64();
  s.velocity = r.f64();
  s.swa = r.f64();
  s.gear = checked_enum<Gear>(r.u8(), 3, "gear");
  s.indicator = checked_enum<Indicator>(r.u8(), 3, "indicator");
  s.estop_engaged = r.boolean();
  s.mode = checked_enum<DriveMode>(r.u8(), 1, "mode");
  s.stamp_ns = r.u64();
  return s;
}

LaserScan get_scan(ByteReader& r) {
  LaserScan s;
  s.frame_id = r.str16();
  s.angle_min = r.f64();
  s.angle_increment = r.f64();
  s.range_min = r.f64();
  s.range_max = r.f64();
  s.stamp_ns = r.u64();
  const std::uint16_t n = r.u16();
  s.ranges.resize(n);
  for (auto& v : s.ranges) v = r.f64();
  return s;
}

FramePacket get_frame(ByteReader& r) {
  FramePacket f;
  const std::size_t start = r.position();
  f.camera_id = r.str16();
  f.seq = r.u32();
  f.stamp_ns = r.u64();
  f.width = r.u16();
  f.height = r.u16();
  f.simulated_size_bytes = r.u32();
  f.digest = r.u64();
  const std::size_t used = kHeaderSize + (r.position() - start);
  const std::size_t pad = f.simulated_size_bytes > used ? f.simulated_size_bytes - used : 0;
  r.take(pad);
  return f;
}

ObjectList get_objects(ByteReader& r) {
  ObjectList l;
  l.frame_id = r.str16();
  l.stamp_ns = r.u64();
  const std::uint16_t n = r.u16();
  l.objects.resize(n);
  for (auto& o : l.objects) {
    o.centroid_x = r.f64();
    o.centroid_y = r.f64();
    o.min_x = r.f64();
    o.min_y = r.f64();
    o.max_x = r.f64();
    o.max_y = r.f64();
    o.point_count = r.u32();
  }
  return l;
}

OccupancyGrid get_grid(ByteReader& r) {
  OccupancyGrid g;
  g.origin_x = r.f64();
  g.origin_y = r.f64();
  g.resolution = r.f64();
  g.width = r.u32();
  g.height = r.u32();
  g.stamp_ns = r.u64();
  const std::size_t n = static_cast<std::size_t>(g.width) * g.height;
  if (n > kMaxPayloadSize * 8) throw Error(ErrorCode::LengthMismatch, "grid dimensions exceed payload");
  auto packed = r.take((n + 7) / 8);
  g.cells.resize(n);
  for (std::size_t i = 0; i < n; ++i) g.cells[i] = (packed[i / 8] >> (i % 8)) & 1u;
  return g;
}

std::vector<Point2> get_points(ByteReader& r) {
  std::vector<Point2> pts(r.u16());
  for (auto& p : pts) {
    p.x = r.f64();
    p.y = r.f64();
  }
  return pts;
}

LanePolylines get_lane(ByteReader& r) {
  LanePolylines l;
  l.swa_used = r.f64();
  l.horizon = r.f64();
  l.stamp_ns = r.u64();
  l.left = get_points(r);
  l.right = get_points(r);
  return l;
}

TimeSyncProbe get_probe(ByteReader& r) {
  TimeSyncProbe p;
  p.t0 = r.u64();
  p.t1 = r.u64();
  p.t2 = r.u64();
  p.is_reply = r.boolean();
  return p;
}

Payload get_payload(PayloadKind kind, ByteReader& r) {
  switch (kind) {
    case PayloadKind::Heartbeat: return Heartbeat{};
    case PayloadKind::PrimaryCommand: return get_primary(r);
    case PayloadKind::SecondaryCommand: return get_secondary(r);
    case PayloadKind::VehicleState: return get_state(r);
    case PayloadKind::LaserScan: return get_scan(r);
    case PayloadKind::FramePacket: return get_frame(r);
    case PayloadKind::ObjectList: return get_objects(r);
    case PayloadKind::OccupancyGrid: return get_grid(r);
    case PayloadKind::LanePolylines: return get_lane(r);
    case PayloadKind::TimeSyncProbe: return get_probe(r);
  }
  throw Error(ErrorCode::UnknownTopic, "unhandled payload kind");
}

}  // namespace

PayloadKind payload_kind(const Payload& payload) noexcept {
  return static_cast<PayloadKind>(payload.index());
}

std::vector<std::uint8_t> encode_message(const WireMessage& msg) {
  std::vector<std::uint8_t> body;
  ByteWriter pw(body);
  std::visit([&](const auto& p) { put(pw, p); }, msg.payload);
  if (body.size() > kMaxPayloadSize)
    throw Error(ErrorCode::Oversize, "payload of " + std::to_string(body.size()) + " bytes exceeds 65535");

  std::vector<std::uint8_t> out;
  out.reserve(kHeaderSize + body.size());
  ByteWriter w(out);
  w.bytes(kWireMagic);
  w.u8(kWireVersion);
  w.u16(msg.topic_id);
  w.u32(msg.seq);
  w.u64(msg.stamp_ns);
  w.u16(static_cast<std::uint16_t>(body.size()));
  w.bytes(body);
  return out;
}

WireMessage decode_message(std::span<const std::uint8_t> bytes, const TopicRegistry& registry) {
  ByteReader header(bytes, ErrorCode::Truncated);
  auto magic = header.take(kWireMagic.size());
  if (magic[0] != kWireMagic[0] || magic[1] != kWireMagic[1] || magic[2] != kWireMagic[2])
    throw Error(ErrorCode::BadMagic, "bad magic");
  const std::uint8_t version = header.u8();
  if (version != kWireVersion) throw Error(ErrorCode::UnknownVersion, "unknown version " + std::to_string(version));

  WireMessage msg;
  msg.topic_id = header.u16();
  msg.seq = header.u32();
  msg.stamp_ns = header.u64();
  const std::uint16_t payload_len = header.u16();

  if (bytes.size() < kHeaderSize + payload_len) throw Error(ErrorCode::Truncated, "payload truncated");
  if (bytes.size() > kHeaderSize + payload_len)
    throw Error(ErrorCode::LengthMismatch, "trailing bytes after declared payload");

  const TopicEntry* entry = registry.find(msg.topic_id);
  if (!entry) throw Error(ErrorCode::UnknownTopic, "unknown topic id " + std::to_string(msg.topic_id));

  ByteReader body(bytes.subspan(kHeaderSize), ErrorCode::LengthMismatch);
  msg.payload = get_payload(entry->kind, body);
  if (body.remaining() != 0) throw Error(ErrorCode::LengthMismatch, "payload longer than its fields");
  return msg;
}

}  // namespace tod
