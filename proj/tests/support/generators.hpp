#pragma once

// Seeded random generators for property tests.

#include <cstdint>
#include <random>
#include <string>

#include "tod/core/codec.hpp"
#include "tod/core/topics.hpp"
#include "tod/core/types.hpp"

namespace tod::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  std::uint64_t u64() { return rng_(); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(rng_()); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin() { return (rng_() & 1u) != 0; }

  std::string name(int max_len = 12) {
    std::string s(static_cast<std::size_t>(integer(0, max_len)), 'a');
    for (auto& c : s) c = static_cast<char>('a' + integer(0, 25));
    return s;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline TopicRegistry property_registry() {
  TopicRegistry r = TopicRegistry::standard("ego");
  r.add_scan("ego", "front");
  r.add_objects("ego", "front");
  r.add_frame("ego", "front");
  return r;
}

inline Pose2D random_pose(Gen& g) { return {g.real(-1e3, 1e3), g.real(-1e3, 1e3), g.real(-3.14, 3.14)}; }

/// Random message whose payload has the given kind, routed on a topic of
/// that kind in property_registry().
inline WireMessage random_message(Gen& g, PayloadKind kind) {
  WireMessage m;
  m.seq = g.u32();
  m.stamp_ns = g.u64();
  switch (kind) {
    case PayloadKind::Heartbeat:
      m.topic_id = topic_ids::kHeartbeat;
      m.payload = Heartbeat{};
      break;
    case PayloadKind::PrimaryCommand:
      m.topic_id = topic_ids::kCmdPrimary;
      m.payload = PrimaryCommand{g.real(-8, 8), g.real(-10, 10), g.u32(), g.u64()};
      break;
    case PayloadKind::SecondaryCommand:
      m.topic_id = topic_ids::kCmdSecondary;
      m.payload = SecondaryCommand{static_cast<Gear>(g.integer(0, 3)), static_cast<Indicator>(g.integer(0, 3)),
                                   g.coin(), g.u32(), g.u64()};
      break;
    case PayloadKind::VehicleState: {
      m.topic_id = topic_ids::kVehicleState;
      VehicleState s;
      s.pose = random_pose(g);
      s.velocity = g.real(-10, 10);
      s.swa = g.real(-8, 8);
      s.gear = static_cast<Gear>(g.integer(0, 3));
      s.indicator = static_cast<Indicator>(g.integer(0, 3));
      s.estop_engaged = g.coin();
      s.mode = static_cast<DriveMode>(g.integer(0, 1));
      s.stamp_ns = g.u64();
      m.payload = s;
      break;
    }
    case PayloadKind::LaserScan: {
      m.topic_id = topic_ids::kScanBase;
      LaserScan s;
      s.frame_id = g.name();
      s.angle_min = g.real(-3, 0);
      s.angle_increment = g.real(1e-3, 1e-2);
      s.range_min = g.real(0, 0.5);
      s.range_max = g.real(10, 60);
      s.stamp_ns = g.u64();
      s.ranges.resize(static_cast<std::size_t>(g.integer(0, 1081)));
      for (auto& r : s.ranges) r = g.integer(0, 9) == 0 ? kNoReturn : g.real(0, 60);
      m.payload = s;
      break;
    }
    case PayloadKind::FramePacket: {
      m.topic_id = topic_ids::kFrameBase;
      FramePacket f;
      f.camera_id = g.name();
      f.seq = g.u32();
      f.stamp_ns = g.u64();
      f.width = static_cast<std::uint16_t>(g.integer(1, 1920));
      f.height = static_cast<std::uint16_t>(g.integer(1, 1080));
      f.simulated_size_bytes = static_cast<std::uint32_t>(g.integer(0, 30000));
      f.digest = g.u64();
      m.payload = f;
      break;
    }
    case PayloadKind::ObjectList: {
      m.topic_id = topic_ids::kObjectsBase;
      ObjectList l;
      l.frame_id = g.name();
      l.stamp_ns = g.u64();
      l.objects.resize(static_cast<std::size_t>(g.integer(0, 40)));
      for (auto& o : l.objects) {
        o = {g.real(-30, 30), g.real(-30, 30), g.real(-30, 30), g.real(-30, 30),
             g.real(-30, 30), g.real(-30, 30), g.u32()};
      }
      m.payload = l;
      break;
    }
    case PayloadKind::OccupancyGrid: {
      m.topic_id = topic_ids::kGrid;
      OccupancyGrid grid;
      grid.origin_x = g.real(-100, 100);
      grid.origin_y = g.real(-100, 100);
      grid.resolution = g.real(0.05, 1.0);
      grid.width = static_cast<std::uint32_t>(g.integer(0, 120));
      grid.height = static_cast<std::uint32_t>(g.integer(0, 120));
      grid.stamp_ns = g.u64();
      grid.cells.resize(static_cast<std::size_t>(grid.width) * grid.height);
      for (auto& c : grid.cells) c = static_cast<std::uint8_t>(g.integer(0, 7) == 0);
      m.payload = grid;
      break;
    }
    case PayloadKind::LanePolylines: {
      m.topic_id = topic_ids::kLane;
      LanePolylines l;
      l.swa_used = g.real(-8, 8);
      l.horizon = g.real(1, 30);
      l.stamp_ns = g.u64();
      const auto n = static_cast<std::size_t>(g.integer(0, 64));
      for (std::size_t i = 0; i < n; ++i) {
        l.left.push_back({g.real(-30, 30), g.real(-30, 30)});
        l.right.push_back({g.real(-30, 30), g.real(-30, 30)});
      }
      m.payload = l;
      break;
    }
    case PayloadKind::TimeSyncProbe:
      m.topic_id = topic_ids::kTimeSyncRequest;
      m.payload = TimeSyncProbe{g.u64(), g.u64(), g.u64(), g.coin()};
      break;
  }
  return m;
}

inline constexpr PayloadKind kAllPayloadKinds[] = {
    PayloadKind::Heartbeat,    PayloadKind::PrimaryCommand, PayloadKind::SecondaryCommand, PayloadKind::VehicleState,
    PayloadKind::LaserScan,    PayloadKind::FramePacket,    PayloadKind::ObjectList,       PayloadKind::OccupancyGrid,
    PayloadKind::LanePolylines, PayloadKind::TimeSyncProbe,
};

}  // namespace tod::testing
