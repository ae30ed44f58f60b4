#include <cmath>
#include <limits>
#include <numbers>

#include "doctest.h"
#include "support/generators.hpp"
#include "tod/core/codec.hpp"
#include "tod/core/error.hpp"
#include "tod/core/limits.hpp"
#include "tod/core/transform.hpp"

using namespace tod;

namespace {

ErrorCode decode_error(std::span<const std::uint8_t> bytes, const TopicRegistry& reg) {
  try {
    decode_message(bytes, reg);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("decode unexpectedly succeeded");
  return ErrorCode::Io;
}

}  // namespace

TEST_CASE("normalize_angle maps into (-pi, pi]") {
  CHECK(normalize_angle(std::numbers::pi) == doctest::Approx(std::numbers::pi));
  CHECK(normalize_angle(-std::numbers::pi) == doctest::Approx(std::numbers::pi));
  CHECK(normalize_angle(3 * std::numbers::pi / 2) == doctest::Approx(-std::numbers::pi / 2));
  CHECK(normalize_angle(0.25) == doctest::Approx(0.25));
}

TEST_CASE("heartbeat encodes to the bare header") {
  // magic(3) + version(1) + topic(2) + seq(4) + stamp(8) + payload_len(2)
  constexpr std::size_t layout_bytes = 3 + 1 + 2 + 4 + 8 + 2;
  static_assert(kHeaderSize == layout_bytes);
  const auto bytes = encode_message(WireMessage{0, 0, 0, Heartbeat{}});
  REQUIRE(bytes.size() == 20);
  CHECK(bytes[0] == 0x54);
  CHECK(bytes[1] == 0x4F);
  CHECK(bytes[2] == 0x44);
  CHECK(bytes[3] == 1);
  CHECK(bytes[18] == 0x00);
  CHECK(bytes[19] == 0x00);
}

TEST_CASE("header fields are little-endian") {
  const auto bytes = encode_message(WireMessage{0x0102, 0x03040506, 0x0708090A0B0C0D0E, Heartbeat{}});
  CHECK(bytes[4] == 0x02);
  CHECK(bytes[5] == 0x01);
  CHECK(bytes[6] == 0x06);
  CHECK(bytes[9] == 0x03);
  CHECK(bytes[10] == 0x0E);
  CHECK(bytes[17] == 0x07);
}

TEST_CASE("primary command round-trips and payload_len matches the body") {
  const auto reg = TopicRegistry::standard("ego");
  WireMessage m{topic_ids::kCmdPrimary, 7, 123, PrimaryCommand{0.1, 2.0, 7, 123}};
  const auto bytes = encode_message(m);
  CHECK(bytes.size() == kHeaderSize + 8 + 8 + 4 + 8);
  CHECK((bytes[18] | (bytes[19] << 8)) == 28);
  CHECK(decode_message(bytes, reg) == m);
  // 0.1 as IEEE-754 LE: 9A 99 99 99 99 99 B9 3F
  CHECK(bytes[20] == 0x9A);
  CHECK(bytes[27] == 0x3F);
}

TEST_CASE("randomized messages round-trip") {
  const auto reg = testing::property_registry();
  testing::Gen gen(1);
  for (PayloadKind kind : testing::kAllPayloadKinds) {
    for (int i = 0; i < 300; ++i) {
      const WireMessage m = testing::random_message(gen, kind);
      const auto bytes = encode_message(m);
      REQUIRE(bytes.size() == kHeaderSize + (bytes[18] | (bytes[19] << 8)));
      REQUIRE(decode_message(bytes, reg) == m);
    }
  }
}

TEST_CASE("frame packets occupy their simulated size on the wire") {
  const auto reg = testing::property_registry();
  FramePacket f{"front", 3, 99, 960, 520, 12500, 0xABCDEF};
  const auto bytes = encode_message(WireMessage{topic_ids::kFrameBase, 3, 99, f});
  CHECK(bytes.size() == 12500);
  CHECK(std::get<FramePacket>(decode_message(bytes, reg).payload) == f);
}

TEST_CASE("malformed inputs map to distinct errors") {
  const auto reg = TopicRegistry::standard("ego");
  const auto good = encode_message(WireMessage{topic_ids::kCmdPrimary, 1, 2, PrimaryCommand{0.1, 1.0, 1, 2}});

  std::vector<std::uint8_t> ten(good.begin(), good.begin() + 10);
  CHECK(decode_error(ten, reg) == ErrorCode::Truncated);

  auto magic = good;
  magic[0] = 0x00;
  CHECK(decode_error(magic, reg) == ErrorCode::BadMagic);

  auto version = good;
  version[3] = 2;
  CHECK(decode_error(version, reg) == ErrorCode::UnknownVersion);

  auto topic = good;
  topic[4] = 0xEE;
  CHECK(decode_error(topic, reg) == ErrorCode::UnknownTopic);

  auto cut = good;
  cut.pop_back();
  CHECK(decode_error(cut, reg) == ErrorCode::Truncated);

  auto extra = good;
  extra.push_back(0);
  CHECK(decode_error(extra, reg) == ErrorCode::LengthMismatch);

  // Declared length matches the buffer but disagrees with the type's layout.
  auto lying = good;
  lying.push_back(0);
  lying[18] = static_cast<std::uint8_t>(lying[18] + 1);
  CHECK(decode_error(lying, reg) == ErrorCode::LengthMismatch);

  auto sec = encode_message(WireMessage{topic_ids::kCmdSecondary, 1, 2, SecondaryCommand{}});
  sec[20] = 9;
  CHECK(decode_error(sec, reg) == ErrorCode::InvalidField);
}

TEST_CASE("oversize payload is rejected at encode") {
  LaserScan s;
  s.ranges.assign(9000, 1.0);  // 72 kB of ranges
  CHECK_THROWS_AS(encode_message(WireMessage{topic_ids::kScanBase, 0, 0, s}), Error);
  try {
    encode_message(WireMessage{topic_ids::kScanBase, 0, 0, s});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Oversize);
  }
}

TEST_CASE("topic registry assigns per-sensor ids and rejects duplicates") {
  auto reg = TopicRegistry::standard("q7");
  CHECK(reg.id_of("/vehicle/q7/state") == topic_ids::kVehicleState);
  const auto front = reg.add_scan("q7", "front");
  const auto rear = reg.add_scan("q7", "rear");
  CHECK(front == topic_ids::kScanBase);
  CHECK(rear == topic_ids::kScanBase + 1);
  CHECK(reg.find("/vehicle/q7/scan/rear")->kind == PayloadKind::LaserScan);
  CHECK_THROWS_AS(reg.add_scan("q7", "front"), Error);
}

TEST_CASE("resolve_transform over a chain") {
  std::vector<Transform> tree = {
      Transform::from_rpy("vehicle", "sensor", {1, 0, 0}, 0, 0, 0),
      Transform::from_rpy("sensor", "optical", {0, 1, 0}, 0, 0, 0),
  };
  const auto identity = resolve_transform(tree, "sensor", "sensor");
  CHECK(identity.matrix().isApprox(Eigen::Matrix4d::Identity()));

  const auto t = resolve_transform(tree, "optical", "vehicle");
  CHECK(t.translation().isApprox(Eigen::Vector3d(1, 1, 0)));
  CHECK(t.linear().isApprox(Eigen::Matrix3d::Identity()));

  const Eigen::Vector3d p = resolve_transform(tree, "vehicle", "optical") * Eigen::Vector3d(1, 1, 0);
  CHECK(p.norm() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("resolve_transform with rotation") {
  TransformTree tree;
  tree.add(Transform::from_rpy("vehicle", "laser", {2, 0, 0}, 0, 0, std::numbers::pi / 2));
  // A point 1 m along the laser x-axis sits 1 m to the left of the laser.
  const Eigen::Vector3d p = tree.resolve("laser", "vehicle") * Eigen::Vector3d(1, 0, 0);
  CHECK(p.x() == doctest::Approx(2.0));
  CHECK(p.y() == doctest::Approx(1.0));
}

TEST_CASE("transform tree errors") {
  TransformTree tree;
  tree.add(Transform::from_rpy("a", "b", {1, 0, 0}, 0, 0, 0));
  tree.add(Transform::from_rpy("x", "y", {1, 0, 0}, 0, 0, 0));
  CHECK_THROWS_AS(tree.add(Transform::from_rpy("c", "b", {0, 0, 0}, 0, 0, 0)), Error);  // second parent
  CHECK_THROWS_AS(tree.add(Transform::from_rpy("b", "a", {0, 0, 0}, 0, 0, 0)), Error);  // cycle
  Transform bad = Transform::from_rpy("b", "c", {0, 0, 0}, 0, 0, 0);
  bad.rotation.coeffs() *= 1.1;
  CHECK_THROWS_AS(tree.add(bad), Error);

  try {
    tree.resolve("a", "nope");
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownFrame);
  }
  try {
    tree.resolve("a", "y");
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DisconnectedFrames);
  }
}

TEST_CASE("random trees are inverse-consistent and associative") {
  testing::Gen gen(7);
  for (int trial = 0; trial < 50; ++trial) {
    TransformTree tree;
    std::vector<std::string> names{"f0"};
    for (int i = 1; i < 10; ++i) {
      const std::string parent = names[static_cast<std::size_t>(gen.integer(0, i - 1))];
      names.push_back("f" + std::to_string(i));
      tree.add(Transform::from_rpy(parent, names.back(), {gen.real(-5, 5), gen.real(-5, 5), gen.real(-5, 5)},
                                   gen.real(-3, 3), gen.real(-1.5, 1.5), gen.real(-3, 3)));
    }
    for (int q = 0; q < 20; ++q) {
      const auto& a = names[static_cast<std::size_t>(gen.integer(0, 9))];
      const auto& b = names[static_cast<std::size_t>(gen.integer(0, 9))];
      const auto& c = names[static_cast<std::size_t>(gen.integer(0, 9))];
      const Eigen::Matrix4d round = (tree.resolve(a, b) * tree.resolve(b, a)).matrix();
      CHECK((round - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff() < 1e-9);
      const Eigen::Matrix4d chained = (tree.resolve(b, c) * tree.resolve(a, b)).matrix();
      CHECK((chained - tree.resolve(a, c).matrix()).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
}

TEST_CASE("clamp_primary") {
  VehicleParams p;
  PrimaryCommand c{2 * p.max_swa, 0.5, 3, 4};
  const auto clamped = clamp_primary(c, p);
  CHECK(clamped.desired_swa == p.max_swa);
  CHECK(clamped.desired_velocity == 0.5);
  CHECK(clamped.seq == 3);
  CHECK(clamped.stamp_ns == 4);

  PrimaryCommand in_range{-0.3, -1.0, 1, 1};
  CHECK(clamp_primary(in_range, p) == in_range);

  PrimaryCommand nan{0.0, std::numeric_limits<double>::quiet_NaN(), 1, 1};
  try {
    clamp_primary(nan, p);
    FAIL("expected rejection");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFinite);
  }

  testing::Gen gen(3);
  for (int i = 0; i < 1000; ++i) {
    PrimaryCommand r{gen.real(-30, 30), gen.real(-30, 30), 0, 0};
    const auto once = clamp_primary(r, p);
    CHECK(clamp_primary(once, p) == once);
    // Axes are independent: clamping one axis first gives the same result.
    PrimaryCommand swa_only = r;
    swa_only.desired_swa = once.desired_swa;
    CHECK(clamp_primary(swa_only, p) == once);
  }
}

TEST_CASE("vehicle params validation") {
  VehicleParams p;
  CHECK_NOTHROW(p.validate());
  p.steer_delay = 0.0;
  CHECK_NOTHROW(p.validate());
  p.wheelbase = 0.0;
  CHECK_THROWS_AS(p.validate(), Error);
  p = VehicleParams{};
  p.max_swa = 30.0;  // 30/16 > pi/2
  CHECK_THROWS_AS(p.validate(), Error);
}
