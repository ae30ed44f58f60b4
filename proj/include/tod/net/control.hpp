#pragma once

// Reliable topic-based control channel: a small MQTT-like subset with
// connect, publish (optionally retained), single-level `+` wildcard
// subscriptions and keepalive pings.

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tod/net/scheduler.hpp"

namespace tod::net {

enum class ControlFrameType : std::uint8_t { Hello = 1, Sub = 2, Pub = 3, Ping = 4, Pong = 5, PubRetain = 6 };

/// Stream framing: LE32 length of the remainder, type byte, LE16-prefixed
/// UTF-8 topic, payload to the end of the frame.
struct ControlFrame {
  ControlFrameType type = ControlFrameType::Ping;
  std::string topic;
  std::vector<std::uint8_t> payload;

  bool operator==(const ControlFrame&) const = default;
};

std::vector<std::uint8_t> encode_control_frame(const ControlFrame& frame);

/// Incremental decoder for a byte stream of control frames.
class ControlFrameParser {
 public:
  explicit ControlFrameParser(std::size_t max_frame = 1 << 20) : max_frame_(max_frame) {}
  void feed(std::span<const std::uint8_t> bytes);
  /// Throws Error(Parse) on an unknown type or inconsistent lengths.
  std::optional<ControlFrame> next();

 private:
  std::vector<std::uint8_t> buf_;
  std::size_t max_frame_;
};

/// `+` matches exactly one path level; everything else matches literally.
bool topic_matches(std::string_view pattern, std::string_view topic);

std::vector<std::uint8_t> to_bytes(std::string_view text);
std::string to_text(std::span<const std::uint8_t> bytes);

/// Transport-independent broker state.
class ControlBroker {
 public:
  using SessionId = std::uint64_t;
  using Sink = std::function<void(const ControlFrame&)>;

  SessionId attach(Sink sink, TimeNs now_ns = 0);
  void detach(SessionId id);
  void handle(SessionId id, const ControlFrame& frame, TimeNs now_ns = 0);
  /// Detaches sessions silent for longer than `timeout_ns`; returns how many.
  std::size_t expire(TimeNs now_ns, TimeNs timeout_ns);

  /// Broker-local publish (the hosting node publishing its own status).
  void publish(std::string_view topic, std::span<const std::uint8_t> payload, bool retain);

  std::optional<std::vector<std::uint8_t>> retained(std::string_view topic) const;
  std::size_t session_count() const;

 private:
  struct Session {
    Sink sink;
    std::vector<std::string> patterns;
    std::string client_id;
    TimeNs last_rx = 0;
  };
  void fan_out(const std::string& topic, std::span<const std::uint8_t> payload);

  mutable std::mutex mu_;
  SessionId next_id_ = 1;
  std::map<SessionId, Session> sessions_;
  std::map<std::string, std::vector<std::uint8_t>, std::less<>> retained_;
};

/// Client end of a duplex frame connection.
class ControlPipe {
 public:
  virtual ~ControlPipe() = default;
  virtual void send(const ControlFrame& frame) = 0;
  virtual std::optional<ControlFrame> poll() = 0;
  /// True once the underlying connection is known to be gone.
  virtual bool broken() const = 0;
  virtual void close() = 0;
};

struct ControlDelivery {
  std::string topic;
  std::vector<std::uint8_t> payload;
  bool retained = false;
};

/// Per-subscription FIFO. Single consumer.
class ControlStream {
 public:
  explicit ControlStream(std::string pattern) : pattern_(std::move(pattern)) {}

  std::optional<ControlDelivery> poll();
  bool terminated() const;
  const std::string& pattern() const noexcept { return pattern_; }

 private:
  friend class ControlClient;
  void push(ControlDelivery d);
  void terminate();

  std::string pattern_;
  mutable std::mutex mu_;
  std::deque<ControlDelivery> queue_;
  bool terminated_ = false;
};

struct ControlClientConfig {
  std::string client_id = "client";
  TimeNs ping_interval_ns = 200'000'000;
  TimeNs keepalive_timeout_ns = 600'000'000;
};

class ControlClient {
 public:
  ControlClient(Scheduler& sched, ControlClientConfig cfg) : sched_(sched), cfg_(std::move(cfg)) {}

  /// Sends HELLO over `pipe`; connected() turns true once the broker echoes it.
  void connect(ControlPipe& pipe);
  bool connected() const noexcept { return acked_ && !lost_; }
  bool lost() const noexcept { return lost_; }

  /// Throws Error(Closed) when no live connection.
  void publish(std::string_view topic, std::span<const std::uint8_t> payload, bool retain);
  std::shared_ptr<ControlStream> subscribe(std::string pattern);

  /// Drains incoming frames, sends keepalive pings and detects loss.
  void tick();

  /// Fires once per connection loss; all streams are terminated before it runs.
  std::function<void()> on_lost;
  std::function<void()> on_connected;

 private:
  void declare_lost();

  Scheduler& sched_;
  ControlClientConfig cfg_;
  ControlPipe* pipe_ = nullptr;
  bool acked_ = false;
  bool lost_ = false;
  TimeNs last_rx_ = 0;
  TimeNs last_ping_ = 0;
  std::vector<std::shared_ptr<ControlStream>> streams_;
};

}  // namespace tod::net
