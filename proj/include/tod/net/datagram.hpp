#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

#include "tod/core/codec.hpp"
#include "tod/net/link_stats.hpp"
#include "tod/net/scheduler.hpp"

namespace tod::net {

/// Largest UDP payload over IPv4.
inline constexpr std::size_t kMaxDatagramSize = 65507;

struct Datagram {
  std::vector<std::uint8_t> bytes;
  TimeNs recv_ns = 0;
};

struct SendReceipt {
  std::uint16_t topic_id = 0;
  std::uint32_t seq = 0;
  std::size_t bytes = 0;
  /// False when the path dropped the datagram at send time (emulator only;
  /// a real socket cannot know).
  bool accepted = true;
};

/// Unreliable, unordered datagram pipe: an emulated link or a UDP socket.
class DatagramTransport {
 public:
  virtual ~DatagramTransport() = default;
  /// Throws Error(Closed) when closed.
  virtual bool send(std::span<const std::uint8_t> bytes) = 0;
  virtual std::optional<Datagram> poll() = 0;
  virtual void close() = 0;
  virtual bool closed() const = 0;
};

/// Encodes wire messages and stamps a strictly increasing per-topic sequence.
class DatagramSender {
 public:
  explicit DatagramSender(DatagramTransport& transport) : transport_(transport) {}

  /// Throws Error(Oversize) if the encoded message exceeds kMaxDatagramSize
  /// and Error(Closed) if the transport is closed.
  SendReceipt send(std::uint16_t topic_id, Payload payload, std::uint64_t stamp_ns);

  std::uint32_t last_seq(std::uint16_t topic_id) const;

 private:
  DatagramTransport& transport_;
  mutable std::mutex mu_;
  std::map<std::uint16_t, std::uint32_t> seq_;
};

struct Received {
  WireMessage msg;
  TimeNs recv_ns = 0;
  /// seq <= highest seq already delivered on this topic.
  bool stale = false;
};

/// Single-consumer queue of decoded datagrams for one topic.
class Subscription {
 public:
  explicit Subscription(std::uint16_t topic_id) : topic_id_(topic_id) {}

  /// nullopt when nothing is queued. Throws Error(Closed) once closed.
  std::optional<Received> poll();
  std::uint16_t topic_id() const noexcept { return topic_id_; }
  bool closed() const;

 private:
  friend class DatagramHub;
  void push(Received r);
  void close();

  std::uint16_t topic_id_;
  mutable std::mutex mu_;
  std::deque<Received> queue_;
  bool closed_ = false;
};

/// Reads a transport, decodes, flags stale arrivals and routes to subscribers.
class DatagramHub {
 public:
  DatagramHub(DatagramTransport& transport, const TopicRegistry& registry) : transport_(transport), registry_(registry) {}
  ~DatagramHub();

  std::shared_ptr<Subscription> subscribe(std::uint16_t topic_id);
  /// Drains the transport. Returns the number of datagrams routed.
  std::size_t pump();
  void close();

  std::uint64_t decode_errors() const noexcept { return decode_errors_; }
  std::uint64_t unrouted() const noexcept { return unrouted_; }

 private:
  DatagramTransport& transport_;
  const TopicRegistry& registry_;
  std::mutex mu_;
  std::multimap<std::uint16_t, std::shared_ptr<Subscription>> subs_;
  std::map<std::uint16_t, std::uint32_t> highest_seq_;
  std::uint64_t decode_errors_ = 0;
  std::uint64_t unrouted_ = 0;
};

/// Topic id from a raw datagram header, if it carries one.
std::optional<std::uint16_t> peek_topic(std::span<const std::uint8_t> bytes) noexcept;

}  // namespace tod::net
