#include "tod/net/datagram.hpp"

#include "tod/core/error.hpp"

namespace tod::net {

std::optional<std::uint16_t> peek_topic(std::span<const std::uint8_t> bytes) noexcept {
  if (bytes.size() < kHeaderSize || bytes[0] != kWireMagic[0] || bytes[1] != kWireMagic[1] ||
      bytes[2] != kWireMagic[2])
    return std::nullopt;
  return static_cast<std::uint16_t>(bytes[4] | (bytes[5] << 8));
}

SendReceipt DatagramSender::send(std::uint16_t topic_id, Payload payload, std::uint64_t stamp_ns) {
  if (transport_.closed()) throw Error(ErrorCode::Closed, "datagram transport closed");
  std::uint32_t seq;
  {
    std::lock_guard lock(mu_);
    seq = ++seq_[topic_id];
  }
  const auto bytes = encode_message(WireMessage{topic_id, seq, stamp_ns, std::move(payload)});
  if (bytes.size() > kMaxDatagramSize)
    throw Error(ErrorCode::Oversize, "datagram of " + std::to_string(bytes.size()) + " bytes exceeds 65507");
  SendReceipt receipt{topic_id, seq, bytes.size(), true};
  receipt.accepted = transport_.send(bytes);
  return receipt;
}

std::uint32_t DatagramSender::last_seq(std::uint16_t topic_id) const {
  std::lock_guard lock(mu_);
  auto it = seq_.find(topic_id);
  return it == seq_.end() ? 0 : it->second;
}

std::optional<Received> Subscription::poll() {
  std::lock_guard lock(mu_);
  if (closed_) throw Error(ErrorCode::Closed, "subscription closed");
  if (queue_.empty()) return std::nullopt;
  Received r = std::move(queue_.front());
  queue_.pop_front();
  return r;
}

bool Subscription::closed() const {
  std::lock_guard lock(mu_);
  return closed_;
}

void Subscription::push(Received r) {
  std::lock_guard lock(mu_);
  if (!closed_) queue_.push_back(std::move(r));
}

void Subscription::close() {
  std::lock_guard lock(mu_);
  closed_ = true;
  queue_.clear();
}

DatagramHub::~DatagramHub() { close(); }

std::shared_ptr<Subscription> DatagramHub::subscribe(std::uint16_t topic_id) {
  std::lock_guard lock(mu_);
  auto sub = std::make_shared<Subscription>(topic_id);
  subs_.emplace(topic_id, sub);
  return sub;
}

std::size_t DatagramHub::pump() {
  std::size_t routed = 0;
  while (auto dg = transport_.poll()) {
    WireMessage msg;
    try {
      msg = decode_message(dg->bytes, registry_);
    } catch (const Error&) {
      ++decode_errors_;
      continue;
    }
    std::lock_guard lock(mu_);
    auto [it, first] = highest_seq_.try_emplace(msg.topic_id, msg.seq);
    const bool stale = !first && msg.seq <= it->second;
    if (!first && msg.seq > it->second) it->second = msg.seq;
    auto range = subs_.equal_range(msg.topic_id);
    if (range.first == range.second) {
      ++unrouted_;
      continue;
    }
    for (auto s = range.first; s != range.second; ++s) s->second->push(Received{msg, dg->recv_ns, stale});
    ++routed;
  }
  return routed;
}

void DatagramHub::close() {
  std::lock_guard lock(mu_);
  for (auto& [_, s] : subs_) s->close();
}

}  // namespace tod::net
