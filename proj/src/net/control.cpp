#include "tod/net/control.hpp"

#include <algorithm>
#include <set>

#include "tod/core/bytes.hpp"
#include "tod/core/error.hpp"

namespace tod::net {

std::vector<std::uint8_t> to_bytes(std::string_view text) { return {text.begin(), text.end()}; }

std::string to_text(std::span<const std::uint8_t> bytes) {
  return std::string(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

std::vector<std::uint8_t> encode_control_frame(const ControlFrame& frame) {
  std::vector<std::uint8_t> out;
  ByteWriter w(out);
  const std::size_t body = 1 + 2 + frame.topic.size() + frame.payload.size();
  w.u32(static_cast<std::uint32_t>(body));
  w.u8(static_cast<std::uint8_t>(frame.type));
  w.str16(frame.topic);
  w.bytes(frame.payload);
  return out;
}

void ControlFrameParser::feed(std::span<const std::uint8_t> bytes) { buf_.insert(buf_.end(), bytes.begin(), bytes.end()); }

std::optional<ControlFrame> ControlFrameParser::next() {
  if (buf_.size() < 4) return std::nullopt;
  const std::uint32_t len = buf_[0] | (buf_[1] << 8) | (buf_[2] << 16) | (static_cast<std::uint32_t>(buf_[3]) << 24);
  if (len < 3 || len > max_frame_) throw Error(ErrorCode::Parse, "control frame length out of range");
  if (buf_.size() < 4 + static_cast<std::size_t>(len)) return std::nullopt;

  ByteReader r(std::span<const std::uint8_t>(buf_).subspan(4, len), ErrorCode::Parse);
  ControlFrame f;
  const std::uint8_t type = r.u8();
  if (type < 1 || type > 6) throw Error(ErrorCode::Parse, "unknown control frame type " + std::to_string(type));
  f.type = static_cast<ControlFrameType>(type);
  f.topic = r.str16();
  auto rest = r.take(r.remaining());
  f.payload.assign(rest.begin(), rest.end());
  buf_.erase(buf_.begin(), buf_.begin() + 4 + len);
  return f;
}

bool topic_matches(std::string_view pattern, std::string_view topic) {
  while (true) {
    const auto pp = pattern.find('/');
    const auto tp = topic.find('/');
    const std::string_view plevel = pattern.substr(0, pp);
    const std::string_view tlevel = topic.substr(0, tp);
    if (plevel != "+" && plevel != tlevel) return false;
    if (pp == std::string_view::npos || tp == std::string_view::npos) return pp == tp;
    pattern.remove_prefix(pp + 1);
    topic.remove_prefix(tp + 1);
  }
}

// --- broker ---

ControlBroker::SessionId ControlBroker::attach(Sink sink, TimeNs now_ns) {
  std::lock_guard lock(mu_);
  const SessionId id = next_id_++;
  sessions_.emplace(id, Session{std::move(sink), {}, {}, now_ns});
  return id;
}

void ControlBroker::detach(SessionId id) {
  std::lock_guard lock(mu_);
  sessions_.erase(id);
}

void ControlBroker::handle(SessionId id, const ControlFrame& frame, TimeNs now_ns) {
  std::unique_lock lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) return;
  Session& s = it->second;
  s.last_rx = now_ns;
  switch (frame.type) {
    case ControlFrameType::Hello:
      s.client_id = frame.topic;
      s.sink(ControlFrame{ControlFrameType::Hello, frame.topic, {}});
      break;
    case ControlFrameType::Sub:
      s.patterns.push_back(frame.topic);
      for (const auto& [topic, payload] : retained_)
        if (topic_matches(frame.topic, topic)) s.sink(ControlFrame{ControlFrameType::PubRetain, topic, payload});
      break;
    case ControlFrameType::PubRetain:
      retained_[frame.topic] = frame.payload;
      fan_out(frame.topic, frame.payload);
      break;
    case ControlFrameType::Pub:
      fan_out(frame.topic, frame.payload);
      break;
    case ControlFrameType::Ping:
      s.sink(ControlFrame{ControlFrameType::Pong, {}, {}});
      break;
    case ControlFrameType::Pong:
      break;
  }
}

void ControlBroker::publish(std::string_view topic, std::span<const std::uint8_t> payload, bool retain) {
  std::lock_guard lock(mu_);
  const std::string t(topic);
  if (retain) retained_[t].assign(payload.begin(), payload.end());
  fan_out(t, payload);
}

void ControlBroker::fan_out(const std::string& topic, std::span<const std::uint8_t> payload) {
  const ControlFrame f{ControlFrameType::Pub, topic, {payload.begin(), payload.end()}};
  for (auto& [_, s] : sessions_) {
    const bool match =
        std::any_of(s.patterns.begin(), s.patterns.end(), [&](const std::string& p) { return topic_matches(p, topic); });
    if (match) s.sink(f);
  }
}

std::size_t ControlBroker::expire(TimeNs now_ns, TimeNs timeout_ns) {
  std::lock_guard lock(mu_);
  return std::erase_if(sessions_, [&](const auto& kv) { return now_ns - kv.second.last_rx > timeout_ns; });
}

std::optional<std::vector<std::uint8_t>> ControlBroker::retained(std::string_view topic) const {
  std::lock_guard lock(mu_);
  auto it = retained_.find(topic);
  if (it == retained_.end()) return std::nullopt;
  return it->second;
}

std::size_t ControlBroker::session_count() const {
  std::lock_guard lock(mu_);
  return sessions_.size();
}

// --- client ---

std::optional<ControlDelivery> ControlStream::poll() {
  std::lock_guard lock(mu_);
  if (queue_.empty()) return std::nullopt;
  ControlDelivery d = std::move(queue_.front());
  queue_.pop_front();
  return d;
}

bool ControlStream::terminated() const {
  std::lock_guard lock(mu_);
  return terminated_;
}

void ControlStream::push(ControlDelivery d) {
  std::lock_guard lock(mu_);
  if (!terminated_) queue_.push_back(std::move(d));
}

void ControlStream::terminate() {
  std::lock_guard lock(mu_);
  terminated_ = true;
}

void ControlClient::connect(ControlPipe& pipe) {
  pipe_ = &pipe;
  acked_ = false;
  lost_ = false;
  last_rx_ = sched_.now_ns();
  last_ping_ = last_rx_;
  std::erase_if(streams_, [](const auto& s) { return s->terminated(); });
  pipe_->send(ControlFrame{ControlFrameType::Hello, cfg_.client_id, {}});
}

void ControlClient::publish(std::string_view topic, std::span<const std::uint8_t> payload, bool retain) {
  if (!pipe_ || lost_) throw Error(ErrorCode::Closed, "control channel not connected");
  pipe_->send(ControlFrame{retain ? ControlFrameType::PubRetain : ControlFrameType::Pub, std::string(topic),
                           {payload.begin(), payload.end()}});
}

std::shared_ptr<ControlStream> ControlClient::subscribe(std::string pattern) {
  auto stream = std::make_shared<ControlStream>(pattern);
  streams_.push_back(stream);
  if (pipe_ && acked_ && !lost_) pipe_->send(ControlFrame{ControlFrameType::Sub, std::move(pattern), {}});
  return stream;
}

void ControlClient::tick() {
  if (!pipe_ || lost_) return;
  const TimeNs now = sched_.now_ns();
  if (pipe_->broken()) {
    declare_lost();
    return;
  }
  while (auto f = pipe_->poll()) {
    last_rx_ = now;
    switch (f->type) {
      case ControlFrameType::Hello:
        if (!acked_) {
          acked_ = true;
          for (const auto& s : streams_) pipe_->send(ControlFrame{ControlFrameType::Sub, s->pattern(), {}});
          if (on_connected) on_connected();
        }
        break;
      case ControlFrameType::Pub:
      case ControlFrameType::PubRetain: {
        const bool retained = f->type == ControlFrameType::PubRetain;
        for (const auto& s : streams_)
          if (topic_matches(s->pattern(), f->topic)) s->push(ControlDelivery{f->topic, f->payload, retained});
        break;
      }
      default:
        break;
    }
    if (!pipe_ || lost_) return;
  }
  if (now - last_rx_ > cfg_.keepalive_timeout_ns) {
    declare_lost();
    return;
  }
  if (acked_ && now - last_ping_ >= cfg_.ping_interval_ns) {
    last_ping_ = now;
    pipe_->send(ControlFrame{ControlFrameType::Ping, {}, {}});
  }
}

void ControlClient::declare_lost() {
  if (lost_) return;
  lost_ = true;
  acked_ = false;
  for (const auto& s : streams_) s->terminate();
  if (pipe_) pipe_->close();
  if (on_lost) on_lost();
}

}  // namespace tod::net
