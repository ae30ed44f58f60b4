#include "tod/net/emulator.hpp"

#include <algorithm>
#include <cmath>

#include "tod/core/error.hpp"

namespace tod::net {

EmulatedLink::EmulatedLink(Scheduler& sched, ChannelProfile profile, std::shared_ptr<LinkStatsCollector> stats)
    : sched_(sched), profile_(profile), rng_(profile.seed), stats_(std::move(stats)) {
  profile_.validate();
  if (stats_) stats_->set_capacity(profile_.bandwidth_cap);
}

void EmulatedLink::set_profile(const ChannelProfile& profile) {
  profile.validate();
  profile_ = profile;
  if (stats_) stats_->set_capacity(profile_.bandwidth_cap);
}

bool EmulatedLink::send(std::span<const std::uint8_t> bytes) {
  if (closed_) throw Error(ErrorCode::Closed, "emulated link closed");
  const TimeNs now = sched_.now_ns();
  const auto topic = peek_topic(bytes);
  if (stats_) stats_->record_sent(topic);

  // Always draw both numbers so the RNG stream does not depend on outcomes.
  const double loss_draw = rng_.uniform();
  const double jitter_draw = rng_.uniform();
  auto drop = [&] {
    if (stats_) stats_->record_lost(topic);
    if (tracing_) trace_.push_back({now, std::nullopt, bytes.size()});
    return false;
  };
  if (loss_draw < profile_.loss_prob) return drop();

  const double jitter = (2.0 * jitter_draw - 1.0) * profile_.jitter;
  TimeNs deliver = now + seconds_to_ns(profile_.one_way_delay + jitter);
  if (profile_.bandwidth_cap) {
    // Serialize behind earlier datagrams; drop-tail once the backlog is too deep.
    const TimeNs start = std::max(deliver, busy_until_);
    if (start - deliver > seconds_to_ns(profile_.queue_limit)) return drop();
    deliver = start + seconds_to_ns(static_cast<double>(bytes.size()) / *profile_.bandwidth_cap);
    busy_until_ = deliver;
  }

  if (tracing_) trace_.push_back({now, deliver, bytes.size()});
  std::vector<std::uint8_t> copy(bytes.begin(), bytes.end());
  sched_.at(deliver, [this, now, topic, data = std::move(copy)]() mutable {
    if (closed_) return;
    const TimeNs t = sched_.now_ns();
    if (stats_) stats_->record_received(data.size(), t - now, t, topic);
    inbox_.push_back(Datagram{std::move(data), t});
    if (on_delivery_) on_delivery_();
  });
  return true;
}

std::optional<Datagram> EmulatedLink::poll() {
  if (inbox_.empty()) return std::nullopt;
  Datagram d = std::move(inbox_.front());
  inbox_.pop_front();
  return d;
}

// --- control link ---

class EmulatedControlLink::Pipe final : public ControlPipe {
 public:
  explicit Pipe(EmulatedControlLink& link) : link_(link) {}

  void send(const ControlFrame& frame) override {
    if (!closed_) link_.to_broker(frame);
  }
  std::optional<ControlFrame> poll() override {
    if (inbox.empty()) return std::nullopt;
    ControlFrame f = std::move(inbox.front());
    inbox.pop_front();
    return f;
  }
  bool broken() const override { return closed_; }
  void close() override {
    if (closed_) return;
    closed_ = true;
    inbox.clear();
    link_.broker_.detach(link_.session_);
    link_.up_.stalled.clear();
    link_.down_.stalled.clear();
  }

  std::deque<ControlFrame> inbox;

 private:
  EmulatedControlLink& link_;
  bool closed_ = false;
};

EmulatedControlLink::EmulatedControlLink(Scheduler& sched, ControlBroker& broker, ChannelProfile uplink,
                                         ChannelProfile downlink)
    : sched_(sched), broker_(broker), alive_(std::make_shared<bool>(true)) {
  uplink.validate();
  downlink.validate();
  up_.profile = uplink;
  up_.rng = DeterministicRng(uplink.seed ^ 0xC0DEull);
  down_.profile = downlink;
  down_.rng = DeterministicRng(downlink.seed ^ 0xC0DEull);
  pipe_ = std::make_unique<Pipe>(*this);
  session_ = broker_.attach([this](const ControlFrame& f) { to_client(f); }, sched_.now_ns());
}

EmulatedControlLink::~EmulatedControlLink() {
  *alive_ = false;
  broker_.detach(session_);
}

ControlPipe& EmulatedControlLink::client_pipe() { return *pipe_; }

TimeNs EmulatedControlLink::delivery_time(Direction& d) {
  const double jitter = (2.0 * d.rng.uniform() - 1.0) * d.profile.jitter;
  const TimeNs t = std::max(d.last_delivery, sched_.now_ns() + seconds_to_ns(d.profile.one_way_delay + jitter));
  d.last_delivery = t;
  return t;
}

void EmulatedControlLink::to_broker(ControlFrame f) {
  if (pipe_->broken()) return;
  if (up_.profile.blackout() || !up_.stalled.empty()) {
    up_.stalled.push_back(std::move(f));
    return;
  }
  auto alive = alive_;
  sched_.at(delivery_time(up_), [this, alive, f = std::move(f)] {
    if (!*alive || pipe_->broken()) return;
    broker_.handle(session_, f, sched_.now_ns());
  });
}

void EmulatedControlLink::to_client(ControlFrame f) {
  if (pipe_->broken()) return;
  if (down_.profile.blackout() || !down_.stalled.empty()) {
    down_.stalled.push_back(std::move(f));
    return;
  }
  auto alive = alive_;
  sched_.at(delivery_time(down_), [this, alive, f = std::move(f)] {
    if (!*alive || pipe_->broken()) return;
    pipe_->inbox.push_back(f);
  });
}

void EmulatedControlLink::flush(Direction& d, bool up) {
  std::deque<ControlFrame> pending;
  pending.swap(d.stalled);
  for (auto& f : pending) up ? to_broker(std::move(f)) : to_client(std::move(f));
}

void EmulatedControlLink::set_uplink(const ChannelProfile& p) {
  p.validate();
  up_.profile = p;
  if (!p.blackout()) flush(up_, true);
}

void EmulatedControlLink::set_downlink(const ChannelProfile& p) {
  p.validate();
  down_.profile = p;
  if (!p.blackout()) flush(down_, false);
}

}  // namespace tod::net
