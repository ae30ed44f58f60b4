#pragma once

#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "tod/net/control.hpp"
#include "tod/net/datagram.hpp"
#include "tod/net/link_stats.hpp"
#include "tod/net/profile.hpp"
#include "tod/net/scheduler.hpp"

namespace tod::net {

struct TraceEntry {
  TimeNs sent_ns = 0;
  std::optional<TimeNs> delivered_ns;  // nullopt = lost
  std::size_t bytes = 0;

  bool operator==(const TraceEntry&) const = default;
};

/// One-directional emulated datagram path driven by a Scheduler. Loss,
/// jitter and the optional bandwidth cap are decided at send time from a
/// seeded RNG, so identical seeds and send schedules yield identical traces.
class EmulatedLink final : public DatagramTransport {
 public:
  EmulatedLink(Scheduler& sched, ChannelProfile profile, std::shared_ptr<LinkStatsCollector> stats = nullptr);

  /// Applies to datagrams sent from now on. The RNG stream is kept.
  void set_profile(const ChannelProfile& profile);
  const ChannelProfile& profile() const noexcept { return profile_; }

  bool send(std::span<const std::uint8_t> bytes) override;
  std::optional<Datagram> poll() override;
  void close() override { closed_ = true; }
  bool closed() const override { return closed_; }

  /// Called after each delivery lands in the inbox.
  void set_on_delivery(std::function<void()> fn) { on_delivery_ = std::move(fn); }
  void enable_trace(bool on) { tracing_ = on; }
  const std::vector<TraceEntry>& trace() const noexcept { return trace_; }
  const std::shared_ptr<LinkStatsCollector>& stats() const noexcept { return stats_; }

 private:
  Scheduler& sched_;
  ChannelProfile profile_;
  DeterministicRng rng_;
  std::shared_ptr<LinkStatsCollector> stats_;
  TimeNs busy_until_ = 0;
  bool closed_ = false;
  bool tracing_ = false;
  std::vector<TraceEntry> trace_;
  std::deque<Datagram> inbox_;
  std::function<void()> on_delivery_;
};

/// Reliable, in-order control connection between one client and a broker
/// over two emulated directions. A blackout (loss_prob = 1) stalls frames, as
/// a TCP connection would; other loss rates only cost latency, which is not
/// modelled. The client's keepalive is what turns a stall into a loss.
class EmulatedControlLink {
 public:
  EmulatedControlLink(Scheduler& sched, ControlBroker& broker, ChannelProfile uplink, ChannelProfile downlink);
  ~EmulatedControlLink();

  ControlPipe& client_pipe();
  void set_uplink(const ChannelProfile& p);
  void set_downlink(const ChannelProfile& p);

 private:
  class Pipe;
  struct Direction {
    ChannelProfile profile;
    DeterministicRng rng{1};
    TimeNs last_delivery = 0;
    std::deque<ControlFrame> stalled;
  };
  void to_broker(ControlFrame f);
  void to_client(ControlFrame f);
  void flush(Direction& d, bool up);
  TimeNs delivery_time(Direction& d);

  Scheduler& sched_;
  ControlBroker& broker_;
  ControlBroker::SessionId session_;
  Direction up_;
  Direction down_;
  std::shared_ptr<bool> alive_;
  std::unique_ptr<Pipe> pipe_;
};

}  // namespace tod::net
