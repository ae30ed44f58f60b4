#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <vector>

#include "tod/net/scheduler.hpp"

namespace tod::net {

struct LinkStats {
  double window_s = 1.0;
  double delivered_bytes_per_s = 0.0;
  double delivered_datagrams_per_s = 0.0;
  std::uint64_t datagrams_sent = 0;
  std::uint64_t datagrams_received = 0;
  std::uint64_t datagrams_lost = 0;
  std::uint64_t bytes_received = 0;
  /// 1 ms bins; the last bin collects everything beyond.
  std::vector<std::uint64_t> latency_histogram_ms;
  /// Link capacity if the path advertises one (emulated caps do).
  std::optional<double> capacity_bytes_per_s;
};

/// Sliding-window delivery accounting, optionally split per topic id.
/// All methods are safe to call concurrently.
class LinkStatsCollector {
 public:
  explicit LinkStatsCollector(double window_s = 1.0, std::size_t histogram_bins = 1000);

  void record_sent(std::optional<std::uint16_t> topic = std::nullopt);
  void record_lost(std::optional<std::uint16_t> topic = std::nullopt);
  void record_received(std::size_t bytes, TimeNs latency_ns, TimeNs now_ns,
                       std::optional<std::uint16_t> topic = std::nullopt);
  void set_capacity(std::optional<double> bytes_per_s);

  LinkStats snapshot(TimeNs now_ns) const;
  /// Counters and window restricted to one topic.
  LinkStats snapshot(TimeNs now_ns, std::uint16_t topic) const;

  double window_s() const noexcept { return window_s_; }

 private:
  struct Delivery {
    TimeNs t;
    std::size_t bytes;
  };
  struct Bucket {
    std::uint64_t sent = 0;
    std::uint64_t received = 0;
    std::uint64_t lost = 0;
    std::uint64_t bytes = 0;
    std::deque<Delivery> window;
    std::vector<std::uint64_t> histogram;
  };

  void trim(Bucket& b, TimeNs now_ns) const;
  LinkStats make(const Bucket& b, TimeNs now_ns) const;
  Bucket& bucket_for(std::uint16_t topic);

  double window_s_;
  std::size_t bins_;
  mutable std::mutex mu_;
  mutable Bucket all_;
  mutable std::map<std::uint16_t, Bucket> per_topic_;
  std::optional<double> capacity_;
};

}  // namespace tod::net
