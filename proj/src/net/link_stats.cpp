#include "tod/net/link_stats.hpp"

#include <algorithm>

namespace tod::net {

LinkStatsCollector::LinkStatsCollector(double window_s, std::size_t histogram_bins)
    : window_s_(window_s), bins_(std::max<std::size_t>(histogram_bins, 1)) {
  all_.histogram.assign(bins_, 0);
}

LinkStatsCollector::Bucket& LinkStatsCollector::bucket_for(std::uint16_t topic) {
  auto [it, inserted] = per_topic_.try_emplace(topic);
  if (inserted) it->second.histogram.assign(bins_, 0);
  return it->second;
}

void LinkStatsCollector::record_sent(std::optional<std::uint16_t> topic) {
  std::lock_guard lock(mu_);
  ++all_.sent;
  if (topic) ++bucket_for(*topic).sent;
}

void LinkStatsCollector::record_lost(std::optional<std::uint16_t> topic) {
  std::lock_guard lock(mu_);
  ++all_.lost;
  if (topic) ++bucket_for(*topic).lost;
}

void LinkStatsCollector::record_received(std::size_t bytes, TimeNs latency_ns, TimeNs now_ns,
                                         std::optional<std::uint16_t> topic) {
  std::lock_guard lock(mu_);
  auto apply = [&](Bucket& b) {
    ++b.received;
    b.bytes += bytes;
    b.window.push_back({now_ns, bytes});
    const auto bin = static_cast<std::size_t>(std::max<TimeNs>(latency_ns, 0) / 1'000'000);
    ++b.histogram[std::min(bin, bins_ - 1)];
    trim(b, now_ns);
  };
  apply(all_);
  if (topic) apply(bucket_for(*topic));
}

void LinkStatsCollector::set_capacity(std::optional<double> bytes_per_s) {
  std::lock_guard lock(mu_);
  capacity_ = bytes_per_s;
}

void LinkStatsCollector::trim(Bucket& b, TimeNs now_ns) const {
  const TimeNs horizon = now_ns - seconds_to_ns(window_s_);
  while (!b.window.empty() && b.window.front().t <= horizon) b.window.pop_front();
}

LinkStats LinkStatsCollector::make(const Bucket& b, TimeNs now_ns) const {
  const TimeNs horizon = now_ns - seconds_to_ns(window_s_);
  LinkStats s;
  s.window_s = window_s_;
  s.datagrams_sent = b.sent;
  s.datagrams_received = b.received;
  s.datagrams_lost = b.lost;
  s.bytes_received = b.bytes;
  s.latency_histogram_ms = b.histogram;
  s.capacity_bytes_per_s = capacity_;
  std::size_t bytes = 0, count = 0;
  for (const auto& d : b.window) {
    if (d.t > horizon && d.t <= now_ns) {
      bytes += d.bytes;
      ++count;
    }
  }
  s.delivered_bytes_per_s = static_cast<double>(bytes) / window_s_;
  s.delivered_datagrams_per_s = static_cast<double>(count) / window_s_;
  return s;
}

LinkStats LinkStatsCollector::snapshot(TimeNs now_ns) const {
  std::lock_guard lock(mu_);
  trim(all_, now_ns);
  return make(all_, now_ns);
}

LinkStats LinkStatsCollector::snapshot(TimeNs now_ns, std::uint16_t topic) const {
  std::lock_guard lock(mu_);
  auto it = per_topic_.find(topic);
  if (it == per_topic_.end()) {
    Bucket empty;
    empty.histogram.assign(bins_, 0);
    return make(empty, now_ns);
  }
  trim(it->second, now_ns);
  return make(it->second, now_ns);
}

}  // namespace tod::net
