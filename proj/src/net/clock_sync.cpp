#include "tod/net/clock_sync.hpp"

namespace tod::net {

std::optional<ClockSample> estimate_clock_offset(std::uint64_t t0, std::uint64_t t1, std::uint64_t t2,
                                                 std::uint64_t t3) {
  const auto s0 = static_cast<std::int64_t>(t0);
  const auto s1 = static_cast<std::int64_t>(t1);
  const auto s2 = static_cast<std::int64_t>(t2);
  const auto s3 = static_cast<std::int64_t>(t3);
  const std::int64_t rtt = (s3 - s0) - (s2 - s1);
  if (rtt < 0) return std::nullopt;
  // Sum first, halve once: keeps odd nanosecond totals symmetric.
  const std::int64_t offset = ((s1 - s0) + (s2 - s3)) / 2;
  return ClockSample{offset, rtt};
}

bool ClockSyncEstimator::add(std::uint64_t t0, std::uint64_t t1, std::uint64_t t2, std::uint64_t t3) {
  const auto sample = estimate_clock_offset(t0, t1, t2, t3);
  if (!sample) {
    ++rejected_;
    return false;
  }
  ++state_.sample_count;
  state_.last_update_ns = t3;
  if (!state_.offset_ns || static_cast<std::uint64_t>(sample->rtt_ns) <= state_.rtt_ns) {
    state_.offset_ns = sample->offset_ns;
    state_.rtt_ns = static_cast<std::uint64_t>(sample->rtt_ns);
  }
  return true;
}

}  // namespace tod::net
