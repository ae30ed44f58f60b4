#pragma once

#include <cstdint>
#include <optional>

namespace tod::net {

struct ClockSample {
  std::int64_t offset_ns = 0;  // remote clock minus local clock
  std::int64_t rtt_ns = 0;
};

/// NTP-style four-timestamp exchange: t0 local send, t1 remote receive,
/// t2 remote send, t3 local receive. Returns nullopt when the computed
/// round-trip time is negative.
std::optional<ClockSample> estimate_clock_offset(std::uint64_t t0, std::uint64_t t1, std::uint64_t t2,
                                                 std::uint64_t t3);

struct ClockSync {
  std::optional<std::int64_t> offset_ns;
  std::uint64_t rtt_ns = 0;
  std::uint64_t sample_count = 0;
  std::uint64_t last_update_ns = 0;

  /// Converts a remote-clock stamp onto the local clock. Identity until the
  /// first sample arrives.
  std::int64_t to_local(std::int64_t remote_ns) const noexcept { return remote_ns - offset_ns.value_or(0); }
};

/// Keeps the minimum-rtt sample seen so far.
class ClockSyncEstimator {
 public:
  /// Returns false if the sample was rejected.
  bool add(std::uint64_t t0, std::uint64_t t1, std::uint64_t t2, std::uint64_t t3);
  const ClockSync& state() const noexcept { return state_; }
  std::uint64_t rejected() const noexcept { return rejected_; }

 private:
  ClockSync state_;
  std::uint64_t rejected_ = 0;
};

}  // namespace tod::net
