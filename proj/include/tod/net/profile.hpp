#pragma once

#include <cstdint>
#include <optional>

namespace tod::net {

/// One direction of an emulated network path.
struct ChannelProfile {
  double one_way_delay = 0.0;                 // s
  double jitter = 0.0;                        // s, uniform in [-jitter, +jitter]
  double loss_prob = 0.0;                     // [0, 1]
  std::optional<double> bandwidth_cap;        // bytes/s, nullopt = unlimited
  double queue_limit = 0.25;                  // s of backlog before drop-tail
  std::uint64_t seed = 1;

  /// Throws Error(Validation).
  void validate() const;
  bool blackout() const noexcept { return loss_prob >= 1.0; }
};

/// splitmix64; identical output on every platform for a given seed.
class DeterministicRng {
 public:
  explicit DeterministicRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  /// Uniform in [0, 1).
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

}  // namespace tod::net
