#include "tod/net/profile.hpp"

#include <cmath>

#include "tod/core/error.hpp"

namespace tod::net {

void ChannelProfile::validate() const {
  auto fail = [](const char* msg) { throw Error(ErrorCode::Validation, msg); };
  if (!std::isfinite(one_way_delay) || one_way_delay < 0) fail("one_way_delay must be >= 0");
  if (!std::isfinite(jitter) || jitter < 0) fail("jitter must be >= 0");
  if (jitter > one_way_delay) fail("jitter must not exceed one_way_delay");
  if (!(loss_prob >= 0.0 && loss_prob <= 1.0)) fail("loss_prob must be in [0, 1]");
  if (bandwidth_cap && !(*bandwidth_cap > 0.0)) fail("bandwidth_cap must be > 0");
  if (!std::isfinite(queue_limit) || queue_limit < 0) fail("queue_limit must be >= 0");
}

}  // namespace tod::net
