#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tod/net/clock_sync.hpp"

namespace tod::op {

/// One operator-side log sample: what was commanded and what the vehicle
/// last reported, at the same operator time.
struct SignalSample {
  std::int64_t t_ns = 0;
  double desired_swa = 0.0;
  double actual_swa = 0.0;
  double desired_v = 0.0;
  double actual_v = 0.0;
};

/// A displayed frame: its vehicle-clock stamp and the operator time of the
/// render acknowledgement.
struct FrameAck {
  std::string camera;
  std::uint64_t frame_stamp_ns = 0;
  std::int64_t ack_ns = 0;
};

struct LoopMetrics {
  std::optional<double> actuation_latency_ms;
  std::optional<double> swa_rmse;
  std::optional<double> velocity_rmse;
  std::optional<double> command_rate_hz;
  std::map<std::string, double> g2g_ms;
};

struct MetricsParams {
  double command_period_s = 0.02;
  double max_lag_s = 0.5;
  double min_window_s = 5.0;
};

/// Least-squares lag search of actual_swa against shifted desired_swa on a
/// grid of the command period, RMSE after the shift, and mean G2G per camera
/// corrected by the clock offset. Latency and RMSE stay undefined for
/// windows shorter than min_window_s or a constant desired signal.
LoopMetrics compute_metrics(const std::vector<SignalSample>& window, const std::vector<FrameAck>& acks,
                            const net::ClockSync& sync, const MetricsParams& params = {});

/// Linear resampling onto t0 + k * period, k = 0 .. floor((t_end - t0) / period).
std::vector<SignalSample> resample(const std::vector<SignalSample>& in, double period_s);

}  // namespace tod::op
