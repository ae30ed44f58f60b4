#include "tod/operator/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tod/core/error.hpp"

namespace tod::op {

std::vector<SignalSample> resample(const std::vector<SignalSample>& in, double period_s) {
  if (in.size() < 2) return in;
  for (std::size_t i = 1; i < in.size(); ++i)
    if (in[i].t_ns <= in[i - 1].t_ns) throw Error(ErrorCode::InvalidArgument, "samples must be strictly increasing in time");
  const auto period = static_cast<std::int64_t>(std::llround(period_s * 1e9));
  const std::int64_t t0 = in.front().t_ns;
  const std::int64_t n = (in.back().t_ns - t0) / period + 1;
  std::vector<SignalSample> out;
  out.reserve(static_cast<std::size_t>(n));
  std::size_t j = 0;
  for (std::int64_t k = 0; k < n; ++k) {
    const std::int64_t t = t0 + k * period;
    while (j + 1 < in.size() && in[j + 1].t_ns <= t) ++j;
    if (in[j].t_ns == t || j + 1 == in.size()) {
      SignalSample s = in[j];
      s.t_ns = t;
      out.push_back(s);
      continue;
    }
    const auto& a = in[j];
    const auto& b = in[j + 1];
    const double w = static_cast<double>(t - a.t_ns) / static_cast<double>(b.t_ns - a.t_ns);
    auto lerp = [w](double x, double y) { return x + w * (y - x); };
    out.push_back({t, lerp(a.desired_swa, b.desired_swa), lerp(a.actual_swa, b.actual_swa), lerp(a.desired_v, b.desired_v),
                   lerp(a.actual_v, b.actual_v)});
  }
  return out;
}

LoopMetrics compute_metrics(const std::vector<SignalSample>& window, const std::vector<FrameAck>& acks,
                            const net::ClockSync& sync, const MetricsParams& params) {
  LoopMetrics m;

  if (acks.size() > 0 && sync.offset_ns) {
    std::map<std::string, std::pair<double, std::size_t>> acc;
    for (const auto& a : acks) {
      auto& [sum, n] = acc[a.camera];
      sum += static_cast<double>(a.ack_ns - sync.to_local(static_cast<std::int64_t>(a.frame_stamp_ns))) * 1e-6;
      ++n;
    }
    for (const auto& [cam, v] : acc) m.g2g_ms[cam] = v.first / static_cast<double>(v.second);
  }

  if (window.size() < 2) return m;
  const double span_s = static_cast<double>(window.back().t_ns - window.front().t_ns) * 1e-9;
  m.command_rate_hz = static_cast<double>(window.size() - 1) / span_s;
  if (span_s < params.min_window_s) return m;

  const auto s = resample(window, params.command_period_s);
  const auto [lo, hi] = std::minmax_element(s.begin(), s.end(),
                                            [](const auto& a, const auto& b) { return a.desired_swa < b.desired_swa; });
  if (hi->desired_swa - lo->desired_swa < 1e-12) return m;

  const std::size_t max_k = std::min(static_cast<std::size_t>(std::floor(params.max_lag_s / params.command_period_s + 1e-9)),
                                     s.size() - 2);
  std::size_t best_k = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k <= max_k; ++k) {
    double sum = 0.0;
    for (std::size_t i = k; i < s.size(); ++i) {
      const double e = s[i].actual_swa - s[i - k].desired_swa;
      sum += e * e;
    }
    const double mse = sum / static_cast<double>(s.size() - k);
    if (mse < best) {
      best = mse;
      best_k = k;
    }
  }
  double vsum = 0.0;
  for (std::size_t i = best_k; i < s.size(); ++i) {
    const double e = s[i].actual_v - s[i - best_k].desired_v;
    vsum += e * e;
  }
  m.actuation_latency_ms = static_cast<double>(best_k) * params.command_period_s * 1e3;
  m.swa_rmse = std::sqrt(best);
  m.velocity_rmse = std::sqrt(vsum / static_cast<double>(s.size() - best_k));
  return m;
}

}  // namespace tod::op
