#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tod/harness/log.hpp"
#include "tod/harness/scenario.hpp"
#include "tod/operator/manager.hpp"
#include "tod/vehicle/node.hpp"

namespace tod::harness {

struct PhaseChange {
  std::int64_t t_ns = 0;
  op::SessionPhase phase = op::SessionPhase::Idle;
};

/// A datagram the operator handed to the uplink.
struct UplinkSend {
  std::int64_t t_ns = 0;
  std::uint16_t topic = 0;
};

struct RunResult {
  LogTable log;
  op::LoopMetrics metrics;
  bool aborted = false;
  std::string abort_reason;
  double end_time_s = 0.0;
  std::vector<op::StreamLogRow> stream_log;
  /// Stream reconfigurations as applied on the operator side.
  std::vector<std::pair<std::int64_t, perception::StreamConfig>> stream_changes;
  std::vector<PhaseChange> phases;
  std::vector<UplinkSend> uplink_sends;
  op::OperatorCounters operator_counters;
  vehicle::VehicleCounters vehicle_counters;
  VehicleState final_state;
  std::optional<std::int64_t> clock_offset_ns;
  std::size_t frame_acks = 0;
};

struct RunOptions {
  std::optional<std::uint64_t> seed;  // overrides the scenario seed
};

/// Runs vehicle and operator nodes over the emulator in virtual time.
/// Deterministic in (scenario, seed). Throws Error(Validation) for
/// interactive scenarios.
RunResult run_scenario(const Scenario& s, const RunOptions& opts = {});

/// Primary-command datagrams handed to the uplink while the session was not
/// Teleoperating.
std::size_t primaries_outside_teleop(const RunResult& r);

/// Writes log.csv, metrics.json and, with cameras, streams.csv into `dir`.
void write_outputs(const RunResult& r, const Scenario& s, const std::string& dir);
std::string metrics_json(const RunResult& r, const Scenario& s);

}  // namespace tod::harness
