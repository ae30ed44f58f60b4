#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tod/operator/metrics.hpp"
#include "tod/operator/node.hpp"

namespace tod::harness {

inline constexpr const char* kLogHeader = "t,desired_swa,actual_swa,desired_v,actual_v,gear,estop,mode";

/// Rows at the command period, t in seconds from run start.
using LogTable = std::vector<op::LogRow>;

/// Header plus one line per row, floats with 6 decimals.
std::string format_csv(const LogTable& log);
/// Throws Error(Io) when the path cannot be written.
void export_logs(const LogTable& log, const std::string& path);

/// Parses and validates a log CSV: exact header, eight fields per row,
/// strictly increasing t. Throws Error(Parse) with the line number.
LogTable parse_csv(const std::string& text);
LogTable read_log(const std::string& path);

struct LogSummary {
  std::size_t rows = 0;
  double duration_s = 0.0;
  double command_period_s = 0.0;
  double peak_desired_v = 0.0;
  double peak_actual_v = 0.0;
  double max_abs_swa = 0.0;
  std::size_t safe_stop_rows = 0;
  std::size_t estop_rows = 0;
  /// Rows whose gear differs from the previous row while |actual_v| >= 0.1.
  std::size_t moving_gear_changes = 0;
  op::LoopMetrics metrics;
};

LogSummary summarize(const LogTable& log);
/// `key: value` lines; undefined metrics print as "undefined".
std::string format_report(const LogSummary& s);

}  // namespace tod::harness
