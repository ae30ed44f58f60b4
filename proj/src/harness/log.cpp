#include "tod/harness/log.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tod/core/error.hpp"

namespace tod::harness {

namespace {

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  // "-0.000000" and "0.000000" are the same sample.
  if (std::string(buf) == "-0.000000") return "0.000000";
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::string format_csv(const LogTable& log) {
  std::string out = kLogHeader;
  out += '\n';
  for (const auto& r : log) {
    out += fixed6(static_cast<double>(r.t_ns) * 1e-9);
    for (double v : {r.desired_swa, r.actual_swa, r.desired_v, r.actual_v}) {
      out += ',';
      out += fixed6(v);
    }
    out += ',';
    out += to_string(r.gear);
    out += r.estop ? ",1," : ",0,";
    out += to_string(r.mode);
    out += '\n';
  }
  return out;
}

void export_logs(const LogTable& log, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::Io, "cannot write log file '" + path + "'");
  f << format_csv(log);
  if (!f) throw Error(ErrorCode::Io, "failed writing log file '" + path + "'");
}

LogTable parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::Parse, "log line " + std::to_string(lineno) + ": " + why);
  };
  if (!std::getline(in, line)) {
    lineno = 1;
    fail("empty file, expected header");
  }
  lineno = 1;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kLogHeader) fail("header must be '" + std::string(kLogHeader) + "'");

  LogTable log;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 8) fail("expected 8 fields, found " + std::to_string(f.size()));
    auto num = [&](std::size_t i) {
      try {
        std::size_t used = 0;
        const double v = std::stod(f[i], &used);
        if (used != f[i].size() || !std::isfinite(v)) throw std::invalid_argument(f[i]);
        return v;
      } catch (const std::exception&) {
        fail("field " + std::to_string(i + 1) + " '" + f[i] + "' is not a number");
      }
      return 0.0;
    };
    op::LogRow r;
    r.t_ns = static_cast<std::int64_t>(std::llround(num(0) * 1e9));
    r.desired_swa = num(1);
    r.actual_swa = num(2);
    r.desired_v = num(3);
    r.actual_v = num(4);
    if (!parse_gear(f[5], r.gear)) fail("unknown gear '" + f[5] + "'");
    if (f[6] != "0" && f[6] != "1") fail("estop must be 0 or 1");
    r.estop = f[6] == "1";
    if (!parse_drive_mode(f[7], r.mode)) fail("unknown mode '" + f[7] + "'");
    if (!log.empty() && r.t_ns <= log.back().t_ns) fail("t must strictly increase");
    log.push_back(r);
  }
  return log;
}

LogTable read_log(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot read log file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_csv(ss.str());
}

LogSummary summarize(const LogTable& log) {
  LogSummary s;
  s.rows = log.size();
  if (log.empty()) return s;
  s.duration_s = static_cast<double>(log.back().t_ns - log.front().t_ns) * 1e-9;
  if (log.size() > 1) s.command_period_s = s.duration_s / static_cast<double>(log.size() - 1);
  std::vector<op::SignalSample> window;
  for (std::size_t i = 0; i < log.size(); ++i) {
    const auto& r = log[i];
    s.peak_desired_v = std::max(s.peak_desired_v, std::abs(r.desired_v));
    s.peak_actual_v = std::max(s.peak_actual_v, std::abs(r.actual_v));
    s.max_abs_swa = std::max(s.max_abs_swa, std::abs(r.actual_swa));
    if (r.mode == DriveMode::SafeStop) ++s.safe_stop_rows;
    if (r.estop) ++s.estop_rows;
    if (i > 0 && r.gear != log[i - 1].gear && std::abs(log[i - 1].actual_v) >= 0.1) ++s.moving_gear_changes;
    window.push_back({r.t_ns, r.desired_swa, r.actual_swa, r.desired_v, r.actual_v});
  }
  op::MetricsParams p;
  if (s.command_period_s > 0.0) p.command_period_s = s.command_period_s;
  s.metrics = op::compute_metrics(window, {}, net::ClockSync{}, p);
  return s;
}

std::string format_report(const LogSummary& s) {
  std::ostringstream o;
  auto opt = [&](const char* key, const std::optional<double>& v) {
    o << key << ": ";
    if (v) o << fixed6(*v);
    else o << "undefined";
    o << '\n';
  };
  o << "rows: " << s.rows << '\n';
  o << "duration_s: " << fixed6(s.duration_s) << '\n';
  o << "command_period_s: " << fixed6(s.command_period_s) << '\n';
  opt("actuation_latency_ms", s.metrics.actuation_latency_ms);
  opt("swa_rmse", s.metrics.swa_rmse);
  opt("velocity_rmse", s.metrics.velocity_rmse);
  o << "peak_desired_v: " << fixed6(s.peak_desired_v) << '\n';
  o << "peak_actual_v: " << fixed6(s.peak_actual_v) << '\n';
  o << "max_abs_actual_swa: " << fixed6(s.max_abs_swa) << '\n';
  o << "safe_stop_rows: " << s.safe_stop_rows << '\n';
  o << "estop_rows: " << s.estop_rows << '\n';
  o << "gear_changes_while_moving: " << s.moving_gear_changes << '\n';
  return o.str();
}

}  // namespace tod::harness
