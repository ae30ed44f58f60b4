#include "tod/tod.h"

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <optional>
#include <string>

#include "tod/core/error.hpp"
#include "tod/harness/live.hpp"
#include "tod/harness/log.hpp"
#include "tod/harness/runner.hpp"
#include "tod/harness/scenario.hpp"

struct tod_scenario {
  tod::harness::Scenario scenario;
};

struct tod_run {
  tod::harness::RunResult result;
  tod::harness::Scenario scenario;
};

namespace {

thread_local std::string g_last_error;
std::atomic<bool> g_stop{false};

tod_status map_code(tod::ErrorCode code) {
  using tod::ErrorCode;
  switch (code) {
    case ErrorCode::Parse: return TOD_ERR_PARSE;
    case ErrorCode::Validation:
    case ErrorCode::UnknownFrame:
    case ErrorCode::DisconnectedFrames:
    case ErrorCode::NonFinite: return TOD_ERR_VALIDATION;
    case ErrorCode::InvalidArgument: return TOD_ERR_INVALID_ARGUMENT;
    case ErrorCode::Io: return TOD_ERR_IO;
    case ErrorCode::Aborted: return TOD_ERR_ABORTED;
    case ErrorCode::Closed: return TOD_ERR_CLOSED;
    case ErrorCode::Oversize:
    case ErrorCode::BadMagic:
    case ErrorCode::UnknownVersion:
    case ErrorCode::UnknownTopic:
    case ErrorCode::LengthMismatch:
    case ErrorCode::Truncated:
    case ErrorCode::InvalidField: return TOD_ERR_CODEC;
  }
  return TOD_ERR_INTERNAL;
}

tod_status fail(tod_status st, std::string msg) {
  g_last_error = std::move(msg);
  return st;
}

template <typename F>
tod_status guarded(F&& f) {
  try {
    g_last_error.clear();
    return f();
  } catch (const tod::Error& e) {
    return fail(map_code(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(TOD_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(TOD_ERR_INTERNAL, e.what());
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

extern "C" void on_signal(int) { g_stop.store(true); }

void install_signals() {
  g_stop.store(false);
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
}

}  // namespace

extern "C" {

const char* tod_last_error(void) { return g_last_error.c_str(); }

const char* tod_status_name(tod_status status) {
  switch (status) {
    case TOD_OK: return "ok";
    case TOD_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case TOD_ERR_PARSE: return "parse";
    case TOD_ERR_VALIDATION: return "validation";
    case TOD_ERR_IO: return "io";
    case TOD_ERR_ABORTED: return "aborted";
    case TOD_ERR_CODEC: return "codec";
    case TOD_ERR_CLOSED: return "closed";
    case TOD_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* tod_version(void) { return "0.1.0"; }

tod_status tod_scenario_load(const char* path, tod_scenario** out) {
  if (!path || !out) return fail(TOD_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto h = std::make_unique<tod_scenario>();
    h->scenario = tod::harness::load_scenario(path);
    *out = h.release();
    return TOD_OK;
  });
}

tod_status tod_scenario_set_seed(tod_scenario* scenario, uint64_t seed) {
  if (!scenario) return fail(TOD_ERR_INVALID_ARGUMENT, "null scenario");
  scenario->scenario.seed = seed;
  return TOD_OK;
}

tod_status tod_scenario_seed(const tod_scenario* scenario, uint64_t* out) {
  if (!scenario || !out) return fail(TOD_ERR_INVALID_ARGUMENT, "null argument");
  *out = scenario->scenario.seed;
  return TOD_OK;
}

tod_status tod_scenario_name(const tod_scenario* scenario, const char** out) {
  if (!scenario || !out) return fail(TOD_ERR_INVALID_ARGUMENT, "null argument");
  *out = scenario->scenario.name.c_str();
  return TOD_OK;
}

void tod_scenario_free(tod_scenario* scenario) { delete scenario; }

tod_status tod_scenario_run(const tod_scenario* scenario, tod_run** out) {
  if (!scenario || !out) return fail(TOD_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto h = std::make_unique<tod_run>();
    h->scenario = scenario->scenario;
    h->result = tod::harness::run_scenario(h->scenario);
    const bool aborted = h->result.aborted;
    const std::string reason = h->result.abort_reason;
    *out = h.release();
    return aborted ? fail(TOD_ERR_ABORTED, "run aborted: " + reason) : TOD_OK;
  });
}

tod_status tod_run_aborted(const tod_run* run, int* aborted, const char** reason) {
  if (!run || !aborted) return fail(TOD_ERR_INVALID_ARGUMENT, "null argument");
  *aborted = run->result.aborted ? 1 : 0;
  if (reason) *reason = run->result.abort_reason.c_str();
  return TOD_OK;
}

tod_status tod_run_write(const tod_run* run, const char* dir) {
  if (!run || !dir) return fail(TOD_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    tod::harness::write_outputs(run->result, run->scenario, dir);
    return TOD_OK;
  });
}

tod_status tod_run_metric(const tod_run* run, const char* name, double* value, int* defined) {
  if (!run || !name || !value || !defined) return fail(TOD_ERR_INVALID_ARGUMENT, "null argument");
  const auto& m = run->result.metrics;
  const std::string n = name;
  std::optional<double> v;
  if (n == "actuation_latency_ms") v = m.actuation_latency_ms;
  else if (n == "swa_rmse") v = m.swa_rmse;
  else if (n == "velocity_rmse") v = m.velocity_rmse;
  else if (n == "command_rate_hz") v = m.command_rate_hz;
  else if (n.rfind("g2g_ms:", 0) == 0) {
    auto it = m.g2g_ms.find(n.substr(7));
    if (it != m.g2g_ms.end()) v = it->second;
  } else {
    return fail(TOD_ERR_INVALID_ARGUMENT, "unknown metric '" + n + "'");
  }
  *defined = v ? 1 : 0;
  *value = v.value_or(0.0);
  return TOD_OK;
}

tod_status tod_run_log_csv(const tod_run* run, char** out) {
  if (!run || !out) return fail(TOD_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out = dup_string(tod::harness::format_csv(run->result.log));
    return TOD_OK;
  });
}

void tod_run_free(tod_run* run) { delete run; }

tod_status tod_report(const char* csv_path, char** out) {
  if (!csv_path || !out) return fail(TOD_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    const auto log = tod::harness::read_log(csv_path);
    *out = dup_string(tod::harness::format_report(tod::harness::summarize(log)));
    return TOD_OK;
  });
}

tod_status tod_live_vehicle(const char* config_path) {
  if (!config_path) return fail(TOD_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    install_signals();
    tod::harness::run_live_vehicle(config_path, g_stop);
    return TOD_OK;
  });
}

tod_status tod_live_operator(const char* config_path, int ui_port) {
  if (!config_path) return fail(TOD_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    install_signals();
    tod::harness::run_live_operator(config_path, ui_port, g_stop);
    return TOD_OK;
  });
}

void tod_string_free(char* s) { std::free(s); }

}  // extern "C"
