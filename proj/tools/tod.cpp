// tod: command-line front end over the C API.
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <string>

#include <CLI11.hpp>

#include "tod/tod.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitValidation = 2;
constexpr int kExitAborted = 3;

int exit_for(tod_status st) {
  switch (st) {
    case TOD_OK: return kExitOk;
    case TOD_ERR_PARSE:
    case TOD_ERR_VALIDATION:
    case TOD_ERR_IO:
    case TOD_ERR_INVALID_ARGUMENT: return kExitValidation;
    case TOD_ERR_ABORTED: return kExitAborted;
    default: return kExitFailure;
  }
}

int report_error(tod_status st) {
  std::fprintf(stderr, "tod: %s: %s\n", tod_status_name(st), tod_last_error());
  return exit_for(st);
}

void print_metric(const tod_run* run, const char* name) {
  double v = 0;
  int defined = 0;
  if (tod_run_metric(run, name, &v, &defined) != TOD_OK) return;
  if (defined)
    std::printf("%s: %.6f\n", name, v);
  else
    std::printf("%s: undefined\n", name);
}

int cmd_run(const std::string& scenario_path, const std::string& out_dir) {
  tod_scenario* sc = nullptr;
  tod_status st = tod_scenario_load(scenario_path.c_str(), &sc);
  if (st != TOD_OK) return report_error(st);

  if (const char* env = std::getenv("TOD_SEED"); env && *env) {
    char* end = nullptr;
    errno = 0;
    const unsigned long long seed = std::strtoull(env, &end, 0);
    if (errno != 0 || *end != '\0' || *env == '-') {
      std::fprintf(stderr, "tod: validation: TOD_SEED '%s' is not an unsigned integer\n", env);
      tod_scenario_free(sc);
      return kExitValidation;
    }
    tod_scenario_set_seed(sc, seed);
  }

  tod_run* run = nullptr;
  st = tod_scenario_run(sc, &run);
  tod_scenario_free(sc);
  if (!run) return report_error(st);

  const tod_status wst = tod_run_write(run, out_dir.c_str());
  if (wst != TOD_OK) {
    tod_run_free(run);
    return report_error(wst);
  }
  print_metric(run, "actuation_latency_ms");
  print_metric(run, "swa_rmse");
  print_metric(run, "velocity_rmse");
  print_metric(run, "command_rate_hz");

  int aborted = 0;
  const char* reason = "";
  tod_run_aborted(run, &aborted, &reason);
  if (aborted) std::fprintf(stderr, "tod: run aborted: %s\n", reason);
  tod_run_free(run);
  return aborted ? kExitAborted : kExitOk;
}

int cmd_report(const std::string& log_path) {
  char* text = nullptr;
  const tod_status st = tod_report(log_path.c_str(), &text);
  if (st != TOD_OK) return report_error(st);
  std::fputs(text, stdout);
  tod_string_free(text);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Teleoperated driving: vehicle and operator nodes, scenario runner"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(tod_version()));

  std::string config;
  std::string scenario;
  std::string out_dir;
  std::string log_path;
  int ui_port = -1;

  auto* vehicle = app.add_subcommand("vehicle", "Run the vehicle node over UDP/TCP");
  vehicle->add_option("--config", config, "Vehicle config file")->required();

  auto* op = app.add_subcommand("operator", "Run the operator node and its UI socket");
  op->add_option("--config", config, "Operator config file")->required();
  op->add_option("--ui-port", ui_port, "NDJSON UI port")->check(CLI::Range(0, 65535));

  auto* run = app.add_subcommand("run", "Run a scenario in virtual time");
  run->add_option("--scenario", scenario, "Scenario file")->required();
  run->add_option("--out", out_dir, "Output directory")->required();

  auto* report = app.add_subcommand("report", "Summarize a log CSV");
  report->add_option("--log", log_path, "Log CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  if (*vehicle) {
    const tod_status st = tod_live_vehicle(config.c_str());
    return st == TOD_OK ? kExitOk : report_error(st);
  }
  if (*op) {
    const tod_status st = tod_live_operator(config.c_str(), ui_port);
    return st == TOD_OK ? kExitOk : report_error(st);
  }
  if (*run) return cmd_run(scenario, out_dir);
  return cmd_report(log_path);
}
