#pragma once

#include <atomic>
#include <string>

namespace tod::harness {

/// Vehicle node on real sockets. Config keys beyond the scenario format:
///   udp_listen host:port     datagrams from the operator
///   udp_operator host:port   where telemetry is sent
///   control_listen host:port control broker (TCP)
/// Returns when `stop` turns true or the duration elapses.
void run_live_vehicle(const std::string& config_path, const std::atomic<bool>& stop);

/// Operator node on real sockets with the NDJSON UI server. Extra keys:
///   udp_listen, udp_vehicle       datagram endpoints
///   control host:port             default vehicle endpoint for autoconnect
///   mapping <file>                input mapping
///   ui_port N                     UI server port on 127.0.0.1
///   autoconnect 0|1               SetEndpoints + Connect at start
/// `ui_port` >= 0 overrides the file.
void run_live_operator(const std::string& config_path, int ui_port, const std::atomic<bool>& stop);

}  // namespace tod::harness
