#include "tod/harness/live.hpp"

#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>

#include "text.hpp"
#include "tod/core/error.hpp"
#include "tod/harness/scenario.hpp"
#include "tod/net/sockets.hpp"
#include "tod/operator/node.hpp"
#include "tod/vehicle/node.hpp"

namespace tod::harness {

namespace fs = std::filesystem;
using net::TimeNs;

namespace {

constexpr const char* kVehicleName = "ego";

net::Endpoint endpoint_value(const std::vector<std::string>& tok) {
  if (tok.size() != 2) throw Error(ErrorCode::Parse, "'" + tok[0] + "' takes host:port");
  return net::parse_endpoint(tok[1]);
}

std::vector<std::string> scan_names(const Scenario& s) {
  std::vector<std::string> out;
  for (const auto& sc : s.sensors) out.push_back(sc.name);
  return out;
}

std::vector<std::string> camera_names(const Scenario& s) {
  std::vector<std::string> out;
  for (const auto& c : s.streams) out.push_back(c.camera_id);
  return out;
}

void run_loop(net::RealTimeScheduler& sched, double duration_s, const std::atomic<bool>& stop) {
  net::PeriodicTask watcher(sched, sched.now_ns(), net::seconds_to_ns(0.05), [&](TimeNs) {
    if (stop.load()) sched.stop();
  });
  sched.run_until(sched.now_ns() + net::seconds_to_ns(duration_s));
}

}  // namespace

void run_live_vehicle(const std::string& config_path, const std::atomic<bool>& stop) {
  net::Endpoint udp_listen{"0.0.0.0", 7000}, udp_operator{"127.0.0.1", 7001}, control_listen{"0.0.0.0", 7100};
  const Scenario s = load_node_config(config_path, [&](const std::vector<std::string>& tok) {
    if (tok[0] == "udp_listen") udp_listen = endpoint_value(tok);
    else if (tok[0] == "udp_operator") udp_operator = endpoint_value(tok);
    else if (tok[0] == "control_listen") control_listen = endpoint_value(tok);
    else return false;
    return true;
  });

  net::RealTimeScheduler sched;
  const TopicRegistry topics = vehicle::make_registry(kVehicleName, scan_names(s), camera_names(s));
  net::UdpTransport udp(sched, udp_listen, udp_operator);
  net::ControlBroker broker;
  net::TcpControlServer server(broker, control_listen);

  vehicle::VehicleNodeConfig vc;
  vc.name = kVehicleName;
  vc.params = s.params;
  vc.start_pose = s.start_pose;
  vc.world = s.world;
  vc.transforms = s.transforms;
  vc.sensors = s.sensors;
  vc.streams = s.streams;
  vc.plant_rate_hz = s.plant_rate_hz;
  vc.state_rate_hz = s.state_rate_hz;
  vehicle::VehicleNode node(sched, vc, topics, udp, udp, broker);
  node.on_abort = [&](const std::string& why) { std::fprintf(stderr, "vehicle: %s\n", why.c_str()); };

  net::PeriodicTask io(sched, sched.now_ns(), net::seconds_to_ns(0.001), [&](TimeNs now) {
    node.pump();
    server.poll(now);
  });
  node.start();
  std::fprintf(stderr, "vehicle: udp %u, control %u\n", udp.local_port(), server.port());
  run_loop(sched, s.duration, stop);
}

void run_live_operator(const std::string& config_path, int ui_port, const std::atomic<bool>& stop) {
  net::Endpoint udp_listen{"0.0.0.0", 7001}, udp_vehicle{"127.0.0.1", 7000};
  std::optional<std::string> control, mapping_path;
  int port_from_file = 7200;
  bool autoconnect = false;
  const Scenario s = load_node_config(config_path, [&](const std::vector<std::string>& tok) {
    if (tok[0] == "udp_listen") udp_listen = endpoint_value(tok);
    else if (tok[0] == "udp_vehicle") udp_vehicle = endpoint_value(tok);
    else if (tok[0] == "control") {
      endpoint_value(tok);
      control = tok[1];
    } else if (tok[0] == "mapping" && tok.size() == 2) {
      fs::path p(tok[1]);
      if (p.is_relative()) p = fs::path(config_path).parent_path() / p;
      mapping_path = p.string();
    } else if (tok[0] == "ui_port" && tok.size() == 2) {
      try {
        port_from_file = std::stoi(tok[1]);
      } catch (const std::exception&) {
        throw Error(ErrorCode::Parse, "ui_port is not a number");
      }
    } else if (tok[0] == "autoconnect" && tok.size() == 2) {
      autoconnect = tok[1] == "1";
    } else {
      return false;
    }
    return true;
  });
  const int port = ui_port >= 0 ? ui_port : port_from_file;
  if (port < 0 || port > 65535) throw Error(ErrorCode::Validation, "ui_port must be in [0, 65535]");

  net::RealTimeScheduler sched;
  const TopicRegistry topics = vehicle::make_registry(kVehicleName, scan_names(s), camera_names(s));
  auto rx_stats = std::make_shared<net::LinkStatsCollector>(1.0);
  net::UdpTransport udp(sched, udp_listen, udp_vehicle, rx_stats);
  net::LineServer ui(net::Endpoint{"127.0.0.1", static_cast<std::uint16_t>(port)});

  op::OperatorNodeConfig oc;
  oc.params = s.params;
  oc.command_rate_hz = s.command_rate_hz;
  if (mapping_path) oc.mapping = op::load_input_mapping(*mapping_path);
  oc.scene.vehicle_name = kVehicleName;
  oc.scene.params = s.params;
  oc.scene.transforms = s.transforms;
  oc.scene.scans = scan_names(s);
  oc.scene.cameras = camera_names(s);
  oc.streams = s.streams;
  oc.adapt = s.adapt;
  op::OperatorNode node(sched, oc, topics, udp, udp, rx_stats);
  node.set_pipe_factory([&]() -> std::shared_ptr<net::ControlPipe> {
    return std::make_shared<net::TcpControlPipe>(net::parse_endpoint(node.session().vehicle_endpoint));
  });
  node.on_ui_line = [&](const std::string& line) { ui.broadcast(line); };

  net::PeriodicTask io(sched, sched.now_ns(), net::seconds_to_ns(0.001), [&](TimeNs) {
    node.pump();
    for (const auto& line : ui.poll()) node.handle_ui_line(line);
  });
  node.start();
  if (autoconnect && control) {
    op::ManagerEvent e;
    e.type = op::ManagerEventType::SetEndpoints;
    e.vehicle_endpoint = *control;
    e.operator_endpoint = udp_listen.host + ":" + std::to_string(udp.local_port());
    node.handle_event(e);
    e.type = op::ManagerEventType::Connect;
    node.handle_event(e);
  }
  std::fprintf(stderr, "operator: udp %u, ui 127.0.0.1:%u\n", udp.local_port(), ui.port());
  run_loop(sched, s.duration, stop);
}

}  // namespace tod::harness
