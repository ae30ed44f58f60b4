#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <thread>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "tod/harness/live.hpp"

using nlohmann::json;
using namespace std::chrono_literals;
namespace fs = std::filesystem;

namespace {

// Minimal NDJSON client for the operator UI socket.
class UiClient {
 public:
  explicit UiClient(std::uint16_t port) {
    for (int attempt = 0; attempt < 100 && fd_ < 0; ++attempt) {
      const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
      sockaddr_in addr{};
      addr.sin_family = AF_INET;
      addr.sin_port = htons(port);
      addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
      if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0) {
        fd_ = fd;
      } else {
        ::close(fd);
        std::this_thread::sleep_for(20ms);
      }
    }
  }
  ~UiClient() {
    if (fd_ >= 0) ::close(fd_);
  }
  bool ok() const { return fd_ >= 0; }

  void send(const json& j) {
    const std::string line = j.dump() + "\n";
    (void)::send(fd_, line.data(), line.size(), MSG_NOSIGNAL);
  }

  // Lines received within `wait`.
  std::vector<json> read(std::chrono::milliseconds wait) {
    std::vector<json> out;
    const auto until = std::chrono::steady_clock::now() + wait;
    while (std::chrono::steady_clock::now() < until) {
      pollfd p{fd_, POLLIN, 0};
      if (::poll(&p, 1, 10) <= 0) continue;
      char buf[65536];
      const ssize_t n = ::recv(fd_, buf, sizeof(buf), 0);
      if (n <= 0) break;
      buf_.append(buf, static_cast<std::size_t>(n));
      std::size_t nl;
      while ((nl = buf_.find('\n')) != std::string::npos) {
        out.push_back(json::parse(buf_.substr(0, nl)));
        buf_.erase(0, nl + 1);
      }
    }
    return out;
  }

 private:
  int fd_ = -1;
  std::string buf_;
};

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("live vehicle and operator over loopback") {
  const fs::path dir = fs::temp_directory_path() / ("tod_live_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  write_file(dir / "v.world", "bounds -50 -50 50 50\n");
  write_file(dir / "vehicle.conf",
             "name vehicle\nworld v.world\nudp_listen 127.0.0.1:47300\nudp_operator 127.0.0.1:47301\n"
             "control_listen 127.0.0.1:47310\nstream front bitrate 2000000 framerate 20\n");
  write_file(dir / "operator.conf",
             "name operator\nudp_listen 127.0.0.1:47301\nudp_vehicle 127.0.0.1:47300\ncontrol 127.0.0.1:47310\n"
             "ui_port 9\nstream front bitrate 2000000 framerate 20\n");

  std::atomic<bool> stop{false};
  std::string vehicle_error, operator_error;
  std::thread vehicle([&] {
    try {
      tod::harness::run_live_vehicle((dir / "vehicle.conf").string(), stop);
    } catch (const std::exception& e) {
      vehicle_error = e.what();
    }
  });
  std::this_thread::sleep_for(100ms);
  std::thread op([&] {
    try {
      tod::harness::run_live_operator((dir / "operator.conf").string(), 47320, stop);
    } catch (const std::exception& e) {
      operator_error = e.what();
    }
  });

  std::vector<json> seen;
  {
    UiClient ui(47320);
    REQUIRE(ui.ok());
    ui.send({{"type", "manager_event"},
             {"event", "set_endpoints"},
             {"vehicle_endpoint", "127.0.0.1:47310"},
             {"operator_endpoint", "127.0.0.1:47301"}});
    ui.send({{"type", "manager_event"}, {"event", "connect"}});
    for (auto& j : ui.read(500ms)) seen.push_back(j);
    ui.send({{"type", "manager_event"}, {"event", "select_input_device"}, {"device", "virtual"}});
    ui.send({{"type", "manager_event"}, {"event", "start"}});
    for (int i = 0; i < 80; ++i) {
      ui.send({{"type", "input_sample"}, {"device", "virtual"}, {"axes", {0.1, 0.0, 0.0, 0.0}}});
      for (auto& j : ui.read(25ms)) seen.push_back(j);
    }
    ui.send({{"type", "teleport"}});
    for (auto& j : ui.read(1200ms)) seen.push_back(j);
  }
  stop = true;
  op.join();
  vehicle.join();
  fs::remove_all(dir);

  CHECK(vehicle_error.empty());
  CHECK(operator_error.empty());
  std::string last_phase;
  bool error_line = false, snapshot = false;
  std::optional<json> last_metrics;
  for (const auto& j : seen) {
    const auto type = j.at("type").get<std::string>();
    if (type == "session") last_phase = j.at("phase").get<std::string>();
    if (type == "error") error_line = true;
    if (type == "scene_snapshot") snapshot = true;
    if (type == "metrics") last_metrics = j;
  }
  CHECK(last_phase == "teleoperating");
  CHECK(error_line);
  CHECK(snapshot);
  REQUIRE(last_metrics);
  CHECK(last_metrics->at("vehicle_status").at("ready") == true);
  CHECK(last_metrics->at("vehicle_status").at("mode") == "normal");
  CHECK(last_metrics->at("command_rate_hz").get<double>() == doctest::Approx(50.0).epsilon(0.05));
}
