#pragma once

// Live-mode transports over POSIX sockets.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tod/net/control.hpp"
#include "tod/net/datagram.hpp"
#include "tod/net/link_stats.hpp"
#include "tod/net/scheduler.hpp"

namespace tod::net {

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
};

/// Parses "host:port". Throws Error(Parse).
Endpoint parse_endpoint(const std::string& text);

class UdpTransport final : public DatagramTransport {
 public:
  /// Binds `local` (port 0 picks a free port) and sends to `remote`.
  UdpTransport(const Scheduler& clock, const Endpoint& local, const Endpoint& remote,
               std::shared_ptr<LinkStatsCollector> stats = nullptr);
  ~UdpTransport() override;
  UdpTransport(const UdpTransport&) = delete;
  UdpTransport& operator=(const UdpTransport&) = delete;

  bool send(std::span<const std::uint8_t> bytes) override;
  std::optional<Datagram> poll() override;
  void close() override;
  bool closed() const override { return fd_ < 0; }

  std::uint16_t local_port() const;
  void set_remote(const Endpoint& remote);

 private:
  const Scheduler& clock_;
  int fd_ = -1;
  std::vector<std::uint8_t> remote_addr_;
  std::shared_ptr<LinkStatsCollector> stats_;
};

/// Hosts a ControlBroker on a TCP listening socket. Drive with poll().
class TcpControlServer {
 public:
  TcpControlServer(ControlBroker& broker, const Endpoint& listen, TimeNs keepalive_timeout_ns = 2'000'000'000);
  ~TcpControlServer();
  TcpControlServer(const TcpControlServer&) = delete;
  TcpControlServer& operator=(const TcpControlServer&) = delete;

  void poll(TimeNs now_ns);
  std::uint16_t port() const;
  std::size_t connection_count() const noexcept { return conns_.size(); }

 private:
  struct Conn;
  void drop(int fd);

  ControlBroker& broker_;
  TimeNs keepalive_timeout_;
  int listen_fd_ = -1;
  std::map<int, std::unique_ptr<Conn>> conns_;
};

/// Client end of a TCP control connection.
class TcpControlPipe final : public ControlPipe {
 public:
  /// Throws Error(Io) if the connection cannot be established.
  explicit TcpControlPipe(const Endpoint& server);
  ~TcpControlPipe() override;
  TcpControlPipe(const TcpControlPipe&) = delete;
  TcpControlPipe& operator=(const TcpControlPipe&) = delete;

  void send(const ControlFrame& frame) override;
  std::optional<ControlFrame> poll() override;
  bool broken() const override { return broken_; }
  void close() override;

 private:
  void flush();

  int fd_ = -1;
  bool broken_ = false;
  ControlFrameParser parser_;
  std::vector<std::uint8_t> out_;
};

/// Line-oriented local TCP server carrying newline-delimited JSON.
class LineServer {
 public:
  explicit LineServer(const Endpoint& listen);
  ~LineServer();
  LineServer(const LineServer&) = delete;
  LineServer& operator=(const LineServer&) = delete;

  /// Accepts new clients and returns complete lines received since the last call.
  std::vector<std::string> poll();
  void broadcast(const std::string& line);
  std::uint16_t port() const;
  std::size_t client_count() const noexcept { return clients_.size(); }

 private:
  struct Client {
    std::string in;
    std::string out;
  };
  int listen_fd_ = -1;
  std::map<int, Client> clients_;
};

}  // namespace tod::net
