#include "tod/net/sockets.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "tod/core/error.hpp"

namespace tod::net {

namespace {

[[noreturn]] void io_error(const std::string& what) {
  throw Error(ErrorCode::Io, what + ": " + std::strerror(errno));
}

sockaddr_in resolve(const Endpoint& ep) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(ep.port);
  if (ep.host.empty() || ep.host == "0.0.0.0") {
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
    return addr;
  }
  if (inet_pton(AF_INET, ep.host.c_str(), &addr.sin_addr) == 1) return addr;
  addrinfo hints{};
  hints.ai_family = AF_INET;
  addrinfo* res = nullptr;
  if (getaddrinfo(ep.host.c_str(), nullptr, &hints, &res) != 0 || !res)
    throw Error(ErrorCode::Io, "cannot resolve host " + ep.host);
  addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
  freeaddrinfo(res);
  return addr;
}

void set_nonblocking(int fd) {
  const int flags = fcntl(fd, F_GETFL, 0);
  fcntl(fd, F_SETFL, flags | O_NONBLOCK);
}

std::uint16_t bound_port(int fd) {
  sockaddr_in addr{};
  socklen_t len = sizeof(addr);
  getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  return ntohs(addr.sin_port);
}

int listen_tcp(const Endpoint& ep) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) io_error("socket");
  int one = 1;
  setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  const sockaddr_in addr = resolve(ep);
  if (::bind(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) < 0 || ::listen(fd, 8) < 0) {
    ::close(fd);
    io_error("listen on port " + std::to_string(ep.port));
  }
  set_nonblocking(fd);
  return fd;
}

// Returns false when the peer is gone.
bool read_available(int fd, std::vector<std::uint8_t>& into) {
  std::uint8_t buf[16384];
  while (true) {
    const ssize_t n = ::recv(fd, buf, sizeof(buf), 0);
    if (n > 0) {
      into.insert(into.end(), buf, buf + n);
      continue;
    }
    if (n == 0) return false;
    return errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR;
  }
}

bool write_pending(int fd, std::vector<std::uint8_t>& out) {
  while (!out.empty()) {
    const ssize_t n = ::send(fd, out.data(), out.size(), MSG_NOSIGNAL);
    if (n > 0) {
      out.erase(out.begin(), out.begin() + n);
      continue;
    }
    return n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR);
  }
  return true;
}

}  // namespace

Endpoint parse_endpoint(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos) throw Error(ErrorCode::Parse, "endpoint '" + text + "' is not host:port");
  Endpoint ep;
  ep.host = text.substr(0, colon);
  try {
    const int port = std::stoi(text.substr(colon + 1));
    if (port < 0 || port > 65535) throw std::out_of_range("port");
    ep.port = static_cast<std::uint16_t>(port);
  } catch (const std::exception&) {
    throw Error(ErrorCode::Parse, "endpoint '" + text + "' has an invalid port");
  }
  return ep;
}

// --- UDP ---

UdpTransport::UdpTransport(const Scheduler& clock, const Endpoint& local, const Endpoint& remote,
                           std::shared_ptr<LinkStatsCollector> stats)
    : clock_(clock), stats_(std::move(stats)) {
  fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
  if (fd_ < 0) io_error("udp socket");
  const sockaddr_in addr = resolve(local);
  if (::bind(fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) < 0) {
    ::close(fd_);
    fd_ = -1;
    io_error("udp bind port " + std::to_string(local.port));
  }
  set_nonblocking(fd_);
  set_remote(remote);
}

UdpTransport::~UdpTransport() { close(); }

void UdpTransport::set_remote(const Endpoint& remote) {
  const sockaddr_in addr = resolve(remote);
  remote_addr_.assign(reinterpret_cast<const std::uint8_t*>(&addr),
                      reinterpret_cast<const std::uint8_t*>(&addr) + sizeof(addr));
}

bool UdpTransport::send(std::span<const std::uint8_t> bytes) {
  if (fd_ < 0) throw Error(ErrorCode::Closed, "udp socket closed");
  if (stats_) stats_->record_sent(peek_topic(bytes));
  const ssize_t n = ::sendto(fd_, bytes.data(), bytes.size(), 0, reinterpret_cast<const sockaddr*>(remote_addr_.data()),
                             static_cast<socklen_t>(remote_addr_.size()));
  return n == static_cast<ssize_t>(bytes.size());
}

std::optional<Datagram> UdpTransport::poll() {
  if (fd_ < 0) return std::nullopt;
  std::vector<std::uint8_t> buf(kMaxDatagramSize);
  const ssize_t n = ::recv(fd_, buf.data(), buf.size(), 0);
  if (n < 0) return std::nullopt;
  buf.resize(static_cast<std::size_t>(n));
  const TimeNs now = clock_.now_ns();
  if (stats_) stats_->record_received(buf.size(), 0, now, peek_topic(buf));
  return Datagram{std::move(buf), now};
}

void UdpTransport::close() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

std::uint16_t UdpTransport::local_port() const { return bound_port(fd_); }

// --- TCP control server ---

struct TcpControlServer::Conn {
  ControlBroker::SessionId session = 0;
  ControlFrameParser parser;
  std::vector<std::uint8_t> out;
  TimeNs last_rx = 0;
};

TcpControlServer::TcpControlServer(ControlBroker& broker, const Endpoint& listen, TimeNs keepalive_timeout_ns)
    : broker_(broker), keepalive_timeout_(keepalive_timeout_ns), listen_fd_(listen_tcp(listen)) {}

TcpControlServer::~TcpControlServer() {
  for (auto& [fd, conn] : conns_) {
    broker_.detach(conn->session);
    ::close(fd);
  }
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

std::uint16_t TcpControlServer::port() const { return bound_port(listen_fd_); }

void TcpControlServer::drop(int fd) {
  auto it = conns_.find(fd);
  if (it == conns_.end()) return;
  broker_.detach(it->second->session);
  ::close(fd);
  conns_.erase(it);
}

void TcpControlServer::poll(TimeNs now_ns) {
  while (true) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) break;
    set_nonblocking(fd);
    int one = 1;
    setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    auto conn = std::make_unique<Conn>();
    Conn* raw = conn.get();
    conn->session = broker_.attach(
        [raw](const ControlFrame& f) {
          const auto bytes = encode_control_frame(f);
          raw->out.insert(raw->out.end(), bytes.begin(), bytes.end());
        },
        now_ns);
    conn->last_rx = now_ns;
    conns_.emplace(fd, std::move(conn));
  }

  std::vector<int> dead;
  for (auto& [fd, conn] : conns_) {
    std::vector<std::uint8_t> in;
    bool ok = read_available(fd, in);
    if (!in.empty()) {
      conn->last_rx = now_ns;
      conn->parser.feed(in);
      try {
        while (auto frame = conn->parser.next()) broker_.handle(conn->session, *frame, now_ns);
      } catch (const Error&) {
        ok = false;
      }
    }
    if (ok) ok = write_pending(fd, conn->out);
    if (!ok || now_ns - conn->last_rx > keepalive_timeout_) dead.push_back(fd);
  }
  for (int fd : dead) drop(fd);
}

// --- TCP control client ---

TcpControlPipe::TcpControlPipe(const Endpoint& server) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) io_error("tcp socket");
  const sockaddr_in addr = resolve(server);
  if (::connect(fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) < 0) {
    ::close(fd_);
    fd_ = -1;
    io_error("connect to " + server.host + ":" + std::to_string(server.port));
  }
  int one = 1;
  setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  set_nonblocking(fd_);
}

TcpControlPipe::~TcpControlPipe() { close(); }

void TcpControlPipe::send(const ControlFrame& frame) {
  if (broken_) return;
  const auto bytes = encode_control_frame(frame);
  out_.insert(out_.end(), bytes.begin(), bytes.end());
  flush();
}

void TcpControlPipe::flush() {
  if (fd_ >= 0 && !write_pending(fd_, out_)) broken_ = true;
}

std::optional<ControlFrame> TcpControlPipe::poll() {
  if (fd_ < 0) return std::nullopt;
  flush();
  std::vector<std::uint8_t> in;
  if (!read_available(fd_, in)) broken_ = true;
  parser_.feed(in);
  try {
    return parser_.next();
  } catch (const Error&) {
    broken_ = true;
    return std::nullopt;
  }
}

void TcpControlPipe::close() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
  broken_ = true;
}

// --- NDJSON line server ---

LineServer::LineServer(const Endpoint& listen) : listen_fd_(listen_tcp(listen)) {}

LineServer::~LineServer() {
  for (auto& [fd, _] : clients_) ::close(fd);
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

std::uint16_t LineServer::port() const { return bound_port(listen_fd_); }

std::vector<std::string> LineServer::poll() {
  while (true) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) break;
    set_nonblocking(fd);
    clients_.emplace(fd, Client{});
  }
  std::vector<std::string> lines;
  std::vector<int> dead;
  for (auto& [fd, c] : clients_) {
    std::vector<std::uint8_t> in;
    bool ok = read_available(fd, in);
    c.in.append(in.begin(), in.end());
    std::size_t nl;
    while ((nl = c.in.find('\n')) != std::string::npos) {
      lines.push_back(c.in.substr(0, nl));
      c.in.erase(0, nl + 1);
    }
    if (ok && !c.out.empty()) {
      std::vector<std::uint8_t> out(c.out.begin(), c.out.end());
      ok = write_pending(fd, out);
      c.out.assign(out.begin(), out.end());
    }
    if (!ok) dead.push_back(fd);
  }
  for (int fd : dead) {
    ::close(fd);
    clients_.erase(fd);
  }
  return lines;
}

void LineServer::broadcast(const std::string& line) {
  for (auto& [_, c] : clients_) {
    c.out += line;
    c.out += '\n';
  }
}

}  // namespace tod::net
