#pragma once

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "crsf/protocol.hpp"
#include "crsf/service.hpp"

namespace crsf {

namespace net_detail {

inline void set_nonblocking(int fd) {
  const int flags = ::fcntl(fd, F_GETFL, 0);
  ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
}

inline sockaddr_in resolve(const std::string& host, std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  const std::string h = host == "localhost" ? "127.0.0.1" : host;
  if (::inet_pton(AF_INET, h.c_str(), &addr.sin_addr) != 1) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    addrinfo* res = nullptr;
    if (::getaddrinfo(h.c_str(), nullptr, &hints, &res) != 0 || !res)
      throw Error(ErrorCode::io, "cannot resolve host '" + host + "'");
    addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
    ::freeaddrinfo(res);
  }
  return addr;
}

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(Fd&& o) noexcept : fd_(o.release()) {}
  Fd& operator=(Fd&& o) noexcept {
    if (this != &o) {
      reset();
      fd_ = o.release();
    }
    return *this;
  }
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  ~Fd() { reset(); }

  int get() const noexcept { return fd_; }
  int release() noexcept {
    const int fd = fd_;
    fd_ = -1;
    return fd;
  }
  void reset() noexcept {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

}  // namespace net_detail

/// Single-threaded poll loop serving one CrsfService over TCP. In timer mode
/// the loop also closes slots every `slot_period`.
class TcpServer {
 public:
  TcpServer(CrsfService& service, std::ostream& log) : service_(service), log_(log) {}

  /// Binds and listens; throws Error(io) when the address is unavailable.
  void bind(const std::string& host, std::uint16_t port) {
    net_detail::Fd fd(::socket(AF_INET, SOCK_STREAM, 0));
    if (fd.get() < 0) throw Error(ErrorCode::io, std::string("socket: ") + std::strerror(errno));
    const int one = 1;
    ::setsockopt(fd.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr = net_detail::resolve(host, port);
    if (::bind(fd.get(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
      throw Error(ErrorCode::io, "cannot bind " + host + ":" + std::to_string(port) + ": " + std::strerror(errno));
    if (::listen(fd.get(), 64) != 0) throw Error(ErrorCode::io, std::string("listen: ") + std::strerror(errno));
    socklen_t len = sizeof addr;
    ::getsockname(fd.get(), reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    net_detail::set_nonblocking(fd.get());
    listener_ = std::move(fd);
  }

  std::uint16_t port() const noexcept { return port_; }

  /// Runs until `stop` becomes true.
  void run(const std::atomic<bool>& stop) {
    using clock = std::chrono::steady_clock;
    const bool timed = !service_.config().tick_mode;
    auto next_slot = clock::now() + service_.config().slot_period;
    std::vector<pollfd> fds;
    std::vector<ConnectionId> ids;
    while (!stop.load()) {
      fds.clear();
      ids.clear();
      fds.push_back({listener_.get(), POLLIN, 0});
      ids.push_back(0);
      for (auto& [id, c] : conns_) {
        short events = POLLIN;
        if (!c.outbox.empty()) events |= POLLOUT;
        fds.push_back({c.fd.get(), events, 0});
        ids.push_back(id);
      }
      int timeout_ms = 50;
      if (timed) {
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(next_slot - clock::now()).count();
        timeout_ms = static_cast<int>(std::clamp<long long>(left, 0, 50));
      }
      const int ready = ::poll(fds.data(), fds.size(), timeout_ms);
      if (ready < 0 && errno != EINTR) throw Error(ErrorCode::io, std::string("poll: ") + std::strerror(errno));
      if (ready > 0) {
        if (fds[0].revents & POLLIN) accept_all();
        for (std::size_t i = 1; i < fds.size(); ++i) {
          auto it = conns_.find(ids[i]);
          if (it == conns_.end()) continue;
          if (fds[i].revents & (POLLIN | POLLHUP | POLLERR)) read_from(it->first);
          it = conns_.find(ids[i]);
          if (it != conns_.end() && (fds[i].revents & POLLOUT)) flush(it->first);
        }
      }
      if (timed && clock::now() >= next_slot) {
        dispatch(service_.run_slot());
        log_slot(service_.last_report());
        next_slot += service_.config().slot_period;
        if (next_slot < clock::now()) next_slot = clock::now() + service_.config().slot_period;
      }
      close_finished();
    }
  }

 private:
  struct Connection {
    net_detail::Fd fd;
    FrameReader reader;
    std::string outbox;
    bool closing = false;  // close once the outbox drains
  };

  void accept_all() {
    for (;;) {
      const int fd = ::accept(listener_.get(), nullptr, nullptr);
      if (fd < 0) return;
      net_detail::set_nonblocking(fd);
      const int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      conns_[next_id_++].fd = net_detail::Fd(fd);
    }
  }

  void read_from(ConnectionId id) {
    char buf[65536];
    for (;;) {
      auto it = conns_.find(id);
      if (it == conns_.end()) return;
      const ssize_t n = ::recv(it->second.fd.get(), buf, sizeof buf, 0);
      if (n == 0) {
        drop(id);
        return;
      }
      if (n < 0) {
        if (errno == EAGAIN || errno == EWOULDBLOCK) return;
        if (errno == EINTR) continue;
        drop(id);
        return;
      }
      it->second.reader.feed(std::string_view(buf, static_cast<std::size_t>(n)));
      process(id);
    }
  }

  void process(ConnectionId id) {
    for (;;) {
      auto it = conns_.find(id);
      if (it == conns_.end() || it->second.closing) return;
      std::optional<std::string> body;
      try {
        body = it->second.reader.next();
      } catch (const Error& e) {
        // The length prefix is unusable, so the stream cannot be resynchronized.
        enqueue(id, make_error(service_.slot(), e.code(), e.what()));
        it->second.closing = true;
        return;
      }
      if (!body) return;
      std::vector<Outgoing> out;
      bool tick = false;
      try {
        const ProtocolMessage msg = decode_body(*body);
        tick = msg.type() == MessageType::TICK;
        out = service_.handle(msg, id);
      } catch (const Error& e) {
        out.push_back({id, make_error(service_.slot(), e.code(), e.what())});
      }
      dispatch(out);
      if (tick && service_.config().tick_mode && !out.empty() && out.back().message.type() == MessageType::ACK)
        log_slot(service_.last_report());
    }
  }

  void dispatch(const std::vector<Outgoing>& out) {
    for (const auto& o : out) enqueue(o.to, o.message);
  }

  void enqueue(ConnectionId id, const ProtocolMessage& msg) {
    auto it = conns_.find(id);
    if (it == conns_.end()) return;
    it->second.outbox += encode_frame(msg);
    flush(id);
  }

  void flush(ConnectionId id) {
    auto it = conns_.find(id);
    if (it == conns_.end()) return;
    auto& c = it->second;
    while (!c.outbox.empty()) {
      const ssize_t n = ::send(c.fd.get(), c.outbox.data(), c.outbox.size(), MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        if (errno == EAGAIN || errno == EWOULDBLOCK) return;
        c.outbox.clear();
        c.closing = true;
        return;
      }
      c.outbox.erase(0, static_cast<std::size_t>(n));
    }
  }

  void close_finished() {
    for (auto it = conns_.begin(); it != conns_.end();) {
      if (it->second.closing && it->second.outbox.empty()) {
        service_.disconnect(it->first);
        it = conns_.erase(it);
      } else {
        ++it;
      }
    }
  }

  void drop(ConnectionId id) {
    service_.disconnect(id);
    conns_.erase(id);
  }

  void log_slot(const SlotReport& r) {
    log_ << "slot=" << r.slot << " batch=" << r.batch_size() << " objective=" << r.objective()
         << " optimal=" << (r.optimal() ? "true" : "false") << std::endl;
  }

  CrsfService& service_;
  std::ostream& log_;
  net_detail::Fd listener_;
  std::uint16_t port_ = 0;
  std::map<ConnectionId, Connection> conns_;
  ConnectionId next_id_ = 1;
};

/// Blocking client for scripts and tests.
class TcpClient {
 public:
  void connect(const std::string& host, std::uint16_t port) {
    net_detail::Fd fd(::socket(AF_INET, SOCK_STREAM, 0));
    if (fd.get() < 0) throw Error(ErrorCode::io, std::string("socket: ") + std::strerror(errno));
    sockaddr_in addr = net_detail::resolve(host, port);
    if (::connect(fd.get(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
      throw Error(ErrorCode::io, "cannot connect to " + host + ":" + std::to_string(port) + ": " + std::strerror(errno));
    const int one = 1;
    ::setsockopt(fd.get(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    fd_ = std::move(fd);
  }

  void send_raw(std::string_view bytes) {
    while (!bytes.empty()) {
      const ssize_t n = ::send(fd_.get(), bytes.data(), bytes.size(), MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw Error(ErrorCode::io, std::string("send: ") + std::strerror(errno));
      }
      bytes.remove_prefix(static_cast<std::size_t>(n));
    }
  }

  void send(const ProtocolMessage& msg) { send_raw(encode_frame(msg)); }

  /// Next message, or nullopt on timeout. Throws Error(io) when the server
  /// closes the connection.
  std::optional<ProtocolMessage> receive(std::chrono::milliseconds timeout) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
      if (auto body = reader_.next()) return decode_body(*body);
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) return std::nullopt;
      pollfd p{fd_.get(), POLLIN, 0};
      const int ready = ::poll(&p, 1, static_cast<int>(left.count()));
      if (ready < 0 && errno != EINTR) throw Error(ErrorCode::io, std::string("poll: ") + std::strerror(errno));
      if (ready <= 0) continue;
      char buf[65536];
      const ssize_t n = ::recv(fd_.get(), buf, sizeof buf, 0);
      if (n == 0) throw Error(ErrorCode::io, "connection closed by server");
      if (n < 0) {
        if (errno == EINTR || errno == EAGAIN) continue;
        throw Error(ErrorCode::io, std::string("recv: ") + std::strerror(errno));
      }
      reader_.feed(std::string_view(buf, static_cast<std::size_t>(n)));
    }
  }

  /// Receives until `done` accepts a message or the timeout expires.
  std::vector<ProtocolMessage> receive_until(const std::function<bool(const ProtocolMessage&)>& done,
                                             std::chrono::milliseconds timeout) {
    std::vector<ProtocolMessage> out;
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      auto msg = receive(std::max(left, std::chrono::milliseconds(0)));
      if (!msg) return out;
      out.push_back(*msg);
      if (done(out.back())) return out;
    }
  }

  void close() { fd_.reset(); }

 private:
  net_detail::Fd fd_;
  FrameReader reader_;
};

}  // namespace crsf
