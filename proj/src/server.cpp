#include "geosearch/server.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <iostream>
#include <memory>

#include "geosearch/errors.hpp"

namespace geosearch {

namespace {

class Socket {
 public:
  explicit Socket(int fd = -1) : fd_(fd) {}
  ~Socket() {
    if (fd_ >= 0) ::close(fd_);
  }
  Socket(Socket&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Socket& operator=(Socket&& o) noexcept {
    if (this != &o) {
      if (fd_ >= 0) ::close(fd_);
      fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
  }
  int get() const { return fd_; }
  int release() { return std::exchange(fd_, -1); }

 private:
  int fd_;
};

std::string errno_text(const std::string& what) { return what + ": " + std::strerror(errno); }

void set_timeouts(int fd, std::chrono::milliseconds timeout) {
  timeval tv{};
  tv.tv_sec = static_cast<time_t>(timeout.count() / 1000);
  tv.tv_usec = static_cast<suseconds_t>((timeout.count() % 1000) * 1000);
  ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
  ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
}

bool send_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const auto n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

enum class ReadStatus { line, eof, too_large, failed };

// Reads up to and including the first '\n', or to EOF.
ReadStatus read_line(int fd, std::string& out, std::size_t limit) {
  char buf[4096];
  while (true) {
    const auto n = ::recv(fd, buf, sizeof buf, 0);
    if (n < 0) {
      if (errno == EINTR) continue;
      return ReadStatus::failed;
    }
    if (n == 0) return ReadStatus::eof;
    const std::string_view chunk(buf, static_cast<std::size_t>(n));
    const auto nl = chunk.find('\n');
    out.append(chunk.substr(0, nl == std::string_view::npos ? chunk.size() : nl + 1));
    if (nl != std::string_view::npos) return ReadStatus::line;
    if (out.size() > limit) return ReadStatus::too_large;
  }
}

// Discards unread input for a short while so that closing does not reset
// the connection before the peer has read our reply.
void drain(int fd) {
  ::shutdown(fd, SHUT_WR);
  set_timeouts(fd, std::chrono::milliseconds(200));
  char buf[4096];
  for (int i = 0; i < 1024; ++i) {
    const auto n = ::recv(fd, buf, sizeof buf, 0);
    if (n <= 0) return;
  }
}

}  // namespace

Server::Server(ServerConfig config, RequestHandler& handler) : config_(std::move(config)), handler_(handler) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE | AI_NUMERICSERV;
  addrinfo* res = nullptr;
  const auto service = std::to_string(config_.port);
  if (int rc = ::getaddrinfo(config_.host.c_str(), service.c_str(), &hints, &res); rc != 0) {
    throw TransportError("cannot resolve " + config_.host + ": " + ::gai_strerror(rc));
  }
  std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(res, ::freeaddrinfo);

  std::string last_error = "no addresses";
  for (auto* ai = res; ai != nullptr; ai = ai->ai_next) {
    Socket s(::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol));
    if (s.get() < 0) {
      last_error = errno_text("socket");
      continue;
    }
    int one = 1;
    ::setsockopt(s.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(s.get(), ai->ai_addr, ai->ai_addrlen) != 0) {
      last_error = errno_text("bind " + config_.host + ":" + service);
      continue;
    }
    if (::listen(s.get(), 64) != 0) {
      last_error = errno_text("listen");
      continue;
    }
    sockaddr_storage bound{};
    socklen_t len = sizeof bound;
    ::getsockname(s.get(), reinterpret_cast<sockaddr*>(&bound), &len);
    port_ = bound.ss_family == AF_INET6 ? ntohs(reinterpret_cast<sockaddr_in6*>(&bound)->sin6_port)
                                        : ntohs(reinterpret_cast<sockaddr_in*>(&bound)->sin_port);
    listen_fd_ = s.release();
    return;
  }
  throw TransportError(last_error);
}

Server::~Server() {
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

void Server::run() {
  while (!stopping_.load()) {
    pollfd pfd{listen_fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, 200);
    if (ready <= 0) continue;  // timeout or EINTR; re-check the stop flag
    Socket conn(::accept4(listen_fd_, nullptr, nullptr, SOCK_CLOEXEC));
    if (conn.get() < 0) continue;
    serve_connection(conn.get());
  }
}

void Server::serve_connection(int fd) {
  set_timeouts(fd, config_.io_timeout);
  std::string line;
  const auto status = read_line(fd, line, config_.max_request_bytes);
  std::string reply;
  if (status == ReadStatus::too_large) {
    reply = encode_response(ErrorReply{"request exceeds " + std::to_string(config_.max_request_bytes) + " bytes"});
  } else if (status == ReadStatus::failed && line.empty()) {
    return;
  } else if (line.empty() || line == "\n") {
    if (status == ReadStatus::eof) return;
    reply = encode_response(ErrorReply{"empty request"});
  } else {
    reply = handler_.handle_line(line);
  }
  ++served_;
  if (!send_all(fd, reply)) std::cerr << "geoserver: failed to send response: " << std::strerror(errno) << '\n';
  if (status == ReadStatus::too_large) drain(fd);
}

std::string client_exchange(const std::string& host, std::uint16_t port, const std::string& line,
                            std::chrono::milliseconds timeout) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_NUMERICSERV;
  addrinfo* res = nullptr;
  const auto service = std::to_string(port);
  if (int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0) {
    throw TransportError("cannot resolve " + host + ": " + ::gai_strerror(rc));
  }
  std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(res, ::freeaddrinfo);

  std::string last_error = "no addresses for " + host;
  for (auto* ai = res; ai != nullptr; ai = ai->ai_next) {
    Socket s(::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC | SOCK_NONBLOCK, ai->ai_protocol));
    if (s.get() < 0) {
      last_error = errno_text("socket");
      continue;
    }
    if (::connect(s.get(), ai->ai_addr, ai->ai_addrlen) != 0) {
      if (errno != EINPROGRESS) {
        last_error = errno_text("connect " + host + ":" + service);
        continue;
      }
      pollfd pfd{s.get(), POLLOUT, 0};
      const int ready = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
      int err = 0;
      socklen_t len = sizeof err;
      ::getsockopt(s.get(), SOL_SOCKET, SO_ERROR, &err, &len);
      if (ready <= 0 || err != 0) {
        last_error = "connect " + host + ":" + service + ": " + (ready <= 0 ? "timed out" : std::strerror(err));
        continue;
      }
    }
    ::fcntl(s.get(), F_SETFL, ::fcntl(s.get(), F_GETFL) & ~O_NONBLOCK);
    set_timeouts(s.get(), timeout);

    std::string payload = line;
    if (payload.empty() || payload.back() != '\n') payload += '\n';
    if (!send_all(s.get(), payload)) throw TransportError(errno_text("send"));
    std::string reply;
    const auto status = read_line(s.get(), reply, std::string::npos / 2);
    if (status == ReadStatus::failed) {
      throw TransportError(errno == EAGAIN || errno == EWOULDBLOCK ? std::string("timed out waiting for response")
                                                                   : errno_text("recv"));
    }
    if (reply.empty()) throw TransportError("connection closed without a response");
    return reply;
  }
  throw TransportError(last_error);
}

QueryResponse client_query(const std::string& host, std::uint16_t port, const QueryRequest& request,
                           std::chrono::milliseconds timeout) {
  return decode_response(client_exchange(host, port, encode_request(request), timeout));
}

}  // namespace geosearch
