#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <string>

#include "geosearch/protocol.hpp"

namespace geosearch {

struct ServerConfig {
  std::string host = "0.0.0.0";
  std::uint16_t port = 7890;  // 0 picks an ephemeral port
  std::chrono::milliseconds io_timeout{10'000};
  std::size_t max_request_bytes = 4u << 20;
};

/// Newline-delimited JSON over TCP, one request and one response per
/// connection. Connections are served one at a time.
class Server {
 public:
  /// Binds and listens; throws TransportError on failure.
  Server(ServerConfig config, RequestHandler& handler);
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// The bound port, useful when configured with 0.
  std::uint16_t port() const noexcept { return port_; }

  /// Accepts connections until stop() is called.
  void run();
  /// Async-signal-safe.
  void stop() noexcept { stopping_.store(true); }

  /// Requests answered so far, counted before the reply is sent.
  std::uint64_t served() const noexcept { return served_.load(); }

 private:
  void serve_connection(int fd);

  ServerConfig config_;
  RequestHandler& handler_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::atomic<std::uint64_t> served_{0};
};

inline constexpr std::chrono::milliseconds kDefaultClientTimeout{10'000};

/// Sends one request, reads one response. Throws TransportError on
/// connection or I/O failure and ProtocolError on a malformed response.
QueryResponse client_query(const std::string& host, std::uint16_t port, const QueryRequest& request,
                           std::chrono::milliseconds timeout = kDefaultClientTimeout);

/// Raw variant: sends `line` verbatim and returns the response line.
std::string client_exchange(const std::string& host, std::uint16_t port, const std::string& line,
                            std::chrono::milliseconds timeout = kDefaultClientTimeout);

}  // namespace geosearch
