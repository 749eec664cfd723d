#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "cspmon/gateway/session.hpp"

namespace cspmon::gateway {

struct Endpoint {
  enum class Scheme { Tcp, WebSocket };
  Scheme scheme = Scheme::Tcp;
  std::string host;
  std::uint16_t port = 0;
  std::string path = "/";  // WebSocket only

  std::string to_string() const;
};

/// `tcp://host:port` or `ws://host:port/path`. Errors: Format.
Endpoint parse_endpoint(std::string_view text);

/// A frame produced for one connection, in the order it was sent.
struct ConnectionFrame {
  std::uint64_t connection = 0;
  nlohmann::json frame;
};

struct ListenOptions {
  OnReject on_reject = OnReject::Halt;
  std::size_t queue_capacity = 1024;
  oracle::MonitorOptions monitor;
  std::function<void(const ConnectionFrame&)> on_frame;  // every frame, serialized
  std::function<void(const std::string&)> on_log;       // connection lifecycle and errors
};

/// Accepts connections on one endpoint. Each connection gets its own
/// monitor session; a reader thread hands messages to a checker thread
/// through a BoundedQueue, and the checker writes one response frame per
/// judged event.
class Listener {
 public:
  Listener(std::shared_ptr<const ResolvedSpec> spec, std::string root, std::shared_ptr<const MappingTable> table,
           ListenOptions options = {});
  ~Listener();
  Listener(const Listener&) = delete;
  Listener& operator=(const Listener&) = delete;

  /// Binds and starts accepting in a background thread. Port 0 picks a free
  /// port. Errors: Network.
  void start(const Endpoint& endpoint);

  /// The bound endpoint, with the actual port.
  const Endpoint& endpoint() const;

  /// Blocks until stop() is called or the listener fails.
  void wait();

  /// Closes the acceptor and every connection, then joins all threads.
  void stop();

  std::uint64_t connections_accepted() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Sends each message on a fresh connection, then the end marker, and
/// collects the response frames up to and excluding the closing `done`
/// frame. Errors: Network.
std::vector<nlohmann::json> replay(const Endpoint& endpoint, const std::vector<std::string>& messages,
                                   std::size_t chunk = 0);

}  // namespace cspmon::gateway
