#include "cspmon/gateway/listener.hpp"

#include <atomic>
#include <charconv>
#include <condition_variable>
#include <deque>
#include <list>
#include <mutex>
#include <optional>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "cspmon/error.hpp"
#include "cspmon/gateway/queue.hpp"

namespace cspmon::gateway {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using nlohmann::json;

std::string Endpoint::to_string() const {
  std::string s = (scheme == Scheme::Tcp ? "tcp://" : "ws://") + host + ":" + std::to_string(port);
  if (scheme == Scheme::WebSocket) s += path;
  return s;
}

Endpoint parse_endpoint(std::string_view text) {
  Endpoint ep;
  std::string_view rest;
  if (text.starts_with("tcp://")) {
    rest = text.substr(6);
  } else if (text.starts_with("ws://")) {
    ep.scheme = Endpoint::Scheme::WebSocket;
    rest = text.substr(5);
  } else {
    throw Error(ErrorKind::Format, "endpoint must start with tcp:// or ws://: '" + std::string(text) + "'");
  }
  auto slash = rest.find('/');
  std::string_view hostport = rest.substr(0, slash);
  if (slash != std::string_view::npos) {
    if (ep.scheme == Endpoint::Scheme::Tcp && rest.substr(slash) != "/") {
      throw Error(ErrorKind::Format, "tcp endpoints take no path: '" + std::string(text) + "'");
    }
    ep.path = std::string(rest.substr(slash));
  }
  auto colon = hostport.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw Error(ErrorKind::Format, "endpoint needs host:port: '" + std::string(text) + "'");
  }
  ep.host = std::string(hostport.substr(0, colon));
  auto port = hostport.substr(colon + 1);
  unsigned value = 0;
  auto [p, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
  if (ec != std::errc() || p != port.data() + port.size() || value > 65535) {
    throw Error(ErrorKind::Format, "bad port in endpoint '" + std::string(text) + "'");
  }
  ep.port = static_cast<std::uint16_t>(value);
  return ep;
}

namespace {

constexpr std::chrono::seconds kLinger{5};

/// One accepted connection: an io thread for the socket and a checker
/// thread for the session.
class Connection : public std::enable_shared_from_this<Connection> {
 public:
  using Emit = std::function<void(const ConnectionFrame&)>;
  using Log = std::function<void(const std::string&)>;

  Connection(std::uint64_t id, Endpoint ep, std::unique_ptr<GatewaySession> session, std::size_t capacity,
             Emit emit, Log log)
      : id_(id),
        ep_(std::move(ep)),
        session_(std::move(session)),
        inbox_(capacity),
        emit_(std::move(emit)),
        log_(std::move(log)) {}

  asio::io_context& context() { return ioc_; }

  void start(tcp::socket socket) {
    socket_.emplace(std::move(socket));
    beast::error_code ignored;
    socket_->set_option(tcp::no_delay(true), ignored);
    // Keeps the io thread alive while the checker may still send.
    work_.emplace(ioc_.get_executor());
    auto self = shared_from_this();
    if (ep_.scheme == Endpoint::Scheme::Tcp) {
      read_line();
    } else {
      read_upgrade();
    }
    io_thread_ = std::thread([self] {
      self->ioc_.run();
      self->io_done_ = true;
    });
    checker_thread_ = std::thread([self] {
      self->check();
      self->checker_done_ = true;
    });
  }

  bool finished() const { return io_done_ && checker_done_; }

  /// Stops reading and closes the socket without waiting for the client.
  void abort() {
    inbox_.close();
    asio::post(ioc_, [self = shared_from_this()] { self->force_close(); });
  }

  void join() {
    if (checker_thread_.joinable()) checker_thread_.join();
    if (io_thread_.joinable()) io_thread_.join();
  }

 private:
  // -- io thread -------------------------------------------------------------

  void deliver(std::string message) {
    if (message.empty()) return;
    // Blocks when the checker lags behind: back-pressure on the socket. Once
    // the checker has stopped the input is drained and discarded.
    inbox_.push(std::move(message));
  }

  void read_line() {
    auto self = shared_from_this();
    asio::async_read_until(*socket_, buf_, '\n', [self](beast::error_code ec, std::size_t n) {
      if (ec) {
        if (self->buf_.size() > 0) {
          std::string tail(asio::buffers_begin(self->buf_.data()), asio::buffers_end(self->buf_.data()));
          self->buf_.consume(self->buf_.size());
          if (tail.find_first_not_of(" \t\r\n") != std::string::npos) self->deliver(std::move(tail));
        }
        self->end_of_input(ec);
        return;
      }
      std::string line(asio::buffers_begin(self->buf_.data()),
                       asio::buffers_begin(self->buf_.data()) + static_cast<std::ptrdiff_t>(n));
      self->buf_.consume(n);
      while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.pop_back();
      if (line.find_first_not_of(" \t") != std::string::npos) self->deliver(std::move(line));
      self->read_line();
    });
  }

  void read_upgrade() {
    auto self = shared_from_this();
    http::async_read(*socket_, wsbuf_, request_, [self](beast::error_code ec, std::size_t) {
      if (ec) return self->end_of_input(ec);
      if (!websocket::is_upgrade(self->request_) || self->request_.target() != self->ep_.path) {
        self->reject_upgrade();
        return;
      }
      self->ws_.emplace(std::move(*self->socket_));
      self->socket_.reset();
      self->ws_->async_accept(self->request_, [self](beast::error_code ec2) {
        if (ec2) return self->end_of_input(ec2);
        self->read_frame();
      });
    });
  }

  void reject_upgrade() {
    auto res = std::make_shared<http::response<http::string_body>>(http::status::not_found, request_.version());
    res->set(http::field::content_type, "text/plain");
    res->body() = "no websocket endpoint at " + std::string(request_.target()) + "\n";
    res->prepare_payload();
    auto self = shared_from_this();
    http::async_write(*socket_, *res, [self, res](beast::error_code, std::size_t) {
      beast::error_code ignored;
      self->socket_->shutdown(tcp::socket::shutdown_both, ignored);
      self->end_of_input({});
    });
  }

  void read_frame() {
    auto self = shared_from_this();
    ws_->async_read(wsbuf_, [self](beast::error_code ec, std::size_t) {
      if (ec) return self->end_of_input(ec);
      std::string message = beast::buffers_to_string(self->wsbuf_.data());
      self->wsbuf_.consume(self->wsbuf_.size());
      self->deliver(std::move(message));
      self->read_frame();
    });
  }

  void end_of_input(beast::error_code ec) {
    if (ec && ec != asio::error::eof && ec != websocket::error::closed && ec != asio::error::operation_aborted &&
        ec != http::error::end_of_stream) {
      log_("connection " + std::to_string(id_) + ": " + ec.message());
    }
    input_ended_ = true;
    inbox_.close();
    if (closed_) finish_close();
  }

  void send(std::string text) {
    asio::post(ioc_, [self = shared_from_this(), text = std::move(text)]() mutable {
      if (self->closed_) return;
      self->outbox_.push_back(std::move(text));
      if (!self->writing_) self->write_next();
    });
  }

  void write_next() {
    writing_ = true;
    auto self = shared_from_this();
    auto done = [self](beast::error_code ec, std::size_t) {
      self->outbox_.pop_front();
      if (ec) {
        self->log_("connection " + std::to_string(self->id_) + ": write failed: " + ec.message());
        self->outbox_.clear();
        self->writing_ = false;
        self->force_close();
        return;
      }
      if (!self->outbox_.empty()) return self->write_next();
      self->writing_ = false;
      if (self->close_requested_) self->graceful_close();
    };
    if (ws_) {
      ws_->text(true);
      ws_->async_write(asio::buffer(outbox_.front()), done);
    } else {
      outbox_.front().push_back('\n');
      asio::async_write(*socket_, asio::buffer(outbox_.front()), done);
    }
  }

  void request_close() {
    asio::post(ioc_, [self = shared_from_this()] {
      self->work_.reset();
      self->close_requested_ = true;
      if (!self->writing_) self->graceful_close();
    });
  }

  void graceful_close() {
    if (closed_) return;
    closed_ = true;
    if (ws_) {
      if (ws_->is_open()) {
        ws_->async_close(websocket::close_code::normal, [self = shared_from_this()](beast::error_code) {
          beast::error_code ignored;
          self->ws_->next_layer().close(ignored);
        });
      }
      return;
    }
    // Half-close and keep reading until the client's EOF, so unread input
    // does not turn into a reset that discards our last frames.
    if (input_ended_ || !socket_) return finish_close();
    beast::error_code ignored;
    socket_->shutdown(tcp::socket::shutdown_send, ignored);
    linger_.expires_after(kLinger);
    linger_.async_wait([self = shared_from_this()](beast::error_code ec) {
      if (!ec) self->finish_close();
    });
  }

  void finish_close() {
    linger_.cancel();
    beast::error_code ignored;
    if (socket_) socket_->close(ignored);
  }

  void force_close() {
    work_.reset();
    closed_ = true;
    linger_.cancel();
    beast::error_code ignored;
    if (ws_) ws_->next_layer().close(ignored);
    if (socket_) socket_->close(ignored);
  }

  // -- checker thread ----------------------------------------------------------

  void check() {
    try {
      while (auto message = inbox_.pop()) {
        Reply r = session_->handle(*message);
        if (r.frame) {
          emit_({id_, *r.frame});
          send(r.frame->dump());
        }
        if (r.halt) break;
      }
    } catch (const std::exception& e) {
      json f = error_frame(e.what());
      emit_({id_, f});
      send(f.dump());
    }
    inbox_.close();
    request_close();
  }

  std::uint64_t id_;
  Endpoint ep_;
  std::unique_ptr<GatewaySession> session_;
  BoundedQueue<std::string> inbox_;
  Emit emit_;
  Log log_;

  asio::io_context ioc_;
  std::optional<asio::executor_work_guard<asio::io_context::executor_type>> work_;
  std::optional<tcp::socket> socket_;
  std::optional<websocket::stream<tcp::socket>> ws_;
  asio::streambuf buf_;
  beast::flat_buffer wsbuf_;
  http::request<http::string_body> request_;
  std::deque<std::string> outbox_;
  bool writing_ = false;
  bool close_requested_ = false;
  bool closed_ = false;
  bool input_ended_ = false;
  asio::steady_timer linger_{ioc_};

  std::thread io_thread_;
  std::thread checker_thread_;
  std::atomic<bool> io_done_{false};
  std::atomic<bool> checker_done_{false};
};

}  // namespace

struct Listener::Impl {
  std::shared_ptr<const ResolvedSpec> spec;
  std::string root;
  std::shared_ptr<const MappingTable> table;
  ListenOptions options;

  asio::io_context ioc;
  std::optional<tcp::acceptor> acceptor;
  std::thread thread;
  Endpoint endpoint;

  std::mutex mu;  // connections, frames, log
  std::list<std::shared_ptr<Connection>> connections;
  std::atomic<std::uint64_t> accepted{0};

  std::mutex state_mu;
  std::condition_variable stopped_cv;
  bool stopped = false;

  void emit(const ConnectionFrame& f) {
    std::lock_guard lock(mu);
    if (options.on_frame) options.on_frame(f);
  }

  void log(const std::string& line) {
    std::lock_guard lock(mu);
    if (options.on_log) options.on_log(line);
  }

  void reap() {
    std::list<std::shared_ptr<Connection>> done;
    {
      std::lock_guard lock(mu);
      for (auto it = connections.begin(); it != connections.end();) {
        if ((*it)->finished()) {
          done.push_back(*it);
          it = connections.erase(it);
        } else {
          ++it;
        }
      }
    }
    for (auto& c : done) c->join();
  }

  void accept_next() {
    std::uint64_t id = accepted + 1;
    std::shared_ptr<Connection> conn;
    try {
      auto session = std::make_unique<GatewaySession>(spec, root, table, options.on_reject, options.monitor);
      conn = std::make_shared<Connection>(
          id, endpoint, std::move(session), options.queue_capacity, [this](const ConnectionFrame& f) { emit(f); },
          [this](const std::string& s) { log(s); });
    } catch (const std::exception& e) {
      log(std::string("cannot open a session: ") + e.what());
      return;
    }
    acceptor->async_accept(conn->context(), [this, conn, id](beast::error_code ec, tcp::socket socket) {
      if (ec) {
        if (ec != asio::error::operation_aborted) log("accept failed: " + ec.message());
        return;
      }
      ++accepted;
      reap();
      {
        std::lock_guard lock(mu);
        connections.push_back(conn);
      }
      if (options.on_log) {
        beast::error_code ignored;
        auto peer = socket.remote_endpoint(ignored);
        log("connection " + std::to_string(id) + " from " + peer.address().to_string() + ":" +
            std::to_string(peer.port()));
      }
      conn->start(std::move(socket));
      accept_next();
    });
  }

};

Listener::Listener(std::shared_ptr<const ResolvedSpec> spec, std::string root,
                   std::shared_ptr<const MappingTable> table, ListenOptions options)
    : impl_(std::make_unique<Impl>()) {
  impl_->spec = std::move(spec);
  impl_->root = std::move(root);
  impl_->table = std::move(table);
  impl_->options = std::move(options);
}

Listener::~Listener() { stop(); }

void Listener::start(const Endpoint& endpoint) {
  if (impl_->thread.joinable()) throw Error(ErrorKind::Network, "listener already started");
  // Fails early on a bad root rather than on the first connection.
  GatewaySession probe(impl_->spec, impl_->root, impl_->table, impl_->options.on_reject, impl_->options.monitor);
  try {
    tcp::resolver resolver(impl_->ioc);
    auto results = resolver.resolve(endpoint.host, std::to_string(endpoint.port));
    if (results.empty()) throw Error(ErrorKind::Network, "cannot resolve '" + endpoint.host + "'");
    tcp::endpoint where = *results.begin();
    impl_->acceptor.emplace(impl_->ioc);
    impl_->acceptor->open(where.protocol());
    impl_->acceptor->set_option(asio::socket_base::reuse_address(true));
    impl_->acceptor->bind(where);
    impl_->acceptor->listen();
    impl_->endpoint = endpoint;
    impl_->endpoint.port = impl_->acceptor->local_endpoint().port();
  } catch (const boost::system::system_error& e) {
    throw Error(ErrorKind::Network, "cannot listen on " + endpoint.to_string() + ": " + e.code().message());
  }
  impl_->accept_next();
  impl_->thread = std::thread([this] {
    impl_->ioc.run();
    std::lock_guard lock(impl_->state_mu);
    impl_->stopped = true;
    impl_->stopped_cv.notify_all();
  });
}

const Endpoint& Listener::endpoint() const { return impl_->endpoint; }

void Listener::wait() {
  std::unique_lock lock(impl_->state_mu);
  impl_->stopped_cv.wait(lock, [&] { return impl_->stopped; });
}

void Listener::stop() {
  if (!impl_->thread.joinable()) return;
  asio::post(impl_->ioc, [this] {
    beast::error_code ignored;
    if (impl_->acceptor) impl_->acceptor->close(ignored);
  });
  impl_->thread.join();
  std::list<std::shared_ptr<Connection>> conns;
  {
    std::lock_guard lock(impl_->mu);
    conns.swap(impl_->connections);
  }
  for (auto& c : conns) c->abort();
  for (auto& c : conns) c->join();
}

std::uint64_t Listener::connections_accepted() const { return impl_->accepted; }

std::vector<json> replay(const Endpoint& endpoint, const std::vector<std::string>& messages, std::size_t chunk) {
  std::vector<json> frames;
  asio::io_context ioc;
  auto collect = [&](const std::string& text) {
    json f;
    try {
      f = json::parse(text);
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::Network, std::string("bad response frame: ") + e.what());
    }
    if (f.is_object() && f.contains("done")) return false;
    frames.push_back(std::move(f));
    return true;
  };
  const std::string end_marker = R"({"end":true})";
  try {
    tcp::resolver resolver(ioc);
    auto results = resolver.resolve(endpoint.host, std::to_string(endpoint.port));
    if (endpoint.scheme == Endpoint::Scheme::Tcp) {
      tcp::socket socket(ioc);
      asio::connect(socket, results);
      socket.set_option(tcp::no_delay(true));
      std::string stream;
      for (const auto& m : messages) stream += m + "\n";
      stream += end_marker + "\n";
      std::size_t step = chunk == 0 ? stream.size() : chunk;
      // The server may halt early and stop reading; its frames are still
      // worth collecting.
      beast::error_code wec;
      for (std::size_t at = 0; at < stream.size() && !wec; at += step) {
        asio::write(socket, asio::buffer(stream.data() + at, std::min(step, stream.size() - at)), wec);
      }
      asio::streambuf buf;
      for (;;) {
        beast::error_code ec;
        std::size_t n = asio::read_until(socket, buf, '\n', ec);
        if (ec) break;
        std::string line(asio::buffers_begin(buf.data()), asio::buffers_begin(buf.data()) + static_cast<std::ptrdiff_t>(n));
        buf.consume(n);
        if (!collect(line)) break;
      }
      beast::error_code ignored;
      socket.shutdown(tcp::socket::shutdown_both, ignored);
    } else {
      websocket::stream<tcp::socket> ws(ioc);
      asio::connect(ws.next_layer(), results);
      ws.next_layer().set_option(tcp::no_delay(true));
      ws.handshake(endpoint.host + ":" + std::to_string(endpoint.port), endpoint.path);
      ws.text(true);
      beast::error_code wec;
      for (const auto& m : messages) {
        ws.write(asio::buffer(m), wec);
        if (wec) break;
      }
      if (!wec) ws.write(asio::buffer(end_marker), wec);
      beast::flat_buffer buf;
      for (;;) {
        beast::error_code ec;
        ws.read(buf, ec);
        if (ec) break;
        std::string text = beast::buffers_to_string(buf.data());
        buf.consume(buf.size());
        if (!collect(text)) break;
      }
      beast::error_code ignored;
      if (ws.is_open()) ws.close(websocket::close_code::normal, ignored);
    }
  } catch (const boost::system::system_error& e) {
    throw Error(ErrorKind::Network, "replay to " + endpoint.to_string() + " failed: " + e.code().message());
  }
  return frames;
}

}  // namespace cspmon::gateway
