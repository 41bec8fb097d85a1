#include "cyclic_swarm/server.hpp"

#include <csignal>
#include <deque>
#include <map>
#include <optional>
#include <string_view>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "cyclic_swarm/errors.hpp"

namespace cyclic_swarm {
namespace {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;
using Message = std::shared_ptr<const std::string>;

constexpr std::size_t kMaxLine = 1 << 16;

class Hub;

class Client : public std::enable_shared_from_this<Client> {
 public:
  Client(Hub& hub, std::uint64_t id) : hub_(hub), id_(id) {}
  virtual ~Client() = default;
  virtual void start() = 0;
  virtual void deliver(Message msg) = 0;
  virtual void shutdown() = 0;
  std::uint64_t id() const { return id_; }

 protected:
  void on_text(std::string_view text);
  void on_closed(beast::error_code ec);

  Hub& hub_;
  std::uint64_t id_;
};

class Hub {
 public:
  Hub(Session& session, std::size_t max_backlog) : session_(session), max_backlog_(max_backlog) {}

  std::uint64_t next_id() { return ++last_id_; }
  std::size_t max_backlog() const { return max_backlog_; }

  void join(const std::shared_ptr<Client>& c) {
    clients_[c->id()] = c;
    spdlog::info("client {} connected ({} total)", c->id(), clients_.size());
    c->deliver(make(snapshot_to_json(session_.snapshot())));
  }

  void leave(std::uint64_t id, beast::error_code ec) {
    if (clients_.erase(id))
      spdlog::info("client {} disconnected: {}", id, ec ? ec.message() : std::string("closed"));
  }

  void on_line(std::uint64_t client, std::string_view line) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
    if (line.empty()) return;
    std::optional<SessionReply> reject;
    try {
      reject = session_.submit(parse_command(line), client);
    } catch (const ParseError& e) {
      reject = SessionReply{client, "?", false, session_.state().t, e.what()};
    }
    if (reject) {
      spdlog::debug("client {}: rejected {}: {}", client, reject->cmd, reject->reason);
      send(client, make(reply_to_json(*reject)));
    }
  }

  void tick() {
    std::vector<SessionReply> replies;
    try {
      replies = session_.tick();
    } catch (const std::exception& e) {
      spdlog::error("simulation halted at t={}: {}", session_.state().t, e.what());
      session_.submit(SessionCommand::pause());
      broadcast(make(nlohmann::json{{"v", kProtocolVersion},
                                    {"error", {{"reason", e.what()}, {"t", session_.state().t}}}}));
      replies = session_.drain();
    }
    for (const auto& r : replies)
      if (r.client != 0) send(r.client, make(reply_to_json(r)));
    broadcast(make(snapshot_to_json(session_.snapshot())));
  }

  void close_all() {
    auto clients = std::move(clients_);
    for (auto& [id, weak] : clients)
      if (auto c = weak.lock()) c->shutdown();
  }

 private:
  static Message make(const nlohmann::json& j) { return std::make_shared<const std::string>(j.dump() + "\n"); }

  void send(std::uint64_t id, const Message& m) {
    const auto it = clients_.find(id);
    if (it == clients_.end()) return;
    if (auto c = it->second.lock()) c->deliver(m);
  }

  void broadcast(const Message& m) {
    for (auto it = clients_.begin(); it != clients_.end();) {
      auto c = it->second.lock();
      if (!c) {
        it = clients_.erase(it);
        continue;
      }
      ++it;
      c->deliver(m);
    }
  }

  Session& session_;
  std::size_t max_backlog_;
  std::uint64_t last_id_{0};
  std::map<std::uint64_t, std::weak_ptr<Client>> clients_;
};

void Client::on_text(std::string_view text) {
  std::size_t start = 0;
  while (start < text.size()) {
    const auto end = text.find('\n', start);
    hub_.on_line(id_, text.substr(start, end == std::string_view::npos ? end : end - start));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
}

void Client::on_closed(beast::error_code ec) { hub_.leave(id_, ec); }

// Raw TCP: one JSON document per line in both directions.
class LineClient final : public Client {
 public:
  LineClient(Hub& hub, std::uint64_t id, tcp::socket socket, std::string buffer)
      : Client(hub, id), socket_(std::move(socket)), buffer_(std::move(buffer)) {}

  void start() override {
    hub_.join(shared_from_this());
    consume_lines();
  }

  void deliver(Message msg) override {
    if (closed_) return;
    if (queue_.size() >= hub_.max_backlog()) {
      spdlog::warn("client {} is not keeping up; dropping it", id_);
      shutdown();
      return;
    }
    queue_.push_back(std::move(msg));
    if (queue_.size() == 1) write_next();
  }

  void shutdown() override {
    if (closed_) return;
    closed_ = true;
    beast::error_code ignored;
    socket_.shutdown(tcp::socket::shutdown_both, ignored);
    socket_.close(ignored);
  }

 private:
  void consume_lines() {
    for (;;) {
      const auto nl = buffer_.find('\n');
      if (nl == std::string::npos) break;
      hub_.on_line(id_, std::string_view(buffer_).substr(0, nl));
      buffer_.erase(0, nl + 1);
    }
    if (closed_) return;
    net::async_read_until(socket_, net::dynamic_buffer(buffer_, kMaxLine), '\n',
                          [self = shared_from_this(), this](beast::error_code ec, std::size_t) {
                            if (ec) return fail(ec);
                            consume_lines();
                          });
  }

  void write_next() {
    net::async_write(socket_, net::buffer(*queue_.front()),
                     [self = shared_from_this(), this](beast::error_code ec, std::size_t) {
                       if (ec) return fail(ec);
                       queue_.pop_front();
                       if (!queue_.empty()) write_next();
                     });
  }

  void fail(beast::error_code ec) {
    shutdown();
    queue_.clear();
    on_closed(ec);
  }

  tcp::socket socket_;
  std::string buffer_;
  std::deque<Message> queue_;
  bool closed_{false};
};

// WebSocket on /session: each text frame carries one or more lines.
class WsClient final : public Client {
 public:
  WsClient(Hub& hub, std::uint64_t id, tcp::socket socket) : Client(hub, id), ws_(std::move(socket)) {}

  void accept(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.text(true);
    req_ = std::move(req);
    ws_.async_accept(req_, [self = shared_from_this(), this](beast::error_code ec) {
      if (ec) return fail(ec);
      start();
    });
  }

  void start() override {
    hub_.join(shared_from_this());
    read_next();
  }

  void deliver(Message msg) override {
    if (closed_) return;
    if (queue_.size() >= hub_.max_backlog()) {
      spdlog::warn("client {} is not keeping up; dropping it", id_);
      shutdown();
      return;
    }
    queue_.push_back(std::move(msg));
    if (queue_.size() == 1) write_next();
  }

  void shutdown() override {
    if (closed_) return;
    closed_ = true;
    beast::error_code ignored;
    beast::get_lowest_layer(ws_).shutdown(tcp::socket::shutdown_both, ignored);
    beast::get_lowest_layer(ws_).close(ignored);
  }

 private:
  void read_next() {
    ws_.async_read(buffer_, [self = shared_from_this(), this](beast::error_code ec, std::size_t) {
      if (ec) return fail(ec);
      const auto data = buffer_.cdata();
      on_text(std::string_view(static_cast<const char*>(data.data()), data.size()));
      buffer_.clear();
      if (!closed_) read_next();
    });
  }

  void write_next() {
    ws_.async_write(net::buffer(*queue_.front()),
                    [self = shared_from_this(), this](beast::error_code ec, std::size_t) {
                      if (ec) return fail(ec);
                      queue_.pop_front();
                      if (!queue_.empty()) write_next();
                    });
  }

  void fail(beast::error_code ec) {
    shutdown();
    queue_.clear();
    on_closed(ec);
  }

  websocket::stream<tcp::socket> ws_;
  http::request<http::string_body> req_;
  beast::flat_buffer buffer_;
  std::deque<Message> queue_;
  bool closed_{false};
};

// Reads the first line to tell an HTTP upgrade from a raw line client.
class Handshake : public std::enable_shared_from_this<Handshake> {
 public:
  Handshake(Hub& hub, tcp::socket socket)
      : hub_(hub), socket_(std::move(socket)), timer_(socket_.get_executor()) {}

  // A client that stays silent is a raw line client that only listens.
  void start() {
    timer_.expires_after(std::chrono::milliseconds(200));
    timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
      if (!ec) self->socket_.cancel();
    });
    net::async_read_until(socket_, net::dynamic_buffer(head_, kMaxLine), '\n',
                          [self = shared_from_this()](beast::error_code ec, std::size_t) {
                            self->timer_.cancel();
                            if (!ec || ec == net::error::operation_aborted) self->dispatch();
                          });
  }

 private:
  void dispatch() {
    if (head_.rfind("GET ", 0) != 0) {
      std::make_shared<LineClient>(hub_, hub_.next_id(), std::move(socket_), std::move(head_))->start();
      return;
    }
    const auto n = net::buffer_copy(buffer_.prepare(head_.size()), net::buffer(head_));
    buffer_.commit(n);
    http::async_read(socket_, buffer_, req_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (!ec) self->upgrade();
    });
  }

  void upgrade() {
    if (websocket::is_upgrade(req_) && req_.target() == "/session") {
      auto ws = std::make_shared<WsClient>(hub_, hub_.next_id(), std::move(socket_));
      ws->accept(std::move(req_));
      return;
    }
    auto res = std::make_shared<http::response<http::string_body>>(http::status::not_found, req_.version());
    res->set(http::field::content_type, "text/plain");
    res->body() = "the session endpoint is /session (WebSocket upgrade)\n";
    res->keep_alive(false);
    res->prepare_payload();
    http::async_write(socket_, *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
      beast::error_code ignored;
      self->socket_.shutdown(tcp::socket::shutdown_both, ignored);
    });
  }

  Hub& hub_;
  tcp::socket socket_;
  net::steady_timer timer_;
  std::string head_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
};

}  // namespace

struct SessionServer::Impl {
  Impl(Session& session, ServerOptions opts)
      : options(std::move(opts)), acceptor(ioc), timer(ioc), hub(session, options.max_backlog) {
    beast::error_code ec;
    const auto address = net::ip::make_address(options.address, ec);
    if (ec) throw IoError(fmt::format("bad listen address '{}': {}", options.address, ec.message()));
    const tcp::endpoint endpoint(address, options.port);
    acceptor.open(endpoint.protocol(), ec);
    if (!ec) acceptor.bind(endpoint, ec);
    if (!ec) acceptor.listen(net::socket_base::max_listen_connections, ec);
    if (ec)
      throw IoError(fmt::format("cannot listen on {}:{}: {}", options.address, options.port, ec.message()));
  }

  void accept() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) {
        if (ec != net::error::operation_aborted) spdlog::warn("accept failed: {}", ec.message());
        if (!acceptor.is_open()) return;
      } else {
        std::make_shared<Handshake>(hub, std::move(socket))->start();
      }
      accept();
    });
  }

  void schedule_tick() {
    timer.expires_at(timer.expiry() + options.tick_period);
    timer.async_wait([this](beast::error_code ec) {
      if (ec) return;
      hub.tick();
      schedule_tick();
    });
  }

  void shutdown() {
    beast::error_code ignored;
    if (stopping) return;
    stopping = true;
    acceptor.close(ignored);
    timer.cancel();
    hub.close_all();
  }

  ServerOptions options;
  net::io_context ioc{1};
  tcp::acceptor acceptor;
  net::steady_timer timer;
  Hub hub;
  bool stopping{false};
};

SessionServer::SessionServer(Session& session, ServerOptions options)
    : impl_(std::make_unique<Impl>(session, std::move(options))) {}

SessionServer::~SessionServer() = default;

std::uint16_t SessionServer::port() const { return impl_->acceptor.local_endpoint().port(); }

void SessionServer::run() {
  spdlog::info("session endpoint listening on {}:{} (tick {} ms)", impl_->options.address, port(),
               impl_->options.tick_period.count());
  impl_->accept();
  impl_->timer.expires_after(std::chrono::milliseconds(0));
  impl_->schedule_tick();
  std::optional<net::signal_set> signals;
  if (impl_->options.handle_signals) {
    signals.emplace(impl_->ioc, SIGINT, SIGTERM);
    signals->async_wait([impl = impl_.get()](beast::error_code ec, int sig) {
      if (ec) return;
      spdlog::info("signal {}: shutting down", sig);
      impl->shutdown();
    });
  }
  impl_->ioc.run();
}

void SessionServer::stop() {
  net::post(impl_->ioc, [impl = impl_.get()] { impl->shutdown(); });
}

}  // namespace cyclic_swarm
