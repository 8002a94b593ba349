#include "opscore/service/server.hpp"

#include <chrono>
#include <cmath>
#include <deque>
#include <iostream>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

namespace opscore::service {
namespace {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using Clock = std::chrono::steady_clock;

class Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(tcp::socket socket, const ServiceContext& context, Clock::duration period)
      : ws_(std::move(socket)), timer_(ws_.get_executor()), session_(context), period_(period) {}

  void start() {
    http::async_read(ws_.next_layer(), buffer_, request_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_request(ec); });
  }

 private:
  void on_request(beast::error_code ec) {
    if (ec) return;
    if (!websocket::is_upgrade(request_) || request_.target() != "/session") {
      auto response = std::make_shared<http::response<http::string_body>>(http::status::not_found, request_.version());
      response->set(http::field::content_type, "text/plain");
      response->body() = "only /session is served\n";
      response->prepare_payload();
      response->keep_alive(false);
      http::async_write(ws_.next_layer(), *response,
                        [self = shared_from_this(), response](beast::error_code, std::size_t) {
                          beast::error_code ignored;
                          self->ws_.next_layer().socket().shutdown(tcp::socket::shutdown_both, ignored);
                        });
      return;
    }
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(request_, [self = shared_from_this()](beast::error_code ec) { self->on_accept(ec); });
  }

  void on_accept(beast::error_code ec) {
    if (ec) return;
    ws_.text(true);
    buffer_.clear();
    next_tick_ = Clock::now() + period_;
    schedule_tick();
    do_read();
  }

  void do_read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
  }

  void on_read(beast::error_code ec) {
    if (ec) {
      close();
      return;
    }
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    if (!run_guarded([&] { return session_.handle(text); })) return;
    do_read();
  }

  void schedule_tick() {
    timer_.expires_at(next_tick_);
    timer_.async_wait([self = shared_from_this()](beast::error_code ec) { self->on_tick(ec); });
  }

  void on_tick(beast::error_code ec) {
    if (ec || closed_) return;
    if (!run_guarded([&] { return session_.tick(); })) return;
    // Fixed rate: the next deadline follows the previous one, not the wakeup time.
    next_tick_ += period_;
    schedule_tick();
  }

  template <typename Fn>
  bool run_guarded(Fn&& fn) {
    try {
      for (const Json& message : fn()) enqueue(message.dump());
      return true;
    } catch (const std::exception& e) {
      std::cerr << "session error: " << e.what() << "\n";
      close();
      return false;
    }
  }

  void enqueue(std::string message) {
    queue_.push_back(std::move(message));
    if (queue_.size() == 1) do_write();
  }

  void do_write() {
    ws_.async_write(asio::buffer(queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->close();
        return;
      }
      self->queue_.pop_front();
      if (!self->queue_.empty()) self->do_write();
    });
  }

  void close() {
    if (closed_) return;
    closed_ = true;
    timer_.cancel();
    beast::error_code ignored;
    ws_.next_layer().socket().close(ignored);
  }

  websocket::stream<beast::tcp_stream> ws_;
  asio::steady_timer timer_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> request_;
  FeedbackSession session_;
  Clock::duration period_;
  Clock::time_point next_tick_;
  std::deque<std::string> queue_;
  bool closed_ = false;
};

}  // namespace

struct FeedbackServer::Impl {
  ServiceContext context;
  ServerOptions options;
  asio::io_context ioc{1};
  tcp::acceptor acceptor{ioc};
  Clock::duration period{};

  void do_accept() {
    acceptor.async_accept(asio::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
      if (ec) {
        if (ec != asio::error::operation_aborted) do_accept();
        return;
      }
      std::make_shared<Connection>(std::move(socket), context, period)->start();
      do_accept();
    });
  }
};

FeedbackServer::FeedbackServer(ServiceContext context, ServerOptions options) : impl_(std::make_unique<Impl>()) {
  require(options.tick_hz > 0 && std::isfinite(options.tick_hz), ErrorCode::InvalidArgument, "tick_hz must be positive");
  impl_->context = std::move(context);
  impl_->options = options;
  impl_->period = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(1.0 / options.tick_hz));

  beast::error_code ec;
  const auto address = asio::ip::make_address(options.address, ec);
  if (ec) fail(ErrorCode::BindFailure, "bad address '" + options.address + "': " + ec.message());
  const tcp::endpoint endpoint(address, options.port);
  auto& acceptor = impl_->acceptor;
  acceptor.open(endpoint.protocol(), ec);
  if (!ec) acceptor.set_option(asio::socket_base::reuse_address(true), ec);
  if (!ec) acceptor.bind(endpoint, ec);
  if (!ec) acceptor.listen(asio::socket_base::max_listen_connections, ec);
  if (ec)
    fail(ErrorCode::BindFailure, options.address + ":" + std::to_string(options.port) + ": " + ec.message());
  impl_->do_accept();
}

FeedbackServer::~FeedbackServer() = default;

unsigned short FeedbackServer::port() const { return impl_->acceptor.local_endpoint().port(); }

void FeedbackServer::run() { impl_->ioc.run(); }

void FeedbackServer::stop() { impl_->ioc.stop(); }

}  // namespace opscore::service
