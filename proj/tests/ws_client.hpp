#pragma once

// Minimal blocking WebSocket client for driving the serve endpoint in tests.

#include <chrono>
#include <string>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "headzoom/server.hpp"

namespace wsclient {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

class Client {
 public:
  explicit Client(unsigned short port) : ws_(ioc_) {
    tcp::resolver resolver(ioc_);
    net::connect(ws_.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws_.handshake("127.0.0.1:" + std::to_string(port), "/");
    ws_.text(true);
  }

  void send(const std::string& line) { ws_.write(net::buffer(line)); }

  std::string receive() {
    beast::flat_buffer buffer;
    ws_.read(buffer);
    return beast::buffers_to_string(buffer.data());
  }

  /// Sends `line` and returns the next message.
  std::string request(const std::string& line) {
    send(line);
    return receive();
  }

  void close() { ws_.close(websocket::close_code::normal); }

 private:
  net::io_context ioc_;
  websocket::stream<tcp::socket> ws_;
};

/// Runs a Server on a background thread for the lifetime of the object.
class LiveServer {
 public:
  explicit LiveServer(headzoom::Session session, headzoom::ServerOptions options = withFreePort())
      : server_(std::move(session), options), thread_([this] { server_.run(); }) {}
  ~LiveServer() {
    server_.stop();
    thread_.join();
  }
  unsigned short port() const { return server_.port(); }

  static headzoom::ServerOptions withFreePort() {
    headzoom::ServerOptions o;
    o.port = 0;
    return o;
  }

 private:
  headzoom::Server server_;
  std::thread thread_;
};

/// The VIEW line with its timestamp field removed.
inline std::string withoutTimestamp(const std::string& view) {
  const auto first = view.find(' ');
  const auto second = view.find(' ', first + 1);
  return view.substr(0, first) + view.substr(second);
}

}  // namespace wsclient
