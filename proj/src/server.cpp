#include "headzoom/server.hpp"

#include <algorithm>
#include <thread>
#include <unordered_map>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "headzoom/text.hpp"

namespace headzoom {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

std::size_t InboundQueue::push(InboundMessage msg) {
  std::size_t dropped = 0;
  {
    std::lock_guard lock(mutex_);
    if (closed_) return 0;
    while (items_.size() >= capacity_) {
      const auto stale = std::find_if(items_.begin(), items_.end(), [](const auto& m) { return m.isPose; });
      if (stale == items_.end()) break;
      items_.erase(stale);
      ++dropped;
    }
    items_.push_back(std::move(msg));
  }
  ready_.notify_one();
  return dropped;
}

std::optional<InboundMessage> InboundQueue::pop() {
  std::unique_lock lock(mutex_);
  ready_.wait(lock, [&] { return closed_ || !items_.empty(); });
  if (items_.empty()) return std::nullopt;
  InboundMessage msg = std::move(items_.front());
  items_.pop_front();
  return msg;
}

void InboundQueue::close() {
  {
    std::lock_guard lock(mutex_);
    closed_ = true;
  }
  ready_.notify_all();
}

std::size_t InboundQueue::size() const {
  std::lock_guard lock(mutex_);
  return items_.size();
}

namespace {

class Connection;

/// State owned by the I/O thread.
struct Hub {
  net::io_context& ioc;
  InboundQueue& inbound;
  std::size_t outboundCapacity;
  std::unordered_map<std::uint64_t, std::weak_ptr<Connection>> clients;
  std::optional<std::uint64_t> producer;
  std::string lastView;
  std::uint64_t nextId{1};
};

class Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(tcp::socket socket, Hub& hub, std::uint64_t id) : ws_(std::move(socket)), hub_(hub), id_(id) {}

  void start() {
    ws_.text(true);
    ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->hub_.clients[self->id_] = self;
      if (!self->hub_.lastView.empty()) self->send(self->hub_.lastView);
      self->read();
    });
  }

  void send(std::string line) {
    outbox_.push_back(std::move(line));
    while (outbox_.size() > hub_.outboundCapacity) outbox_.pop_front();
    if (!writing_) write();
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->disconnect();
      const std::string payload = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      text::forEachLine(payload, [&](std::size_t, std::string_view raw) { self->dispatch(raw); });
      self->read();
    });
  }

  void dispatch(std::string_view raw) {
    const std::string_view line = text::trim(raw);
    if (line.empty()) return;
    const bool isPose = line.starts_with("POSE");
    if (isPose) {
      if (!hub_.producer) hub_.producer = id_;
      if (*hub_.producer != id_) {
        send("ERROR InvalidArgument: another client is the pose producer");
        return;
      }
    }
    hub_.inbound.push({id_, std::string(line), isPose});
  }

  void write() {
    writing_ = true;
    inFlight_ = std::move(outbox_.front());
    outbox_.pop_front();
    ws_.async_write(net::buffer(inFlight_), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->writing_ = false;
        return self->disconnect();
      }
      if (self->outbox_.empty()) {
        self->writing_ = false;
      } else {
        self->write();
      }
    });
  }

  void disconnect() {
    hub_.clients.erase(id_);
    if (hub_.producer == id_) hub_.producer.reset();
  }

  websocket::stream<beast::tcp_stream> ws_;
  Hub& hub_;
  std::uint64_t id_;
  beast::flat_buffer buffer_;
  std::deque<std::string> outbox_;
  std::string inFlight_;
  bool writing_{false};
};

}  // namespace

struct Server::Impl {
  Impl(Session s, ServerOptions o)
      : session(std::move(s)),
        options(o),
        inbound(o.inboundCapacity),
        acceptor(ioc),
        hub{ioc, inbound, o.outboundCapacity, {}, {}, {}, 1} {
    const tcp::endpoint endpoint(net::ip::make_address(options.address), options.port);
    acceptor.open(endpoint.protocol());
    acceptor.set_option(net::socket_base::reuse_address(true));
    acceptor.bind(endpoint);
    acceptor.listen();
  }

  void accept() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      std::make_shared<Connection>(std::move(socket), hub, hub.nextId++)->start();
      accept();
    });
  }

  void deliver(std::uint64_t sender, std::vector<Outbound> frames) {
    for (auto& frame : frames) {
      if (frame.line.starts_with("VIEW ")) hub.lastView = frame.line;
      if (frame.audience == Outbound::Audience::Sender) {
        if (const auto it = hub.clients.find(sender); it != hub.clients.end()) {
          if (auto c = it->second.lock()) c->send(frame.line);
        }
        continue;
      }
      for (auto& [id, weak] : hub.clients) {
        if (auto c = weak.lock()) c->send(frame.line);
      }
    }
  }

  void engineLoop() {
    while (auto msg = inbound.pop()) {
      auto frames = session.handle(msg->line);
      if (frames.empty()) continue;
      net::post(ioc, [this, sender = msg->client, frames = std::move(frames)]() mutable {
        deliver(sender, std::move(frames));
      });
    }
  }

  Session session;
  ServerOptions options;
  InboundQueue inbound;
  net::io_context ioc;
  tcp::acceptor acceptor;
  Hub hub;
};

Server::Server(Session session, ServerOptions options)
    : impl_(std::make_unique<Impl>(std::move(session), options)) {}

Server::~Server() { stop(); }

unsigned short Server::port() const { return impl_->acceptor.local_endpoint().port(); }

void Server::run() {
  std::thread engine([this] { impl_->engineLoop(); });
  impl_->accept();
  impl_->ioc.run();
  impl_->inbound.close();
  engine.join();
}

void Server::stop() { impl_->ioc.stop(); }

}  // namespace headzoom
