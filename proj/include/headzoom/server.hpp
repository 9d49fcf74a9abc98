#pragma once

// WebSocket transport for Session. Each text message may carry one or more
// newline-separated frames. Socket I/O runs on one thread, the engine on
// another; they meet through bounded queues.

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "headzoom/session.hpp"

namespace headzoom {

struct InboundMessage {
  std::uint64_t client{0};
  std::string line;
  bool isPose{false};
};

/// Bounded multi-producer queue. When full, the oldest queued POSE is
/// discarded to make room; control frames are never dropped.
class InboundQueue {
 public:
  explicit InboundQueue(std::size_t capacity) : capacity_(capacity) {}

  /// Returns the number of POSE frames discarded to fit `msg`.
  std::size_t push(InboundMessage msg);
  /// Blocks until a message arrives or the queue is closed and drained.
  std::optional<InboundMessage> pop();
  void close();
  std::size_t size() const;

 private:
  std::size_t capacity_;
  mutable std::mutex mutex_;
  std::condition_variable ready_;
  std::deque<InboundMessage> items_;
  bool closed_{false};
};

struct ServerOptions {
  std::string address{"127.0.0.1"};
  /// 0 picks a free port; see Server::port().
  unsigned short port{8765};
  std::size_t inboundCapacity{64};
  std::size_t outboundCapacity{256};
};

class Server {
 public:
  Server(Session session, ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  unsigned short port() const;
  /// Serves until stop(); call from one thread only.
  void run();
  /// Thread-safe.
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace headzoom
