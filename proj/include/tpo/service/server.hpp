#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "tpo/service/wire.hpp"

namespace tpo::service {

class Mission;

/// FIFO with a fixed depth. Pushing into a full queue drops the oldest entry.
template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t depth) : depth_(depth) {}

  /// Returns true when an older entry was dropped to make room.
  bool push(T value) {
    std::lock_guard<std::mutex> lock(mutex_);
    bool dropped = false;
    if (items_.size() >= depth_) {
      items_.pop_front();
      ++dropped_;
      dropped = true;
    }
    items_.push_back(std::move(value));
    return dropped;
  }

  std::optional<T> try_pop() {
    std::lock_guard<std::mutex> lock(mutex_);
    if (items_.empty()) return std::nullopt;
    T v = std::move(items_.front());
    items_.pop_front();
    return v;
  }

  std::vector<T> drain() {
    std::lock_guard<std::mutex> lock(mutex_);
    std::vector<T> out(std::make_move_iterator(items_.begin()), std::make_move_iterator(items_.end()));
    items_.clear();
    return out;
  }

  std::size_t size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return items_.size();
  }
  std::size_t dropped() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return dropped_;
  }
  std::size_t depth() const { return depth_; }

 private:
  std::size_t depth_;
  mutable std::mutex mutex_;
  std::deque<T> items_;
  std::size_t dropped_ = 0;
};

inline constexpr std::size_t kSnapshotQueueDepth = 8;
inline constexpr std::size_t kCommandQueueDepth = 64;

/// Sec-WebSocket-Accept value for a client key.
std::string websocket_accept_key(const std::string& client_key);
/// Unmasked server-to-client text frame.
std::string websocket_text_frame(const std::string& text);
/// Masked client-to-server text frame (used by tests and tools).
std::string websocket_client_frame(const std::string& text, std::uint32_t mask);

/// Splits a client byte stream into text payloads. Close frames set closed().
class WebSocketDecoder {
 public:
  void feed(const std::string& bytes) { buffer_ += bytes; }
  std::optional<std::string> next();
  bool closed() const { return closed_; }

 private:
  std::string buffer_;
  std::string fragments_;
  bool closed_ = false;
};

struct ServerOptions {
  std::string bind = "127.0.0.1";
  std::uint16_t port = 8765;  // 0 picks a free port
  double rate = 1.0;          // real-time factor; 0 runs as fast as possible
  double snapshot_hz = 30.0;
};

/// Network endpoint on its own thread. Each client connection speaks either
/// length-prefixed frames or, when it opens with an HTTP GET upgrade request,
/// WebSocket text frames carrying the same JSON bodies. Outbound messages are
/// queued per client with depth kSnapshotQueueDepth, dropping the oldest.
class TeleopServer {
 public:
  explicit TeleopServer(ServerOptions options);
  ~TeleopServer();
  TeleopServer(const TeleopServer&) = delete;
  TeleopServer& operator=(const TeleopServer&) = delete;

  /// Binds and starts the network thread; returns the bound port.
  std::uint16_t start();
  void stop();

  /// Commands received since the last call, in arrival order.
  std::vector<TraceEvent> take_commands() { return commands_.drain(); }
  /// Stamps the next outbound sequence number and queues the message for every client.
  void publish(MessageKind kind, const Json& payload);

  std::size_t client_count() const;
  std::size_t dropped_messages() const;
  std::uint64_t last_seq() const { return seq_.load(); }

 private:
  struct Client;
  void network_loop();
  void handle_input(Client& c);
  void flush(Client& c);
  void enqueue_error(Client& c, const WireMessage& error);

  ServerOptions options_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> running_{false};
  std::atomic<std::uint64_t> seq_{0};
  std::thread thread_;
  mutable std::mutex clients_mutex_;
  std::vector<std::unique_ptr<Client>> clients_;
  std::size_t dropped_closed_ = 0;
  BoundedQueue<TraceEvent> commands_{kCommandQueueDepth};
};

/// Runs `mission` live: drains commands once per step, decimates snapshots
/// and feedback to options.snapshot_hz, forwards goal events, and paces the
/// loop by options.rate. Returns when the mission is done or `stop` is set.
void serve_mission(Mission& mission, TeleopServer& server, const ServerOptions& options,
                   const std::atomic<bool>& stop);

}  // namespace tpo::service
