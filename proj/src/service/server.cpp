#include "tpo/service/server.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <openssl/evp.h>
#include <openssl/sha.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>

#include "tpo/service/mission.hpp"

namespace tpo::service {

namespace {

enum class Transport { Unknown, Raw, WebSocket };

void set_nonblocking(int fd) { ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL, 0) | O_NONBLOCK); }

std::string header_value(const std::string& request, const std::string& name) {
  std::string lower = request;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  std::string key = name;
  std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
  const auto pos = lower.find("\r\n" + key + ":");
  if (pos == std::string::npos) return {};
  auto start = pos + 3 + key.size();
  const auto end = request.find("\r\n", start);
  while (start < end && request[start] == ' ') ++start;
  auto stop = end;
  while (stop > start && request[stop - 1] == ' ') --stop;
  return request.substr(start, stop - start);
}

std::string frame_header(std::uint8_t first, std::size_t n, bool masked) {
  std::string h;
  h.push_back(static_cast<char>(first));
  const std::uint8_t mask_bit = masked ? 0x80 : 0x00;
  if (n < 126) {
    h.push_back(static_cast<char>(mask_bit | n));
  } else if (n < 65536) {
    h.push_back(static_cast<char>(mask_bit | 126));
    h.push_back(static_cast<char>((n >> 8) & 0xff));
    h.push_back(static_cast<char>(n & 0xff));
  } else {
    h.push_back(static_cast<char>(mask_bit | 127));
    for (int i = 7; i >= 0; --i) h.push_back(static_cast<char>((static_cast<std::uint64_t>(n) >> (8 * i)) & 0xff));
  }
  return h;
}

}  // namespace

std::string websocket_accept_key(const std::string& client_key) {
  const std::string input = client_key + "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";
  unsigned char digest[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(input.data()), input.size(), digest);
  unsigned char out[4 * ((SHA_DIGEST_LENGTH + 2) / 3) + 1];
  const int n = EVP_EncodeBlock(out, digest, SHA_DIGEST_LENGTH);
  return std::string(reinterpret_cast<char*>(out), static_cast<std::size_t>(n));
}

std::string websocket_text_frame(const std::string& text) { return frame_header(0x81, text.size(), false) + text; }

std::string websocket_client_frame(const std::string& text, std::uint32_t mask) {
  std::string out = frame_header(0x81, text.size(), true);
  const char m[4] = {static_cast<char>(mask >> 24), static_cast<char>(mask >> 16), static_cast<char>(mask >> 8),
                     static_cast<char>(mask)};
  out.append(m, 4);
  for (std::size_t i = 0; i < text.size(); ++i) out.push_back(static_cast<char>(text[i] ^ m[i % 4]));
  return out;
}

std::optional<std::string> WebSocketDecoder::next() {
  while (!closed_) {
    if (buffer_.size() < 2) return std::nullopt;
    const auto b = [&](std::size_t i) { return static_cast<std::uint8_t>(buffer_[i]); };
    const bool fin = b(0) & 0x80;
    const std::uint8_t opcode = b(0) & 0x0f;
    const bool masked = b(1) & 0x80;
    std::uint64_t n = b(1) & 0x7f;
    std::size_t pos = 2;
    if (n == 126) {
      if (buffer_.size() < 4) return std::nullopt;
      n = (static_cast<std::uint64_t>(b(2)) << 8) | b(3);
      pos = 4;
    } else if (n == 127) {
      if (buffer_.size() < 10) return std::nullopt;
      n = 0;
      for (std::size_t i = 0; i < 8; ++i) n = (n << 8) | b(2 + i);
      pos = 10;
    }
    if (n > kMaxFrameBytes) throw ConfigError("websocket frame exceeds the size limit");
    const std::size_t mask_at = pos;
    if (masked) pos += 4;
    if (buffer_.size() < pos + n) return std::nullopt;
    std::string payload = buffer_.substr(pos, static_cast<std::size_t>(n));
    if (masked)
      for (std::size_t i = 0; i < payload.size(); ++i) payload[i] = static_cast<char>(payload[i] ^ buffer_[mask_at + i % 4]);
    buffer_.erase(0, pos + static_cast<std::size_t>(n));
    if (opcode == 0x8) {
      closed_ = true;
      return std::nullopt;
    }
    if (opcode == 0x9 || opcode == 0xA) continue;  // ping / pong
    fragments_ += payload;
    if (!fin) continue;
    std::string text;
    text.swap(fragments_);
    return text;
  }
  return std::nullopt;
}

struct TeleopServer::Client {
  int fd = -1;
  Transport transport = Transport::Unknown;
  std::string handshake;
  FrameDecoder frames;
  WebSocketDecoder ws;
  Endpoint endpoint;
  BoundedQueue<std::string> out{kSnapshotQueueDepth};
  std::string partial;
  bool dead = false;
};

TeleopServer::TeleopServer(ServerOptions options) : options_(std::move(options)) {}

TeleopServer::~TeleopServer() { stop(); }

std::uint16_t TeleopServer::start() {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw Error(std::string("socket: ") + std::strerror(errno));
  int yes = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(options_.port);
  if (::inet_pton(AF_INET, options_.bind.c_str(), &addr.sin_addr) != 1)
    throw ConfigError("invalid bind address '" + options_.bind + "'");
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(listen_fd_, 8) < 0) {
    const std::string why = std::strerror(errno);
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw Error("cannot listen on " + options_.bind + ":" + std::to_string(options_.port) + ": " + why);
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  set_nonblocking(listen_fd_);
  running_ = true;
  thread_ = std::thread([this] { network_loop(); });
  return port_;
}

void TeleopServer::stop() {
  running_ = false;
  if (thread_.joinable()) thread_.join();
  std::lock_guard<std::mutex> lock(clients_mutex_);
  for (auto& c : clients_) ::close(c->fd);
  clients_.clear();
  if (listen_fd_ >= 0) ::close(listen_fd_);
  listen_fd_ = -1;
}

void TeleopServer::publish(MessageKind kind, const Json& payload) {
  const WireMessage m{kind, ++seq_, payload};
  const std::string body = message_text(m);
  std::lock_guard<std::mutex> lock(clients_mutex_);
  for (auto& c : clients_) {
    if (c->transport == Transport::Unknown || c->dead) continue;
    c->out.push(c->transport == Transport::WebSocket ? websocket_text_frame(body) : encode_frame(m));
  }
}

std::size_t TeleopServer::client_count() const {
  std::lock_guard<std::mutex> lock(clients_mutex_);
  return static_cast<std::size_t>(std::count_if(clients_.begin(), clients_.end(), [](const auto& c) {
    return !c->dead && c->transport != Transport::Unknown;
  }));
}

std::size_t TeleopServer::dropped_messages() const {
  std::lock_guard<std::mutex> lock(clients_mutex_);
  std::size_t n = dropped_closed_;
  for (const auto& c : clients_) n += c->out.dropped();
  return n;
}

void TeleopServer::enqueue_error(Client& c, const WireMessage& error) {
  WireMessage m = error;
  m.seq = ++seq_;
  const std::string body = message_text(m);
  c.out.push(c.transport == Transport::WebSocket ? websocket_text_frame(body) : encode_frame(m));
}

void TeleopServer::handle_input(Client& c) {
  char buf[4096];
  for (;;) {
    const ssize_t n = ::recv(c.fd, buf, sizeof buf, 0);
    if (n == 0) {
      c.dead = true;
      return;
    }
    if (n < 0) {
      if (errno != EAGAIN && errno != EWOULDBLOCK) c.dead = true;
      break;
    }
    const std::string bytes(buf, static_cast<std::size_t>(n));
    if (c.transport == Transport::Unknown) {
      c.handshake += bytes;
      if (c.handshake.size() < 4) continue;
      if (c.handshake.compare(0, 4, "GET ") != 0) {
        c.transport = Transport::Raw;
        c.frames.feed(c.handshake);
        c.handshake.clear();
      } else {
        const auto end = c.handshake.find("\r\n\r\n");
        if (end == std::string::npos) continue;
        const std::string key = header_value(c.handshake, "Sec-WebSocket-Key");
        if (key.empty()) {
          const std::string reply = "HTTP/1.1 400 Bad Request\r\nContent-Length: 0\r\nConnection: close\r\n\r\n";
          ::send(c.fd, reply.data(), reply.size(), MSG_NOSIGNAL);
          c.dead = true;
          return;
        }
        const std::string reply = "HTTP/1.1 101 Switching Protocols\r\nUpgrade: websocket\r\nConnection: Upgrade\r\n"
                                  "Sec-WebSocket-Accept: " + websocket_accept_key(key) + "\r\n\r\n";
        c.partial = reply;
        c.transport = Transport::WebSocket;
        c.ws.feed(c.handshake.substr(end + 4));
        c.handshake.clear();
      }
    } else if (c.transport == Transport::Raw) {
      c.frames.feed(bytes);
    } else {
      c.ws.feed(bytes);
    }
  }

  try {
    for (;;) {
      std::optional<std::string> text = c.transport == Transport::Raw ? c.frames.next()
                                        : c.transport == Transport::WebSocket ? c.ws.next()
                                                                              : std::nullopt;
      if (!text) break;
      Endpoint::Inbound in = c.endpoint.receive(*text);
      if (in.command) commands_.push(std::move(*in.command));
      if (in.error) enqueue_error(c, *in.error);
    }
    if (c.ws.closed()) c.dead = true;
  } catch (const Error& e) {
    enqueue_error(c, make_error(0, e.what()));
    c.dead = true;
  }
}

void TeleopServer::flush(Client& c) {
  while (!c.dead) {
    if (c.partial.empty()) {
      auto next = c.out.try_pop();
      if (!next) return;
      c.partial = std::move(*next);
    }
    const ssize_t n = ::send(c.fd, c.partial.data(), c.partial.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno != EAGAIN && errno != EWOULDBLOCK) c.dead = true;
      return;
    }
    c.partial.erase(0, static_cast<std::size_t>(n));
    if (!c.partial.empty()) return;
  }
}

void TeleopServer::network_loop() {
  while (running_) {
    std::vector<pollfd> fds;
    {
      std::lock_guard<std::mutex> lock(clients_mutex_);
      fds.push_back({listen_fd_, POLLIN, 0});
      for (auto& c : clients_) {
        short events = POLLIN;
        if (!c->partial.empty() || c->out.size() > 0) events |= POLLOUT;
        fds.push_back({c->fd, events, 0});
      }
    }
    ::poll(fds.data(), fds.size(), 5);

    std::lock_guard<std::mutex> lock(clients_mutex_);
    if (fds[0].revents & POLLIN) {
      for (;;) {
        const int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) break;
        set_nonblocking(fd);
        int yes = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &yes, sizeof yes);
        auto c = std::make_unique<Client>();
        c->fd = fd;
        clients_.push_back(std::move(c));
      }
    }
    for (std::size_t i = 1; i < fds.size() && i - 1 < clients_.size(); ++i) {
      Client& c = *clients_[i - 1];
      if (fds[i].revents & (POLLIN | POLLHUP | POLLERR)) handle_input(c);
    }
    for (auto& c : clients_) flush(*c);
    for (auto it = clients_.begin(); it != clients_.end();) {
      if ((*it)->dead) {
        dropped_closed_ += (*it)->out.dropped();
        ::close((*it)->fd);
        it = clients_.erase(it);
      } else {
        ++it;
      }
    }
  }
}

void serve_mission(Mission& mission, TeleopServer& server, const ServerOptions& options,
                   const std::atomic<bool>& stop) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  const double period = options.snapshot_hz > 0.0 ? 1.0 / options.snapshot_hz : 0.0;
  double next_snapshot = 0.0;
  const auto publish_state = [&] {
    server.publish(MessageKind::StateSnapshot, snapshot_to_json(mission.snapshot()));
    server.publish(MessageKind::Feedback, feedback_to_json(mission.last_feedback()));
  };
  while (!stop && !mission.done()) {
    for (TraceEvent& e : server.take_commands()) {
      e.t = mission.world().state().clock;
      try {
        mission.inject(std::move(e));
      } catch (const Error& err) {
        server.publish(MessageKind::Error, Json{{"message", err.what()}, {"in_reply_to", nullptr}});
      }
    }
    try {
      mission.step();
    } catch (const Error& err) {
      server.publish(MessageKind::Error, Json{{"message", err.what()}, {"in_reply_to", nullptr}});
    }
    for (const GoalEvent& g : mission.take_goal_events()) server.publish(MessageKind::GoalEvent, goal_event_to_json(g));
    const double t = mission.world().state().clock;
    if (t + 1e-9 >= next_snapshot) {
      publish_state();
      next_snapshot += period;
    }
    if (options.rate > 0.0) {
      const auto due = start + std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(t / options.rate));
      std::this_thread::sleep_until(due);
    }
  }
  publish_state();
}

}  // namespace tpo::service
