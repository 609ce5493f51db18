#include <gtest/gtest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <filesystem>
#include <thread>

#include "tpo/bt/parser.hpp"
#include "tpo/service/mission.hpp"
#include "tpo/service/server.hpp"
#include "tpo/service/wire.hpp"

using namespace tpo;
using namespace tpo::service;

namespace {

Snapshot sample_snapshot() {
  Snapshot s;
  s.step = 42;
  s.t = 0.42;
  s.mode = "tpo";
  s.base = {1.5, -0.25, 0.3};
  s.pelvis_z = 0.93;
  s.q_left = VecX::LinSpaced(4, -0.5, 0.5);
  s.q_right = VecX::LinSpaced(4, 0.1, 0.4);
  s.head_pitch = 0.2;
  s.gripper = 0.75;
  s.ee_left = Vec3(0.5, 0.2, 1.1);
  s.ee_right = Vec3(0.5, -0.2, 1.1);
  s.objects.push_back({"box", Vec3(0.55, 0, 1.19), 0.1, true});
  s.beta = Vec3(0.31, 0.12, 0.44);
  s.w = Vec3(1.0, 0.0, 0.5);
  s.f_cp_right = Vec3(0.2, 0.0, -0.1);
  s.sensed_left = Vec3(0.0, 22.4, -9.6);
  s.f_bar = 22.42;
  s.bt_labels = {"root", "look"};
  s.bt_status = "RR";
  s.active = "gaze_tracking";
  s.control_point = "right_ee";
  s.phase = "transport";
  s.spot = Vec3(2.0, 0.0, 0.0);
  s.feedback.forearm_squeeze = {0.1, 0.9};
  s.feedback.vibration = Vibration{"right", VibrationPattern::Double};
  return s;
}

std::string command_text(std::uint64_t seq, const std::string& type = "laser") {
  TraceEvent e{0.0, type, Json{{"on", false}}};
  return message_text(encode_command(e, seq));
}

// Blocking test client over loopback.
class Client {
 public:
  explicit Client(std::uint16_t port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
    connected_ = ::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0;
  }
  ~Client() { ::close(fd_); }

  bool connected() const { return connected_; }
  void send(const std::string& bytes) { ::send(fd_, bytes.data(), bytes.size(), MSG_NOSIGNAL); }

  // Reads whatever arrives within `ms`.
  std::string read_for(int ms) {
    std::string out;
    const auto until = std::chrono::steady_clock::now() + std::chrono::milliseconds(ms);
    while (std::chrono::steady_clock::now() < until) {
      pollfd p{fd_, POLLIN, 0};
      if (::poll(&p, 1, 10) <= 0) continue;
      char buf[4096];
      const ssize_t n = ::recv(fd_, buf, sizeof buf, 0);
      if (n <= 0) break;
      out.append(buf, static_cast<std::size_t>(n));
    }
    return out;
  }

 private:
  int fd_ = -1;
  bool connected_ = false;
};

template <typename Pred>
bool wait_until(Pred pred, int ms = 2000) {
  const auto until = std::chrono::steady_clock::now() + std::chrono::milliseconds(ms);
  while (std::chrono::steady_clock::now() < until) {
    if (pred()) return true;
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  return pred();
}

}  // namespace

// ---- messages --------------------------------------------------------------

TEST(Wire, SnapshotRoundTripThroughText) {
  const Snapshot s = sample_snapshot();
  const WireMessage m = parse_message(message_text(encode_snapshot(s, 7)));
  EXPECT_EQ(m.kind, MessageKind::StateSnapshot);
  EXPECT_EQ(m.seq, 7u);
  EXPECT_EQ(decode_snapshot(m), s);
}

TEST(Wire, UnknownFieldsAreIgnored) {
  Json j = snapshot_to_json(sample_snapshot());
  j["future_field"] = {{"nested", 1}};
  EXPECT_EQ(snapshot_from_json(j), sample_snapshot());
  Json msg = Json::parse(command_text(3));
  msg["trace_id"] = "abc";
  msg["payload"]["note"] = "hi";
  EXPECT_EQ(decode_command(parse_message(msg.dump())).type, "laser");
}

TEST(Wire, MissingSnapshotFieldIsAnError) {
  Json j = snapshot_to_json(sample_snapshot());
  j.erase("base");
  EXPECT_THROW(snapshot_from_json(j), ConfigError);
}

TEST(Wire, FeedbackAndGoalEventRoundTrip) {
  const FeedbackFrame f = sample_snapshot().feedback;
  EXPECT_EQ(feedback_from_json(feedback_to_json(f)), f);
  const GoalEvent g{3.25, Vec3(1, 2, 0), "keyboard", "forward"};
  EXPECT_EQ(goal_event_from_json(goal_event_to_json(g)), g);
}

TEST(Wire, CommandCodec) {
  const TraceEvent e{5.0, "force", Json{{"side", "right"}, {"vector", {0.1, 0, 0}}}};
  const WireMessage m = encode_command(e, 9);
  EXPECT_FALSE(m.payload.contains("t"));
  const TraceEvent back = decode_command(m);
  EXPECT_EQ(back.type, "force");
  EXPECT_DOUBLE_EQ(back.t, 0.0);
  EXPECT_EQ(back.data, e.data);
  EXPECT_THROW(decode_command(WireMessage{MessageKind::Command, 1, Json{{"type", "warp"}}}), ConfigError);
  EXPECT_THROW(decode_command(WireMessage{MessageKind::Feedback, 1, Json{{"type", "laser"}}}), ConfigError);
}

TEST(Wire, MessageKindNames) {
  for (MessageKind k : {MessageKind::StateSnapshot, MessageKind::Command, MessageKind::Feedback, MessageKind::GoalEvent,
                        MessageKind::Error}) {
    EXPECT_EQ(message_kind_from_string(to_string(k)), k);
  }
  EXPECT_EQ(std::string(to_string(MessageKind::StateSnapshot)), "state_snapshot");
  EXPECT_THROW(message_kind_from_string("gossip"), ConfigError);
}

TEST(Wire, MalformedMessagesRejected) {
  EXPECT_THROW(parse_message("{"), ConfigError);
  EXPECT_THROW(parse_message("[]"), ConfigError);
  EXPECT_THROW(parse_message(R"({"kind": "command"})"), ConfigError);
  EXPECT_THROW(parse_message(R"({"kind": "command", "seq": -1, "payload": {}})"), ConfigError);
}

// ---- framing ---------------------------------------------------------------

TEST(Framing, LengthPrefixIsBigEndian) {
  const WireMessage m = make_error(1, "x");
  const std::string frame = encode_frame(m);
  const std::string body = message_text(m);
  ASSERT_EQ(frame.size(), body.size() + 4);
  const auto n = (static_cast<unsigned char>(frame[0]) << 24) | (static_cast<unsigned char>(frame[1]) << 16) |
                 (static_cast<unsigned char>(frame[2]) << 8) | static_cast<unsigned char>(frame[3]);
  EXPECT_EQ(static_cast<std::size_t>(n), body.size());
  EXPECT_EQ(frame.substr(4), body);
}

TEST(Framing, DecoderReassemblesSplitAndCoalescedFrames) {
  const std::string a = encode_frame(make_error(1, "first"));
  const std::string b = encode_frame(make_error(2, "second"));
  const std::string stream = a + b;
  FrameDecoder d;
  for (char c : stream.substr(0, a.size() - 1)) d.feed(std::string(1, c));
  EXPECT_FALSE(d.next().has_value());
  d.feed(stream.substr(a.size() - 1));
  const auto first = d.next();
  const auto second = d.next();
  ASSERT_TRUE(first && second);
  EXPECT_EQ(parse_message(*first).seq, 1u);
  EXPECT_EQ(parse_message(*second).seq, 2u);
  EXPECT_FALSE(d.next().has_value());
  EXPECT_EQ(d.buffered(), 0u);
}

TEST(Framing, OversizedLengthRejected) {
  FrameDecoder d;
  d.feed(std::string("\x7f\xff\xff\xff", 4));
  EXPECT_THROW(d.next(), ConfigError);
}

// ---- endpoint --------------------------------------------------------------

TEST(Endpoint, TruncatedPayloadYieldsErrorWithContinuousSequence) {
  Endpoint ep;
  EXPECT_EQ(ep.next_seq(), 1u);
  EXPECT_EQ(ep.next_seq(), 2u);
  const std::string good = command_text(10);
  const Endpoint::Inbound bad = ep.receive(good.substr(0, good.size() / 2));
  EXPECT_FALSE(bad.command.has_value());
  ASSERT_TRUE(bad.error.has_value());
  EXPECT_EQ(bad.error->kind, MessageKind::Error);
  EXPECT_EQ(bad.error->seq, 3u);
  EXPECT_EQ(ep.next_seq(), 4u);
  const Endpoint::Inbound ok = ep.receive(good);
  ASSERT_TRUE(ok.command.has_value());
  EXPECT_FALSE(ok.error.has_value());
}

TEST(Endpoint, InboundSequenceMustIncrease) {
  Endpoint ep;
  EXPECT_TRUE(ep.receive(command_text(5)).command.has_value());
  const auto replay = ep.receive(command_text(5));
  ASSERT_TRUE(replay.error.has_value());
  EXPECT_EQ(replay.error->payload["in_reply_to"], 5);
  EXPECT_TRUE(ep.receive(command_text(6)).command.has_value());
}

TEST(Endpoint, UnknownCommandTypeIsAnError) {
  Endpoint ep;
  const auto in = ep.receive(command_text(1, "teleport"));
  EXPECT_FALSE(in.command.has_value());
  ASSERT_TRUE(in.error.has_value());
}

// ---- queues ----------------------------------------------------------------

TEST(BoundedQueue, DropsOldestAtDepth) {
  BoundedQueue<int> q(kSnapshotQueueDepth);
  for (int i = 0; i < 8; ++i) EXPECT_FALSE(q.push(i));
  EXPECT_TRUE(q.push(8));
  EXPECT_TRUE(q.push(9));
  EXPECT_EQ(q.size(), 8u);
  EXPECT_EQ(q.dropped(), 2u);
  const auto items = q.drain();
  ASSERT_EQ(items.size(), 8u);
  EXPECT_EQ(items.front(), 2);
  EXPECT_EQ(items.back(), 9);
  EXPECT_FALSE(q.try_pop().has_value());
}

// ---- websocket -------------------------------------------------------------

TEST(WebSocket, AcceptKeyMatchesReferenceExample) {
  EXPECT_EQ(websocket_accept_key("dGhlIHNhbXBsZSBub25jZQ=="), "s3pPLMBiTxaQ9kYGzzhZRbK+xOo=");
}

TEST(WebSocket, MaskedClientFramesDecode) {
  WebSocketDecoder d;
  const std::string small = "hello";
  const std::string large(70000, 'x');
  d.feed(websocket_client_frame(small, 0x37fa213d) + websocket_client_frame(large, 0x01020304));
  EXPECT_EQ(d.next(), small);
  EXPECT_EQ(d.next(), large);
  EXPECT_FALSE(d.next().has_value());
  EXPECT_FALSE(d.closed());
  d.feed(std::string("\x88\x80\0\0\0\0", 6));
  d.next();
  EXPECT_TRUE(d.closed());
}

TEST(WebSocket, ServerFrameHeader) {
  const std::string f = websocket_text_frame("abc");
  ASSERT_EQ(f.size(), 5u);
  EXPECT_EQ(static_cast<unsigned char>(f[0]), 0x81);
  EXPECT_EQ(static_cast<unsigned char>(f[1]), 3);
  const std::string mid = websocket_text_frame(std::string(300, 'y'));
  EXPECT_EQ(static_cast<unsigned char>(mid[1]), 126);
}

// ---- live server -----------------------------------------------------------

TEST(Server, RawClientCommandsAndBroadcast) {
  TeleopServer server({"127.0.0.1", 0, 0.0, 30.0});
  const std::uint16_t port = server.start();
  ASSERT_NE(port, 0);
  Client c(port);
  ASSERT_TRUE(c.connected());
  c.send(encode_frame(encode_command({0.0, "laser", Json{{"on", true}}}, 1)));
  std::vector<TraceEvent> got;
  ASSERT_TRUE(wait_until([&] {
    for (auto& e : server.take_commands()) got.push_back(e);
    return !got.empty();
  }));
  EXPECT_EQ(got[0].type, "laser");
  EXPECT_EQ(server.client_count(), 1u);

  server.publish(MessageKind::Feedback, feedback_to_json(sample_snapshot().feedback));
  FrameDecoder d;
  d.feed(c.read_for(200));
  const auto body = d.next();
  ASSERT_TRUE(body.has_value());
  const WireMessage m = parse_message(*body);
  EXPECT_EQ(m.kind, MessageKind::Feedback);
  EXPECT_EQ(m.seq, server.last_seq());

  // A truncated body produces an error frame numbered after the broadcast.
  const std::string text = command_text(2);
  const std::string cut = text.substr(0, text.size() - 3);
  std::string frame;
  const std::uint32_t n = static_cast<std::uint32_t>(cut.size());
  frame += static_cast<char>((n >> 24) & 0xff);
  frame += static_cast<char>((n >> 16) & 0xff);
  frame += static_cast<char>((n >> 8) & 0xff);
  frame += static_cast<char>(n & 0xff);
  c.send(frame + cut);
  FrameDecoder e;
  e.feed(c.read_for(300));
  const auto err = e.next();
  ASSERT_TRUE(err.has_value());
  const WireMessage em = parse_message(*err);
  EXPECT_EQ(em.kind, MessageKind::Error);
  EXPECT_EQ(em.seq, m.seq + 1);
  server.stop();
}

TEST(Server, WebSocketHandshakeAndTextFrames) {
  TeleopServer server({"127.0.0.1", 0, 0.0, 30.0});
  const std::uint16_t port = server.start();
  Client c(port);
  ASSERT_TRUE(c.connected());
  c.send(
      "GET / HTTP/1.1\r\nHost: localhost\r\nUpgrade: websocket\r\nConnection: Upgrade\r\n"
      "Sec-WebSocket-Key: dGhlIHNhbXBsZSBub25jZQ==\r\nSec-WebSocket-Version: 13\r\n\r\n");
  const std::string reply = c.read_for(200);
  EXPECT_EQ(reply.rfind("HTTP/1.1 101", 0), 0u);
  EXPECT_NE(reply.find("s3pPLMBiTxaQ9kYGzzhZRbK+xOo="), std::string::npos);

  c.send(websocket_client_frame(command_text(1, "gripper"), 0xdeadbeef));
  std::vector<TraceEvent> got;
  ASSERT_TRUE(wait_until([&] {
    for (auto& e : server.take_commands()) got.push_back(e);
    return !got.empty();
  }));
  EXPECT_EQ(got[0].type, "gripper");

  server.publish(MessageKind::GoalEvent, goal_event_to_json({1.0, Vec3(1, 0, 0), "dwell", ""}));
  const std::string frame = c.read_for(200);
  ASSERT_GE(frame.size(), 2u);
  EXPECT_EQ(static_cast<unsigned char>(frame[0]), 0x81);
  const std::size_t header = static_cast<unsigned char>(frame[1]) < 126 ? 2 : 4;
  const WireMessage m = parse_message(frame.substr(header));
  EXPECT_EQ(m.kind, MessageKind::GoalEvent);
  server.stop();
}

TEST(Server, SlowClientQueueStaysBounded) {
  TeleopServer server({"127.0.0.1", 0, 0.0, 30.0});
  const std::uint16_t port = server.start();
  Client c(port);
  c.send(encode_frame(encode_command({0.0, "laser", Json{{"on", true}}}, 1)));
  ASSERT_TRUE(wait_until([&] { return !server.take_commands().empty(); }));
  const Json big = snapshot_to_json(sample_snapshot());
  for (int i = 0; i < 20000; ++i) server.publish(MessageKind::StateSnapshot, big);
  EXPECT_EQ(server.last_seq(), 20000u);
  // Whatever was delivered arrives in increasing sequence order.
  FrameDecoder d;
  d.feed(c.read_for(300));
  std::uint64_t last = 0;
  while (auto body = d.next()) {
    const auto seq = parse_message(*body).seq;
    EXPECT_GT(seq, last);
    last = seq;
  }
  server.stop();
}

TEST(Server, ServeMissionPublishesSnapshots) {
  const std::filesystem::path root = TPO_SOURCE_DIR;
  Scenario s = load_scenario(root / "scenarios" / "minimal.json");
  Mission mission(s, bt::load_tree(s.tree), {});
  ServerOptions opts{"127.0.0.1", 0, 0.0, 30.0};
  TeleopServer server(opts);
  server.start();
  std::atomic<bool> stop{false};
  serve_mission(mission, server, opts, stop);
  EXPECT_TRUE(mission.done());
  EXPECT_EQ(mission.steps(), 100u);
  // a snapshot and a feedback message per 1/30 s of simulated time, plus the final state
  EXPECT_GE(server.last_seq(), 2u * 31u);
  EXPECT_LE(server.last_seq(), 2u * 32u);
  server.stop();
}
