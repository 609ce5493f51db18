#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tpo/service/feedback.hpp"
#include "tpo/service/trace.hpp"

namespace tpo::service {

using Json = nlohmann::json;

enum class MessageKind { StateSnapshot, Command, Feedback, GoalEvent, Error };

const char* to_string(MessageKind kind);
/// Throws ConfigError for unknown names.
MessageKind message_kind_from_string(const std::string& name);

/// Frame body: {"kind": ..., "seq": n, "payload": {...}}.
struct WireMessage {
  MessageKind kind = MessageKind::StateSnapshot;
  std::uint64_t seq = 0;
  Json payload = Json::object();

  bool operator==(const WireMessage&) const = default;
};

struct ObjectView {
  std::string name;
  Vec3 position = Vec3::Zero();
  double yaw = 0.0;
  bool grasped = false;

  bool operator==(const ObjectView&) const = default;
};

/// Everything a client needs to draw one simulation step.
struct Snapshot {
  std::uint64_t step = 0;
  double t = 0.0;
  std::string mode;
  PlanarPose base;
  double pelvis_z = 0.0;
  VecX q_left;
  VecX q_right;
  double head_pitch = 0.0;
  double gripper = 0.0;
  Vec3 ee_left = Vec3::Zero();
  Vec3 ee_right = Vec3::Zero();
  std::vector<ObjectView> objects;
  Vec3 beta = Vec3::Zero();
  Vec3 w = Vec3::Ones();
  Vec3 f_cp_left = Vec3::Zero();
  Vec3 f_cp_right = Vec3::Zero();
  Vec3 sensed_left = Vec3::Zero();
  Vec3 sensed_right = Vec3::Zero();
  double f_bar = 0.0;
  std::vector<std::string> bt_labels;
  std::string bt_status;
  std::string active;
  std::string control_point;
  std::string phase;
  std::optional<Vec3> spot;
  std::optional<Vec3> goal;
  FeedbackFrame feedback;

  bool operator==(const Snapshot&) const = default;
};

struct GoalEvent {
  double t = 0.0;
  Vec3 position = Vec3::Zero();
  std::string source;  // "dwell" or "keyboard"
  std::string command;  // keyboard command id, empty for dwell goals

  bool operator==(const GoalEvent&) const = default;
};

Json snapshot_to_json(const Snapshot& s);
/// Throws ConfigError on missing or mistyped fields; unknown fields are ignored.
Snapshot snapshot_from_json(const Json& j);

Json feedback_to_json(const FeedbackFrame& f);
FeedbackFrame feedback_from_json(const Json& j);

Json goal_event_to_json(const GoalEvent& g);
GoalEvent goal_event_from_json(const Json& j);

WireMessage encode_snapshot(const Snapshot& s, std::uint64_t seq);
Snapshot decode_snapshot(const WireMessage& m);

/// A command payload is a trace event without "t": {"type": ..., fields...}.
WireMessage encode_command(const TraceEvent& e, std::uint64_t seq);
/// The event time is set by the receiver; here it is 0. Throws ConfigError
/// for a wrong kind, a missing or unknown type.
TraceEvent decode_command(const WireMessage& m);

WireMessage make_error(std::uint64_t seq, const std::string& message, std::optional<std::uint64_t> in_reply_to = {});

/// Frame: 4-byte big-endian body length followed by the JSON text.
inline constexpr std::size_t kMaxFrameBytes = 1u << 20;
std::string encode_frame(const WireMessage& m);
std::string message_text(const WireMessage& m);
/// Throws ConfigError when the text is not a valid message.
WireMessage parse_message(const std::string& text);

/// Incremental frame splitter for a byte stream.
class FrameDecoder {
 public:
  void feed(const std::string& bytes);
  /// Next complete body, if any. Throws ConfigError for an oversized length.
  std::optional<std::string> next();
  std::size_t buffered() const { return buffer_.size(); }

 private:
  std::string buffer_;
};

/// Per-direction sequence numbering plus the protocol rule for inbound text:
/// a valid command is returned, anything else yields an error message that
/// keeps the outbound sequence continuous.
class Endpoint {
 public:
  std::uint64_t next_seq() { return ++seq_; }
  std::uint64_t last_seq() const { return seq_; }

  struct Inbound {
    std::optional<TraceEvent> command;
    std::optional<WireMessage> error;
  };
  Inbound receive(const std::string& text);

 private:
  std::uint64_t seq_ = 0;
  std::optional<std::uint64_t> last_in_;
};

}  // namespace tpo::service
