#include "tpo/service/wire.hpp"

#include "tpo/service/scenario.hpp"

namespace tpo::service {

namespace {

Json vecx_json(const VecX& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

VecX vecx_of(const Json& j) {
  if (!j.is_array()) throw ConfigError("expected an array");
  VecX v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

Json pair_json(const SidePair& p) { return Json{{"left", p.left}, {"right", p.right}}; }
SidePair pair_of(const Json& j) { return {j.at("left").get<double>(), j.at("right").get<double>()}; }

template <typename F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed ") + what + ": " + e.what());
  }
}

}  // namespace

const char* to_string(MessageKind kind) {
  switch (kind) {
    case MessageKind::StateSnapshot: return "state_snapshot";
    case MessageKind::Command: return "command";
    case MessageKind::Feedback: return "feedback";
    case MessageKind::GoalEvent: return "goal_event";
    case MessageKind::Error: return "error";
  }
  return "?";
}

MessageKind message_kind_from_string(const std::string& name) {
  for (MessageKind k : {MessageKind::StateSnapshot, MessageKind::Command, MessageKind::Feedback,
                        MessageKind::GoalEvent, MessageKind::Error})
    if (name == to_string(k)) return k;
  throw ConfigError("unknown message kind '" + name + "'");
}

Json feedback_to_json(const FeedbackFrame& f) {
  Json j{{"forearm_squeeze", pair_json(f.forearm_squeeze)}, {"finger_squeeze", pair_json(f.finger_squeeze)}};
  j["vibration"] = f.vibration ? Json{{"target", f.vibration->target}, {"pattern", to_string(f.vibration->pattern)}}
                               : Json(nullptr);
  return j;
}

FeedbackFrame feedback_from_json(const Json& j) {
  return guarded("feedback", [&] {
    FeedbackFrame f;
    f.forearm_squeeze = pair_of(j.at("forearm_squeeze"));
    f.finger_squeeze = pair_of(j.at("finger_squeeze"));
    if (auto v = j.find("vibration"); v != j.end() && !v->is_null()) {
      const std::string pattern = v->at("pattern").get<std::string>();
      if (pattern != "single" && pattern != "double") throw ConfigError("unknown vibration pattern '" + pattern + "'");
      f.vibration = Vibration{v->at("target").get<std::string>(),
                              pattern == "single" ? VibrationPattern::Single : VibrationPattern::Double};
    }
    return f;
  });
}

Json goal_event_to_json(const GoalEvent& g) {
  return Json{{"t", g.t}, {"position", vec3_to_json(g.position)}, {"source", g.source}, {"command", g.command}};
}

GoalEvent goal_event_from_json(const Json& j) {
  return guarded("goal event", [&] {
    return GoalEvent{j.at("t").get<double>(), vec3_from_json(j.at("position")), j.at("source").get<std::string>(),
                     j.value("command", std::string())};
  });
}

Json snapshot_to_json(const Snapshot& s) {
  Json objects = Json::array();
  for (const ObjectView& o : s.objects)
    objects.push_back({{"name", o.name}, {"position", vec3_to_json(o.position)}, {"yaw", o.yaw}, {"grasped", o.grasped}});
  return Json{
      {"step", s.step},
      {"t", s.t},
      {"mode", s.mode},
      {"base", {s.base.x, s.base.y, s.base.yaw}},
      {"pelvis_z", s.pelvis_z},
      {"q", {{"left", vecx_json(s.q_left)}, {"right", vecx_json(s.q_right)}}},
      {"head_pitch", s.head_pitch},
      {"gripper", s.gripper},
      {"ee", {{"left", vec3_to_json(s.ee_left)}, {"right", vec3_to_json(s.ee_right)}}},
      {"objects", objects},
      {"vtr", {{"beta", vec3_to_json(s.beta)}, {"w", vec3_to_json(s.w)}}},
      {"f_cp", {{"left", vec3_to_json(s.f_cp_left)}, {"right", vec3_to_json(s.f_cp_right)}}},
      {"sensed", {{"left", vec3_to_json(s.sensed_left)}, {"right", vec3_to_json(s.sensed_right)}}},
      {"f_bar", s.f_bar},
      {"bt", {{"labels", s.bt_labels}, {"status", s.bt_status}}},
      {"active", s.active},
      {"control_point", s.control_point},
      {"phase", s.phase},
      {"spot", s.spot ? vec3_to_json(*s.spot) : Json(nullptr)},
      {"goal", s.goal ? vec3_to_json(*s.goal) : Json(nullptr)},
      {"feedback", feedback_to_json(s.feedback)},
  };
}

Snapshot snapshot_from_json(const Json& j) {
  return guarded("snapshot", [&] {
    Snapshot s;
    s.step = j.at("step").get<std::uint64_t>();
    s.t = j.at("t").get<double>();
    s.mode = j.at("mode").get<std::string>();
    const Vec3 b = vec3_from_json(j.at("base"));
    s.base = {b.x(), b.y(), b.z()};
    s.pelvis_z = j.at("pelvis_z").get<double>();
    s.q_left = vecx_of(j.at("q").at("left"));
    s.q_right = vecx_of(j.at("q").at("right"));
    s.head_pitch = j.at("head_pitch").get<double>();
    s.gripper = j.at("gripper").get<double>();
    s.ee_left = vec3_from_json(j.at("ee").at("left"));
    s.ee_right = vec3_from_json(j.at("ee").at("right"));
    for (const Json& o : j.at("objects"))
      s.objects.push_back({o.at("name").get<std::string>(), vec3_from_json(o.at("position")), o.at("yaw").get<double>(),
                           o.at("grasped").get<bool>()});
    s.beta = vec3_from_json(j.at("vtr").at("beta"));
    s.w = vec3_from_json(j.at("vtr").at("w"));
    s.f_cp_left = vec3_from_json(j.at("f_cp").at("left"));
    s.f_cp_right = vec3_from_json(j.at("f_cp").at("right"));
    s.sensed_left = vec3_from_json(j.at("sensed").at("left"));
    s.sensed_right = vec3_from_json(j.at("sensed").at("right"));
    s.f_bar = j.at("f_bar").get<double>();
    s.bt_labels = j.at("bt").at("labels").get<std::vector<std::string>>();
    s.bt_status = j.at("bt").at("status").get<std::string>();
    s.active = j.at("active").get<std::string>();
    s.control_point = j.at("control_point").get<std::string>();
    s.phase = j.at("phase").get<std::string>();
    if (!j.at("spot").is_null()) s.spot = vec3_from_json(j.at("spot"));
    if (!j.at("goal").is_null()) s.goal = vec3_from_json(j.at("goal"));
    s.feedback = feedback_from_json(j.at("feedback"));
    return s;
  });
}

WireMessage encode_snapshot(const Snapshot& s, std::uint64_t seq) {
  return WireMessage{MessageKind::StateSnapshot, seq, snapshot_to_json(s)};
}

Snapshot decode_snapshot(const WireMessage& m) {
  if (m.kind != MessageKind::StateSnapshot) throw ConfigError("not a state_snapshot message");
  return snapshot_from_json(m.payload);
}

WireMessage encode_command(const TraceEvent& e, std::uint64_t seq) {
  Json payload = event_to_json(e);
  payload.erase("t");
  return WireMessage{MessageKind::Command, seq, payload};
}

TraceEvent decode_command(const WireMessage& m) {
  if (m.kind != MessageKind::Command) throw ConfigError("expected a command message");
  if (!m.payload.is_object()) throw ConfigError("command payload must be an object");
  auto type = m.payload.find("type");
  if (type == m.payload.end() || !type->is_string()) throw ConfigError("command needs a string 'type'");
  TraceEvent e;
  e.type = type->get<std::string>();
  if (!is_known_event_type(e.type)) throw ConfigError("unknown command type '" + e.type + "'");
  e.data = m.payload;
  e.data.erase("type");
  e.data.erase("t");
  return e;
}

WireMessage make_error(std::uint64_t seq, const std::string& message, std::optional<std::uint64_t> in_reply_to) {
  Json payload{{"message", message}};
  payload["in_reply_to"] = in_reply_to ? Json(*in_reply_to) : Json(nullptr);
  return WireMessage{MessageKind::Error, seq, payload};
}

std::string message_text(const WireMessage& m) {
  return Json{{"kind", to_string(m.kind)}, {"seq", m.seq}, {"payload", m.payload}}.dump();
}

std::string encode_frame(const WireMessage& m) {
  const std::string body = message_text(m);
  if (body.size() > kMaxFrameBytes) throw ConfigError("frame exceeds the size limit");
  const auto n = static_cast<std::uint32_t>(body.size());
  std::string out;
  out.reserve(4 + body.size());
  out.push_back(static_cast<char>((n >> 24) & 0xff));
  out.push_back(static_cast<char>((n >> 16) & 0xff));
  out.push_back(static_cast<char>((n >> 8) & 0xff));
  out.push_back(static_cast<char>(n & 0xff));
  return out + body;
}

WireMessage parse_message(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed message: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("message must be a JSON object");
  auto kind = j.find("kind");
  auto seq = j.find("seq");
  if (kind == j.end() || !kind->is_string()) throw ConfigError("message needs a string 'kind'");
  if (seq == j.end() || !seq->is_number_unsigned()) throw ConfigError("message needs a non-negative integer 'seq'");
  WireMessage m;
  m.kind = message_kind_from_string(kind->get<std::string>());
  m.seq = seq->get<std::uint64_t>();
  if (auto p = j.find("payload"); p != j.end()) m.payload = *p;
  return m;
}

void FrameDecoder::feed(const std::string& bytes) { buffer_ += bytes; }

std::optional<std::string> FrameDecoder::next() {
  if (buffer_.size() < 4) return std::nullopt;
  const auto byte = [&](std::size_t i) { return static_cast<std::uint32_t>(static_cast<unsigned char>(buffer_[i])); };
  const std::uint32_t n = (byte(0) << 24) | (byte(1) << 16) | (byte(2) << 8) | byte(3);
  if (n > kMaxFrameBytes) {
    buffer_.clear();
    throw ConfigError("frame length " + std::to_string(n) + " exceeds the limit");
  }
  if (buffer_.size() < 4 + static_cast<std::size_t>(n)) return std::nullopt;
  std::string body = buffer_.substr(4, n);
  buffer_.erase(0, 4 + static_cast<std::size_t>(n));
  return body;
}

Endpoint::Inbound Endpoint::receive(const std::string& text) {
  Inbound in;
  std::optional<std::uint64_t> seq;
  try {
    const WireMessage m = parse_message(text);
    seq = m.seq;
    if (last_in_ && m.seq <= *last_in_)
      throw ConfigError("sequence " + std::to_string(m.seq) + " is not above " + std::to_string(*last_in_));
    last_in_ = m.seq;
    in.command = decode_command(m);
  } catch (const Error& e) {
    in.error = make_error(next_seq(), e.what(), seq);
  } catch (const nlohmann::json::exception& e) {
    in.error = make_error(next_seq(), e.what(), seq);
  }
  return in;
}

}  // namespace tpo::service
