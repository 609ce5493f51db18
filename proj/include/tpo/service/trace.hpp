#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace tpo::service {

/// One timestamped operator input. `type` is one of
///   request          {"value": "tracking" | "grasp" | "open" | "none" | ...}
///   emitter          {"position": [x,y,z], "target": [x,y,z]}   laser aim keyframe
///   laser            {"on": bool}
///   tracker          {"side": "left"|"right", "position": [x,y,z]}  wrist in the tracker origin
///   reset_reference  {"side": ...}
///   force            {"side": ..., "vector": [x,y,z]}  direct virtual force, [0,0,0] releases
///   toggle           {"side": ..., "on": bool}          teleoperation activation
///   gripper          {"action": "open" | "close"}
///   control_point    {"side": ..., "link": name}
///   object_velocity  {"linear": [x,y,z], "yaw_rate": r}
/// Extra fields are ignored.
struct TraceEvent {
  double t = 0.0;
  std::string type;
  nlohmann::json data;

  bool operator==(const TraceEvent&) const = default;
};

bool is_known_event_type(const std::string& type);

struct OperatorTrace {
  std::vector<TraceEvent> events;

  /// Throws ConfigError when timestamps decrease or an event type is unknown.
  void validate() const;
};

/// One JSON object per line with "t" and "type"; the remaining fields form `data`.
/// Blank lines and lines starting with '#' are skipped.
OperatorTrace parse_trace(std::istream& in, const std::string& origin = "trace");
OperatorTrace load_trace(const std::filesystem::path& path);
std::string format_trace(const OperatorTrace& trace);

nlohmann::json event_to_json(const TraceEvent& e);
TraceEvent event_from_json(const nlohmann::json& j);

/// Hands out events in time order as the clock advances.
class TraceCursor {
 public:
  explicit TraceCursor(const OperatorTrace& trace) : trace_(&trace) {}
  /// Events with t <= now not handed out before.
  std::vector<TraceEvent> due(double now);
  bool exhausted() const { return next_ >= trace_->events.size(); }

 private:
  const OperatorTrace* trace_;
  std::size_t next_ = 0;
};

}  // namespace tpo::service
