#include "tpo/service/trace.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "tpo/common/types.hpp"

namespace tpo::service {

bool is_known_event_type(const std::string& type) {
  static const std::set<std::string> types{"request", "emitter",         "laser",  "tracker",       "reset_reference",
                                           "force",   "toggle",          "gripper", "control_point", "object_velocity"};
  return types.count(type) != 0;
}

void OperatorTrace::validate() const {
  double last = -std::numeric_limits<double>::infinity();
  for (const TraceEvent& e : events) {
    if (!std::isfinite(e.t) || e.t < last) throw ConfigError("trace timestamps must be finite and non-decreasing");
    if (!is_known_event_type(e.type)) throw ConfigError("unknown trace event type '" + e.type + "'");
    last = e.t;
  }
}

nlohmann::json event_to_json(const TraceEvent& e) {
  nlohmann::json j = e.data.is_object() ? e.data : nlohmann::json::object();
  j["t"] = e.t;
  j["type"] = e.type;
  return j;
}

TraceEvent event_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("trace event must be a JSON object");
  TraceEvent e;
  auto t = j.find("t");
  auto type = j.find("type");
  if (t == j.end() || !t->is_number()) throw ConfigError("trace event needs a numeric 't'");
  if (type == j.end() || !type->is_string()) throw ConfigError("trace event needs a string 'type'");
  e.t = t->get<double>();
  e.type = type->get<std::string>();
  e.data = j;
  e.data.erase("t");
  e.data.erase("type");
  return e;
}

OperatorTrace parse_trace(std::istream& in, const std::string& origin) {
  OperatorTrace trace;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    try {
      trace.events.push_back(event_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw ConfigError(origin + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  try {
    trace.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return trace;
}

OperatorTrace load_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trace file '" + path.string() + "'");
  return parse_trace(in, path.string());
}

std::string format_trace(const OperatorTrace& trace) {
  std::string out;
  for (const TraceEvent& e : trace.events) out += event_to_json(e).dump() + "\n";
  return out;
}

std::vector<TraceEvent> TraceCursor::due(double now) {
  std::vector<TraceEvent> out;
  while (next_ < trace_->events.size() && trace_->events[next_].t <= now + 1e-9) out.push_back(trace_->events[next_++]);
  return out;
}

}  // namespace tpo::service
