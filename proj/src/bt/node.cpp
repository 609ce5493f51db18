#include "tpo/bt/node.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>

#include <Eigen/Geometry>

namespace tpo::bt {

namespace {

constexpr std::pair<NodeKind, const char*> kKindNames[] = {
    {NodeKind::Sequence, "sequence"},
    {NodeKind::Fallback, "fallback"},
    {NodeKind::Parallel, "parallel"},
    {NodeKind::ReactiveSequence, "reactive_sequence"},
    {NodeKind::Condition, "condition"},
    {NodeKind::Action, "action"},
    {NodeKind::InfiniteLoop, "infinite_loop"},
};

AxisMode axis_mode(const std::string& text) {
  if (text == "Set") return AxisMode::Set;
  if (text == "Keep") return AxisMode::Keep;
  if (text == "None") return AxisMode::None;
  throw ParseError("invalid axis mode '" + text + "' (expected Set, Keep or None)");
}

}  // namespace

const char* to_string(NodeKind kind) {
  for (const auto& [k, n] : kKindNames)
    if (k == kind) return n;
  return "?";
}

const char* to_string(Status status) {
  switch (status) {
    case Status::Success:
      return "success";
    case Status::Failure:
      return "failure";
    case Status::Running:
      return "running";
  }
  return "?";
}

std::optional<NodeKind> kind_from_string(const std::string& token) {
  for (const auto& [k, n] : kKindNames)
    if (token == n) return k;
  return std::nullopt;
}

double parse_number(const std::string& text) {
  if (text.empty()) throw ParseError("expected a number, got an empty value");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || errno == ERANGE || !std::isfinite(v))
    throw ParseError("malformed number '" + text + "'");
  return v;
}

std::vector<double> parse_vector(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t semi = text.find(';', start);
    const std::string part = text.substr(start, semi == std::string::npos ? std::string::npos : semi - start);
    try {
      out.push_back(parse_number(part));
    } catch (const ParseError&) {
      throw ParseError("malformed vector '" + text + "'");
    }
    if (semi == std::string::npos) break;
    start = semi + 1;
  }
  return out;
}

void Params::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  entries_.emplace_back(key, value);
}

bool Params::has(const std::string& key) const { return find(key).has_value(); }

const std::string& Params::raw(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return v;
  throw LookupError("missing parameter '" + key + "'");
}

std::optional<std::string> Params::find(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return v;
  return std::nullopt;
}

double Params::number(const std::string& key) const { return parse_number(raw(key)); }

double Params::number_or(const std::string& key, double fallback) const {
  const auto v = find(key);
  return v ? parse_number(*v) : fallback;
}

std::vector<double> Params::vector(const std::string& key) const { return parse_vector(raw(key)); }

Vec3 Params::vec3(const std::string& key) const {
  const auto v = vector(key);
  if (v.size() != 3) throw ParseError("parameter '" + key + "' must have 3 components");
  return Vec3(v[0], v[1], v[2]);
}

Vec3 Params::vec3_or(const std::string& key, const Vec3& fallback) const {
  return has(key) ? vec3(key) : fallback;
}

std::string Params::text_or(const std::string& key, const std::string& fallback) const {
  return find(key).value_or(fallback);
}

void BtNode::validate() const {
  const std::string label = std::string(to_string(kind)) + (name.empty() ? "" : " " + name);
  if (is_leaf()) {
    if (!children.empty()) throw ParseError(label + ": leaves cannot have children");
    if (leaf_id.empty()) throw ParseError(label + ": missing leaf id");
  } else {
    if (children.empty()) throw ParseError(label + ": control node needs at least one child");
    if (!leaf_id.empty()) throw ParseError(label + ": control nodes take no leaf id");
  }
  if (kind == NodeKind::InfiniteLoop && children.size() != 1)
    throw ParseError(label + ": infinite_loop takes exactly one child");
  if (kind == NodeKind::Parallel) {
    if (threshold < 1 || threshold > static_cast<int>(children.size()))
      throw ParseError(label + ": parallel M=" + std::to_string(threshold) + " out of range 1.." +
                       std::to_string(children.size()));
  } else if (threshold != 0) {
    throw ParseError(label + ": only parallel nodes take a threshold");
  }
  if (!post_on_success.empty() && post_on_success.find('=') == std::string::npos)
    throw ParseError(label + ": _onSuccess must be 'key = value'");
  for (const auto& c : children) c.validate();
}

std::size_t BtNode::size() const {
  std::size_t n = 1;
  for (const auto& c : children) n += c.size();
  return n;
}

ActionParams ActionParams::from(const Params& params) {
  ActionParams out;
  if (const auto m = params.find("command_mode")) {
    if (*m == "Track") {
      out.command_mode = CommandMode::Track;
    } else if (*m == "Reach") {
      out.command_mode = CommandMode::Reach;
    } else {
      throw ParseError("invalid command_mode '" + *m + "' (expected Track or Reach)");
    }
  }
  if (const auto m = params.find("linear_mode")) out.linear_mode = axis_mode(*m);
  if (const auto m = params.find("angular_mode")) out.angular_mode = axis_mode(*m);
  out.goal_frame = params.text_or("goal_frame", out.goal_frame);
  out.final_goal_distance = params.vec3_or("final_goal_distance", out.final_goal_distance);
  if (params.has("final_ref_orientation")) {
    const auto v = params.vector("final_ref_orientation");
    if (v.size() == 3) {
      out.final_ref_orientation = Vec3(v[0], v[1], v[2]);
    } else if (v.size() == 4) {
      // x;y;z;w quaternion
      const Eigen::Quaterniond q(v[3], v[0], v[1], v[2]);
      if (q.norm() < 1e-9) throw ParseError("final_ref_orientation quaternion has zero norm");
      const Mat3 r = q.normalized().toRotationMatrix();
      out.final_ref_orientation = Vec3(std::atan2(r(2, 1), r(2, 2)), std::asin(std::clamp(-r(2, 0), -1.0, 1.0)),
                                       std::atan2(r(1, 0), r(0, 0)));
    } else {
      throw ParseError("final_ref_orientation needs 3 (rpy) or 4 (quaternion) components");
    }
  }
  out.linear_error_norm = params.number_or("linear_error_norm", out.linear_error_norm);
  out.angular_error_norm = params.number_or("angular_error_norm", out.angular_error_norm);
  return out;
}

void ActionParams::validate() const {
  if (linear_mode == AxisMode::None && angular_mode == AxisMode::None)
    throw ConfigError("linear_mode and angular_mode cannot both be None");
  if (linear_mode == AxisMode::Set && !(linear_error_norm > 0.0))
    throw ConfigError("linear_error_norm must be positive when linear_mode is Set");
  if (angular_mode == AxisMode::Set && !(angular_error_norm > 0.0))
    throw ConfigError("angular_error_norm must be positive when angular_mode is Set");
}

}  // namespace tpo::bt
