#include "tpo/bt/conditions.hpp"

#include <cmath>
#include <vector>

namespace tpo::bt {

namespace {

const std::set<std::string> kConditions = {"is_goal_in_arm_range", "is_goal_in_front", "user_requesting",
                                           "goal_available", "blackboard_true"};

Status status_of(bool b) { return b ? Status::Success : Status::Failure; }

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

Vec3 goal_in_base(const Vec3& goal_world, const BaseState& base) {
  const double dx = goal_world.x() - base.pose.x;
  const double dy = goal_world.y() - base.pose.y;
  const double c = std::cos(base.pose.yaw), s = std::sin(base.pose.yaw);
  return Vec3(c * dx + s * dy, -s * dx + c * dy, goal_world.z() - base.height);
}

bool goal_in_arm_range(const Vec3& goal_base, const ArmRange& range, const std::string& axes) {
  if (axes != "xy" && axes != "xyz") throw ConfigError("arm range axes must be 'xy' or 'xyz', got '" + axes + "'");
  const int n = axes == "xy" ? 2 : 3;
  for (int i = 0; i < n; ++i)
    if (goal_base[i] < range.min[i] || goal_base[i] > range.max[i]) return false;
  return true;
}

bool goal_in_front(const Vec3& goal_world, const PlanarPose& base, double offset, double yaw_error) {
  const double bearing = std::atan2(goal_world.y() - base.y, goal_world.x() - base.x);
  return std::abs(wrap_angle(bearing - base.yaw - offset)) <= yaw_error;
}

StandardEnvironment::StandardEnvironment(std::function<BaseState()> base_state, ArmRange range,
                                         std::set<std::string> actions)
    : base_state_(std::move(base_state)), range_(range), actions_(std::move(actions)) {}

bool StandardEnvironment::knows_condition(const std::string& id) const { return kConditions.count(id) != 0; }

Status StandardEnvironment::evaluate_condition(const BtNode& leaf, Blackboard& bb) {
  const Params& p = leaf.params;
  const std::string& id = leaf.leaf_id;
  const std::string goal_key = p.text_or("goal_frame", "goal");

  if (id == "user_requesting") {
    if (const auto pending = bb.text(kPendingRequestKey)) {
      std::vector<std::string> flags;
      for (const auto& [key, value] : bb.values())
        if (ends_with(key, "_requested")) flags.push_back(key);
      for (const auto& key : flags) bb.set(key, false);
      if (*pending != "none") bb.set(*pending + "_requested", true);
      bb.erase(kPendingRequestKey);
    }
    if (const auto req = p.find("request")) return status_of(bb.truthy(*req + "_requested"));
    for (const auto& [key, value] : bb.values())
      if (ends_with(key, "_requested") && bb.truthy(key)) return Status::Success;
    return Status::Failure;
  }
  if (id == "blackboard_true") return status_of(bb.truthy(p.raw("key")));
  if (id == "goal_available") return status_of(bb.vec3(goal_key).has_value());

  const auto goal = bb.vec3(goal_key);
  if (!goal) return Status::Failure;
  const BaseState base = base_state_();
  if (id == "is_goal_in_arm_range") {
    ArmRange r = range_;
    r.min = p.vec3_or("box_min", r.min);
    r.max = p.vec3_or("box_max", r.max);
    return status_of(goal_in_arm_range(goal_in_base(*goal, base), r, p.text_or("axes", "xyz")));
  }
  if (id == "is_goal_in_front")
    return status_of(goal_in_front(*goal, base.pose, p.number_or("offset", 0.0), p.number_or("yaw_error", 0.1)));
  throw LookupError("unknown condition '" + id + "'");
}

}  // namespace tpo::bt
