#pragma once

#include <functional>
#include <set>
#include <string>

#include "tpo/bt/tree.hpp"

namespace tpo::bt {

inline const std::string kPendingRequestKey = "pending_request";

/// Planar pose plus pelvis height above the floor.
struct BaseState {
  PlanarPose pose;
  double height = 0.0;
};

/// Reachable box for the arm in the pelvis frame (x forward, y left, z up).
struct ArmRange {
  Vec3 min = Vec3(0.3, -0.5, -0.6);
  Vec3 max = Vec3(0.8, 0.5, 0.3);
};

/// Goal expressed in the pelvis frame.
Vec3 goal_in_base(const Vec3& goal_world, const BaseState& base);

/// `axes` is "xy" or "xyz"; boundaries count as inside.
bool goal_in_arm_range(const Vec3& goal_base, const ArmRange& range, const std::string& axes = "xyz");

/// |wrap(bearing(goal) - yaw(base) - offset)| <= yaw_error.
bool goal_in_front(const Vec3& goal_world, const PlanarPose& base, double offset, double yaw_error);

/// Condition library used by the shipped trees:
///   is_goal_in_arm_range(axes, box_min, box_max, goal_frame)
///   is_goal_in_front(offset, yaw_error, goal_frame)
///   user_requesting(request)   consumes `pending_request` (sets `<name>_requested`, clears the
///                              others; "none" clears all), then succeeds if `<request>_requested`
///                              is set, or any *_requested key when `request` is absent
///   goal_available(goal_frame)
///   blackboard_true(key)
/// Goals are 3-vectors on the blackboard under `goal_frame` (default "goal").
class StandardEnvironment : public Environment {
 public:
  StandardEnvironment(std::function<BaseState()> base_state, ArmRange range, std::set<std::string> actions);

  bool knows_condition(const std::string& id) const override;
  bool knows_action(const std::string& id) const override { return actions_.count(id) != 0; }
  Status evaluate_condition(const BtNode& leaf, Blackboard& bb) override;

  const ArmRange& arm_range() const { return range_; }

 private:
  std::function<BaseState()> base_state_;
  ArmRange range_;
  std::set<std::string> actions_;
};

}  // namespace tpo::bt
