#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "tpo/bt/blackboard.hpp"
#include "tpo/bt/tree.hpp"
#include "tpo/sim/world.hpp"

namespace tpo::sim {

struct PidGains {
  Vec3 kp = Vec3::Ones();
  Vec3 ki = Vec3::Zero();
  Vec3 kd = Vec3::Zero();
};

/// Per-axis PID with the output clamped by norm.
class Pid3 {
 public:
  Pid3(PidGains gains, double max_output);
  Vec3 update(const Vec3& error, double dt);
  void reset();

 private:
  PidGains gains_;
  double max_;
  Vec3 integral_ = Vec3::Zero();
  std::optional<Vec3> previous_;
};

struct ControllerGoal {
  bt::ActionParams params;
  PidGains gains;
  double max_linear = 0.3;   // m/s
  double max_angular = 0.5;  // rad/s
  PidGains angular_gains;

  void validate() const;
};

struct CartesianRef {
  Vec3 linear = Vec3::Zero();
  std::optional<double> yaw_rate;
  double linear_error = 0.0;
  double angular_error = 0.0;
  /// Every commanded sub-task is within its error norm.
  bool converged = false;
};

/// Cartesian velocity reference toward `goal ⊕ final_goal_distance`, with the
/// offset expressed in a frame rotated by `frame_yaw`. Track re-reads the goal
/// each update, Reach latches it on the first update, Keep servoes the pose
/// held at the first update and None commands nothing on that sub-task.
/// Angular Set turns the control point so it faces the goal, less the
/// reference yaw.
class CartesianPid {
 public:
  explicit CartesianPid(ControllerGoal goal);

  CartesianRef update(const Vec3& goal, const Vec3& control_point, double yaw, double frame_yaw, double dt);
  const ControllerGoal& goal() const { return goal_; }
  bool started() const { return started_; }

 private:
  ControllerGoal goal_;
  Pid3 linear_;
  Pid3 angular_;
  bool started_ = false;
  Vec3 latched_goal_ = Vec3::Zero();
  Vec3 latched_point_ = Vec3::Zero();
  double latched_yaw_ = 0.0;
};

/// Single-shot helper: the first update of a fresh controller.
CartesianRef pid_cartesian_ref(const ControllerGoal& goal, const Vec3& goal_position, const Vec3& control_point,
                               double dt);

struct ModuleGains {
  PidGains linear;
  PidGains angular;
  double max_linear = 0.3;
  double max_angular = 0.5;
};

/// Shipped tuned gains for each module.
std::map<std::string, ModuleGains> default_module_gains();

/// Action modules exposed to trees.
const std::set<std::string>& action_modules();

/// Runs the action modules requested by a tree and turns them into world commands.
/// Modules: gaze_tracking, base_yaw_tracking, base_planar_tracking,
/// squat_tracking, arm_tracking (param arm = left|right), gripper_open,
/// gripper_close. Goals resolve from the blackboard first, then from robot
/// links. An unresolvable goal ends the action with failure.
class ActionController {
 public:
  explicit ActionController(std::map<std::string, ModuleGains> gains = default_module_gains());

  /// Drains `channel`, posts terminal replies and returns the commands for this step.
  Commands update(bt::ActionChannel& channel, const bt::Blackboard& bb, const World& world);

  /// Modules with an active controller (a finished gaze stays active).
  std::set<std::string> active_modules() const;
  bool arm_active(Side side) const;
  void clear() { active_.clear(); }

 private:
  struct Active {
    std::uint64_t token = 0;
    std::string module;
    bt::Params raw;
    CartesianPid pid;
    Side side = Side::Right;
    bool finished = false;
  };

  std::optional<Vec3> resolve(const std::string& frame, const bt::Blackboard& bb, const World& world) const;
  ControllerGoal make_goal(const std::string& module, const bt::Params& params) const;

  std::map<std::string, ModuleGains> gains_;
  std::map<std::string, Active> active_;  // keyed by module (and arm side)
};

}  // namespace tpo::sim
