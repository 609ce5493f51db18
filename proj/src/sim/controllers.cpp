#include "tpo/sim/controllers.hpp"

#include <algorithm>
#include <cmath>

namespace tpo::sim {

namespace {

Vec3 clamp_norm(const Vec3& v, double max) {
  const double n = v.norm();
  return n > max ? Vec3(v * (max / n)) : v;
}

Vec3 rotate_yaw(const Vec3& v, double yaw) {
  const double c = std::cos(yaw), s = std::sin(yaw);
  return Vec3(c * v.x() - s * v.y(), s * v.x() + c * v.y(), v.z());
}

Vec3 flat(const Vec3& v) { return Vec3(v.x(), v.y(), 0.0); }

PidGains uniform(double kp, double ki = 0.0, double kd = 0.0) {
  return PidGains{Vec3::Constant(kp), Vec3::Constant(ki), Vec3::Constant(kd)};
}

std::string active_key(const std::string& module, Side side) {
  return module == "arm_tracking" ? module + ":" + to_string(side) : module;
}

}  // namespace

Pid3::Pid3(PidGains gains, double max_output) : gains_(std::move(gains)), max_(max_output) {
  if (!(max_ > 0.0)) throw ConfigError("PID output limit must be positive");
}

Vec3 Pid3::update(const Vec3& error, double dt) {
  if (!(dt > 0.0)) throw ConfigError("PID dt must be positive");
  integral_ += error * dt;
  const Vec3 derivative = previous_ ? Vec3((error - *previous_) / dt) : Vec3::Zero();
  previous_ = error;
  const Vec3 out = gains_.kp.cwiseProduct(error) + gains_.ki.cwiseProduct(integral_) + gains_.kd.cwiseProduct(derivative);
  return clamp_norm(out, max_);
}

void Pid3::reset() {
  integral_.setZero();
  previous_.reset();
}

void ControllerGoal::validate() const {
  params.validate();
  if (!(max_linear > 0.0) || !(max_angular > 0.0)) throw ConfigError("controller limits must be positive");
}

CartesianPid::CartesianPid(ControllerGoal goal)
    : goal_((goal.validate(), std::move(goal))),
      linear_(goal_.gains, goal_.max_linear),
      angular_(goal_.angular_gains, goal_.max_angular) {}

CartesianRef CartesianPid::update(const Vec3& goal, const Vec3& control_point, double yaw, double frame_yaw,
                                  double dt) {
  const bt::ActionParams& p = goal_.params;
  const Vec3 target = goal + rotate_yaw(p.final_goal_distance, frame_yaw);
  if (!started_) {
    started_ = true;
    latched_goal_ = target;
    latched_point_ = control_point;
    latched_yaw_ = yaw;
  }
  const Vec3 effective = p.command_mode == bt::CommandMode::Reach ? latched_goal_ : target;

  CartesianRef ref;
  bool ok = true;
  if (p.linear_mode != bt::AxisMode::None) {
    const Vec3 error = (p.linear_mode == bt::AxisMode::Set ? effective : latched_point_) - control_point;
    ref.linear = linear_.update(error, dt);
    ref.linear_error = error.norm();
    ok = ok && ref.linear_error <= p.linear_error_norm;
  }
  if (p.angular_mode != bt::AxisMode::None) {
    double desired = latched_yaw_;
    if (p.angular_mode == bt::AxisMode::Set) {
      const Vec3 d = effective - control_point;
      desired = std::atan2(d.y(), d.x()) - p.final_ref_orientation.z();
    }
    const double error = wrap_angle(desired - yaw);
    ref.yaw_rate = angular_.update(Vec3(0.0, 0.0, error), dt).z();
    ref.angular_error = std::abs(error);
    ok = ok && ref.angular_error <= p.angular_error_norm;
  }
  ref.converged = ok;
  return ref;
}

CartesianRef pid_cartesian_ref(const ControllerGoal& goal, const Vec3& goal_position, const Vec3& control_point,
                               double dt) {
  CartesianPid pid(goal);
  return pid.update(goal_position, control_point, 0.0, 0.0, dt);
}

std::map<std::string, ModuleGains> default_module_gains() {
  std::map<std::string, ModuleGains> g;
  g["gaze_tracking"] = {uniform(4.0), uniform(4.0), 1.5, 1.5};
  g["base_yaw_tracking"] = {uniform(1.0), uniform(1.5), 0.5, 0.8};
  g["base_planar_tracking"] = {uniform(1.2), uniform(1.5), 0.5, 0.8};
  g["squat_tracking"] = {uniform(1.5), uniform(1.0), 0.2, 0.5};
  g["arm_tracking"] = {uniform(2.0), uniform(1.0), 0.3, 0.5};
  return g;
}

const std::set<std::string>& action_modules() {
  static const std::set<std::string> modules{"gaze_tracking", "base_yaw_tracking", "base_planar_tracking",
                                             "squat_tracking", "arm_tracking", "gripper_open", "gripper_close"};
  return modules;
}

ActionController::ActionController(std::map<std::string, ModuleGains> gains) : gains_(std::move(gains)) {}

std::optional<Vec3> ActionController::resolve(const std::string& frame, const bt::Blackboard& bb,
                                              const World& world) const {
  if (auto v = bb.vec3(frame)) return v;
  return world.model().link_position(world.state().robot, frame);
}

ControllerGoal ActionController::make_goal(const std::string& module, const bt::Params& params) const {
  ControllerGoal goal;
  goal.params = bt::ActionParams::from(params);
  if (module == "base_yaw_tracking") {
    if (!params.has("linear_mode")) goal.params.linear_mode = bt::AxisMode::None;
    if (!params.has("angular_mode")) goal.params.angular_mode = bt::AxisMode::Set;
  } else if (module == "squat_tracking" || module == "gaze_tracking") {
    goal.params.linear_mode = bt::AxisMode::Set;
    goal.params.angular_mode = bt::AxisMode::None;
    goal.params.final_goal_distance = Vec3::Zero();
  }
  auto it = gains_.find(module);
  if (it != gains_.end()) {
    goal.gains = it->second.linear;
    goal.angular_gains = it->second.angular;
    goal.max_linear = it->second.max_linear;
    goal.max_angular = it->second.max_angular;
  }
  goal.validate();
  return goal;
}

Commands ActionController::update(bt::ActionChannel& channel, const bt::Blackboard& bb, const World& world) {
  for (const bt::ActionRequest& r : channel.drain()) {
    if (r.type == bt::ActionRequest::Type::Abort) {
      for (auto it = active_.begin(); it != active_.end();) {
        it = it->second.token == r.token ? active_.erase(it) : std::next(it);
      }
      continue;
    }
    try {
      const Side side = side_from_string(r.params.text_or("arm", "right"));
      ControllerGoal goal = make_goal(r.module, r.params);
      const std::string key = active_key(r.module, side);
      active_.erase(key);
      active_.emplace(key, Active{r.token, r.module, r.params, CartesianPid(std::move(goal)), side, false});
    } catch (const Error&) {
      channel.reply(r.token, bt::Status::Failure);
    }
  }

  const WorldState& ws = world.state();
  const RobotState& rs = ws.robot;
  const RobotModel& model = world.model();
  const double dt = world.config().dt;
  Commands cmd;

  for (auto it = active_.begin(); it != active_.end();) {
    Active& a = it->second;
    bool remove = false;
    std::optional<bt::Status> result;

    if (a.module == "gripper_close" || a.module == "gripper_open") {
      const double target = a.module == "gripper_close" ? 1.0 : 0.0;
      cmd.gripper_target = target;
      if (std::abs(rs.gripper - target) < 1e-9) {
        result = bt::Status::Success;
        remove = true;
      }
    } else {
      const std::string& frame = a.pid.goal().params.goal_frame;
      // Robot-link goals are relative moves: read once, then latched by Reach.
      std::optional<Vec3> goal = resolve(frame, bb, world);
      if (!goal) {
        result = bt::Status::Failure;
        remove = true;
      } else if (a.module == "gaze_tracking") {
        const double error = gaze_ref(model, rs, *goal) - rs.head_pitch;
        cmd.head_rate = a.pid.update(Vec3(0, 0, error), Vec3::Zero(), 0.0, 0.0, dt).linear.z();
        if (!a.finished) {
          a.finished = true;
          result = bt::Status::Success;
        }
      } else if (a.module == "base_yaw_tracking" || a.module == "base_planar_tracking") {
        const Vec3 cp(rs.base.x, rs.base.y, 0.0);
        const CartesianRef ref = a.pid.update(flat(*goal), cp, rs.base.yaw, rs.base.yaw, dt);
        const Vec3 body = rotate_yaw(flat(ref.linear), -rs.base.yaw);
        cmd.base_twist.x() += body.x();
        cmd.base_twist.y() += body.y();
        if (ref.yaw_rate) cmd.base_twist.z() += *ref.yaw_rate;
        if (ref.converged) {
          result = bt::Status::Success;
          remove = true;
        }
      } else if (a.module == "squat_tracking") {
        const RobotConfig& rc = model.config();
        const double wanted = goal->z() + bt::ActionParams::from(a.raw).final_goal_distance.z();
        const double target = std::clamp(wanted, rc.squat_min, rc.squat_max);
        const CartesianRef ref = a.pid.update(Vec3(0, 0, target), Vec3(0, 0, rs.pelvis_z), 0.0, 0.0, dt);
        cmd.squat_rate = ref.linear.z();
        if (ref.converged) {
          result = target == wanted ? bt::Status::Success : bt::Status::Failure;
          remove = true;
        }
      } else if (a.module == "arm_tracking") {
        const Vec3 ee = model.ee_position(rs, a.side);
        const CartesianRef ref = a.pid.update(*goal, ee, rs.base.yaw, rs.base.yaw, dt);
        const VecX qd = kin::dls_solve(model.arm_jacobian(rs, a.side), ref.linear, kin::kDefaultDamping);
        (a.side == Side::Left ? cmd.qd_left : cmd.qd_right) = qd;
        if (ref.converged) {
          result = bt::Status::Success;
          remove = true;
        }
      }
    }

    if (result) channel.reply(a.token, *result);
    it = remove ? active_.erase(it) : std::next(it);
  }
  return cmd;
}

std::set<std::string> ActionController::active_modules() const {
  std::set<std::string> out;
  for (const auto& [key, a] : active_) out.insert(a.module);
  return out;
}

bool ActionController::arm_active(Side side) const { return active_.count(active_key("arm_tracking", side)) != 0; }

}  // namespace tpo::sim
