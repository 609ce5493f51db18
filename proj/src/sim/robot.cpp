#include "tpo/sim/robot.hpp"

#include <algorithm>
#include <cmath>

namespace tpo::sim {

namespace {

kin::ChainModel make_arm(const std::string& prefix, double y) {
  using kin::Joint;
  using kin::JointKind;
  using kin::RigidTransform;
  kin::ChainModel arm;
  arm.name = prefix + "_arm";
  arm.base_mount = RigidTransform::from_translation(Vec3(0.05, y, 0.35));
  arm.joints = {
      Joint{prefix + "_shoulder_yaw", prefix + "_shoulder", JointKind::Revolute, Vec3::UnitZ(), {}, -1.5, 1.5, 1.5},
      Joint{prefix + "_shoulder_pitch", prefix + "_upper_arm", JointKind::Revolute, Vec3::UnitY(), {}, -1.5, 1.6, 1.5},
      Joint{prefix + "_elbow", prefix + "_forearm", JointKind::Revolute, Vec3::UnitY(),
            RigidTransform::from_translation(Vec3(0.35, 0, 0)), -2.6, 0.0, 1.5},
      Joint{prefix + "_wrist", prefix + "_ee", JointKind::Revolute, Vec3::UnitY(),
            RigidTransform::from_translation(Vec3(0.30, 0, 0)), -1.5, 1.5, 1.5},
  };
  arm.tip = Vec3(0.12, 0, 0);
  return arm;
}

}  // namespace

const char* to_string(Side side) { return side == Side::Left ? "left" : "right"; }

Side side_from_string(const std::string& text) {
  if (text == "left") return Side::Left;
  if (text == "right") return Side::Right;
  throw ConfigError("side must be 'left' or 'right', got '" + text + "'");
}

RobotConfig RobotConfig::standard() {
  RobotConfig c;
  c.left_arm = make_arm("left", 0.2);
  c.right_arm = make_arm("right", -0.2);
  c.home_left = Eigen::Vector4d(0.0, 1.0, -1.9, 0.9);
  c.home_right = c.home_left;
  return c;
}

void RobotConfig::validate() const {
  left_arm.validate();
  right_arm.validate();
  if (static_cast<std::size_t>(home_left.size()) != left_arm.dof() ||
      static_cast<std::size_t>(home_right.size()) != right_arm.dof())
    throw ConfigError("home configuration size does not match the arm");
  if (!(squat_min < squat_max) || pelvis_home < squat_min || pelvis_home > squat_max)
    throw ConfigError("pelvis home height must lie inside the squat range");
  if (!(pitch_min < pitch_max)) throw ConfigError("camera pitch limits are inverted");
  if (!(planar_vel > 0 && yaw_vel > 0 && squat_vel > 0 && pitch_vel > 0 && gripper_speed > 0))
    throw ConfigError("robot velocity limits must be positive");
}

RobotModel::RobotModel(RobotConfig config) : config_(std::move(config)) {
  config_.validate();
  full_left_ = kin::with_mobile_base(config_.left_arm, config_.squat_min, config_.squat_max, config_.planar_vel,
                                     config_.yaw_vel, config_.squat_vel);
  full_right_ = kin::with_mobile_base(config_.right_arm, config_.squat_min, config_.squat_max, config_.planar_vel,
                                      config_.yaw_vel, config_.squat_vel);
}

RobotState RobotModel::home_state() const {
  RobotState s;
  s.pelvis_z = config_.pelvis_home;
  s.q_left = config_.home_left;
  s.q_right = config_.home_right;
  return s;
}

VecX RobotModel::full_q(const RobotState& s, Side side) const {
  const VecX& q = arm_q(s, side);
  VecX out(static_cast<Eigen::Index>(kin::kBaseJointCount) + q.size());
  out << s.base.x, s.base.y, s.base.yaw, s.pelvis_z, q;
  return out;
}

Vec3 RobotModel::ee_position(const RobotState& s, Side side) const {
  return kin::tip_position(full(side), full_q(s, side));
}

Mat3 RobotModel::ee_rotation(const RobotState& s, Side side) const {
  return kin::link_transforms(full(side), full_q(s, side)).back().rotation;
}

Mat3X RobotModel::arm_jacobian(const RobotState& s, Side side) const {
  const auto& chain = full(side);
  const kin::JointState js{full_q(s, side), VecX::Zero(static_cast<Eigen::Index>(chain.dof()))};
  const auto j = kin::point_jacobian(chain, js, chain.tip_link(), chain.tip);
  return j.matrix.rightCols(static_cast<Eigen::Index>(arm(side).dof()));
}

kin::RigidTransform RobotModel::pelvis_frame(const RobotState& s) const {
  return kin::RigidTransform::from_rpy(0.0, 0.0, s.base.yaw, Vec3(s.base.x, s.base.y, s.pelvis_z));
}

Vec3 RobotModel::camera_position(const RobotState& s) const { return pelvis_frame(s).apply(config_.camera_offset); }

std::optional<Vec3> RobotModel::link_position(const RobotState& s, const std::string& name) const {
  if (name == "left_ee") return ee_position(s, Side::Left);
  if (name == "right_ee") return ee_position(s, Side::Right);
  if (name == "pelvis") return Vec3(s.base.x, s.base.y, s.pelvis_z);
  if (name == "camera") return camera_position(s);
  return std::nullopt;
}

double gaze_ref(const RobotModel& model, const RobotState& state, const Vec3& goal) {
  const Vec3 cam = model.camera_position(state);
  const Vec3 heading(std::cos(state.base.yaw), std::sin(state.base.yaw), 0.0);
  const double forward = (goal - cam).dot(heading);
  const double pitch = std::atan2(goal.z() - cam.z(), forward);
  return std::clamp(pitch, model.config().pitch_min, model.config().pitch_max);
}

}  // namespace tpo::sim
