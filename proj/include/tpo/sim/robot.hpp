#pragma once

#include <optional>
#include <string>

#include "tpo/kinematics/kinematics.hpp"

namespace tpo::sim {

enum class Side { Left, Right };

const char* to_string(Side side);
/// "left" or "right"; throws ConfigError otherwise.
Side side_from_string(const std::string& text);

struct RobotConfig {
  kin::ChainModel left_arm;   // rooted in the pelvis frame
  kin::ChainModel right_arm;  // rooted in the pelvis frame
  VecX home_left;
  VecX home_right;
  double pelvis_home = 0.9;
  double squat_min = 0.6;
  double squat_max = 1.1;
  double squat_vel = 0.2;
  double planar_vel = 0.6;
  double yaw_vel = 1.0;
  Vec3 camera_offset = Vec3(0.2, 0.0, 0.6);  // pelvis frame
  double pitch_min = -1.2;
  double pitch_max = 0.6;
  double pitch_vel = 1.5;
  double gripper_speed = 2.0;  // closure fraction per second

  /// Two 4-DOF arms (shoulder yaw, shoulder pitch, elbow, wrist) with
  /// 0.35 / 0.30 / 0.12 m links on a 0.9 m pelvis.
  static RobotConfig standard();
  void validate() const;
};

struct RobotState {
  PlanarPose base;
  double pelvis_z = 0.9;
  VecX q_left;
  VecX q_right;
  double head_pitch = 0.0;
  double gripper = 0.0;  // 0 open, 1 closed
};

class RobotModel {
 public:
  explicit RobotModel(RobotConfig config);

  const RobotConfig& config() const { return config_; }
  const kin::ChainModel& arm(Side side) const { return side == Side::Left ? config_.left_arm : config_.right_arm; }
  /// Arm with the mobile base prepended; rooted in the world frame.
  const kin::ChainModel& full(Side side) const { return side == Side::Left ? full_left_ : full_right_; }

  RobotState home_state() const;

  const VecX& arm_q(const RobotState& s, Side side) const { return side == Side::Left ? s.q_left : s.q_right; }
  VecX full_q(const RobotState& s, Side side) const;

  Vec3 ee_position(const RobotState& s, Side side) const;
  /// Rotation of the end-effector link in the world frame.
  Mat3 ee_rotation(const RobotState& s, Side side) const;
  /// World-frame linear Jacobian of the end-effector over the arm joints only.
  Mat3X arm_jacobian(const RobotState& s, Side side) const;

  kin::RigidTransform pelvis_frame(const RobotState& s) const;
  Vec3 camera_position(const RobotState& s) const;

  /// "left_ee", "right_ee", "pelvis" or "camera".
  std::optional<Vec3> link_position(const RobotState& s, const std::string& name) const;

 private:
  RobotConfig config_;
  kin::ChainModel full_left_;
  kin::ChainModel full_right_;
};

/// Camera pitch that puts `goal` on the optical axis in the vertical plane,
/// clamped to the pitch limits. Negative pitch looks down.
double gaze_ref(const RobotModel& model, const RobotState& state, const Vec3& goal);

}  // namespace tpo::sim
