#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tpo/bimanual/bimanual.hpp"
#include "tpo/sim/robot.hpp"

namespace tpo::sim {

struct ObjectState {
  std::string name;
  Vec3 position = Vec3::Zero();  // box center
  double yaw = 0.0;
  Vec3 half_extents = Vec3::Constant(0.1);
  double mass = 1.0;
  double support_z = 0.0;  // center height when resting
  bool grasped = false;
};

/// Per-step command set. Base twist is (vx, vy) in the base frame plus yaw rate.
struct Commands {
  VecX qd_left;
  VecX qd_right;
  Vec3 base_twist = Vec3::Zero();
  double squat_rate = 0.0;
  double head_rate = 0.0;
  std::optional<double> gripper_target;
};

/// Two-handed hold of one object with antipodal contacts at the end-effectors.
struct BimanualHold {
  bool active = false;
  bool lifted = false;
  bool slipped = false;
  int object = -1;
  double width = 0.0;  // object size between the contacts
  Vec3 offset = Vec3::Zero();  // object center in the grasp frame
  double yaw_offset = 0.0;
};

struct WorldState {
  double clock = 0.0;
  RobotState robot;
  std::vector<ObjectState> objects;
  kin::RigidTransform emitter;
  bool laser_on = false;
  BimanualHold hold;
  int gripper_object = -1;  // object carried by the right gripper
  Vec3 gripper_offset = Vec3::Zero();
  bimanual::EEForce sensed;  // object frame
  double normal_force = 0.0;
  int slip_count = 0;
};

enum class GraspResult { Holds, Slips };

/// Coulomb hold: mu (f_Nl + f_Nr) >= m g.
GraspResult grasp_check(double mass, double f_nl, double f_nr, double mu_s, double g = kGravity);

struct WorldConfig {
  double dt = 0.01;
  double contact_stiffness = 5e4;  // N/m, normal force per metre of squeeze
  double mu_s = 0.6;
  double force_noise = 0.1;  // N, per axis
  double gripper_reach = 0.1;  // m, attach distance for the single gripper
  std::uint64_t seed = 1;
};

class World {
 public:
  World(RobotModel model, WorldConfig config, WorldState initial);

  const RobotModel& model() const { return model_; }
  const WorldConfig& config() const { return config_; }
  const WorldState& state() const { return state_; }
  WorldState& mutable_state() { return state_; }

  /// Explicit Euler step of length config.dt with velocity and joint limit clamping.
  void step(const Commands& commands);

  /// Starts a two-handed hold of `object` with contacts at the current
  /// end-effector positions. Throws Error if the index is invalid.
  void begin_hold(int object);
  void end_hold();

  /// Separation of the two end-effectors.
  double contact_separation() const;

  /// Forces the object exerts on each end-effector in the object frame,
  /// with Gaussian noise. Advances the noise generator.
  bimanual::EEForce sense_forces();

 private:
  void update_hold();
  void update_gripper(double previous);

  RobotModel model_;
  WorldConfig config_;
  WorldState state_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> noise_{0.0, 1.0};
};

}  // namespace tpo::sim
