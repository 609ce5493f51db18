#pragma once

#include <string>
#include <vector>

#include "tpo/common/types.hpp"
#include "tpo/kinematics/rigid_transform.hpp"

namespace tpo::kin {

enum class JointKind { Revolute, Prismatic };

/// One actuated joint. Joint i moves link i; links are named by `link`.
struct Joint {
  std::string name;
  std::string link;
  JointKind kind = JointKind::Revolute;
  Vec3 axis = Vec3::UnitZ();
  RigidTransform origin;  // parent link frame -> joint frame at q = 0
  double min = -kPi;
  double max = kPi;
  double vel_limit = 1.0;
};

/// Serial chain rooted at `base_mount` (expressed in the chain's base frame).
struct ChainModel {
  std::string name;
  RigidTransform base_mount;
  std::vector<Joint> joints;
  /// Tool point on the last link, used when a caller asks for "the tip".
  Vec3 tip = Vec3::Zero();

  std::size_t dof() const { return joints.size(); }
  /// Index of the joint that moves `link`; throws LookupError for unknown links.
  std::size_t link_index(const std::string& link) const;
  bool has_link(const std::string& link) const;
  const std::string& tip_link() const { return joints.back().link; }

  VecX lower_limits() const;
  VecX upper_limits() const;
  VecX velocity_limits() const;

  /// Throws ConfigError when N < 1, an axis is not unit-norm within 1e-9,
  /// limits are inverted, or link names collide.
  void validate() const;
};

struct JointState {
  VecX q;
  VecX qd;

  static JointState zeros(std::size_t n) { return {VecX::Zero(n), VecX::Zero(n)}; }
};

/// Clamps q into [min, max] per joint.
VecX clamp_to_limits(const ChainModel& model, const VecX& q);

/// Prepends the planar base (x, y prismatic, yaw revolute) and the vertical
/// squat prismatic joint to `arm`. The result is rooted in the world frame and
/// its first four coordinates are (x, y, yaw, pelvis height).
ChainModel with_mobile_base(const ChainModel& arm, double squat_min, double squat_max,
                            double planar_vel_limit = 1.0, double yaw_vel_limit = 1.0,
                            double squat_vel_limit = 0.2);

inline constexpr std::size_t kBaseJointCount = 4;

}  // namespace tpo::kin
