#pragma once

#include <map>
#include <string>
#include <vector>

#include "tpo/kinematics/chain_model.hpp"

namespace tpo::kin {

/// Linear Jacobian of a point rigidly attached to `link`.
struct PointJacobian {
  Mat3X matrix;
  std::string link;
  Vec3 local_point = Vec3::Zero();
};

/// A Cartesian velocity request for a point on the chain.
struct CartesianTask {
  std::string link;
  Vec3 local_point = Vec3::Zero();
  Vec3 desired_velocity = Vec3::Zero();
};

inline constexpr double kDefaultDamping = 0.05;

/// Link frames in the chain's base frame, ordered like `model.joints`.
std::vector<RigidTransform> link_transforms(const ChainModel& model, const VecX& q);

/// Link name -> frame in the chain's base frame.
std::map<std::string, RigidTransform> forward_kinematics(const ChainModel& model, const JointState& state);

Vec3 point_position(const ChainModel& model, const VecX& q, const std::string& link, const Vec3& local_point);
Vec3 tip_position(const ChainModel& model, const VecX& q);

PointJacobian point_jacobian(const ChainModel& model, const JointState& state, const std::string& link,
                             const Vec3& local_point);

/// Damped least squares: J^T (J J^T + lambda^2 I)^-1 xdot. With lambda = 0 and
/// a rank-deficient J J^T this throws SingularityError.
VecX dls_solve(const MatX& jacobian, const VecX& xdot, double lambda);

/// One differential IK step for `task`, clamped per joint to vel_limit.
VecX dls_ik_step(const ChainModel& model, const JointState& state, const CartesianTask& task,
                 double lambda = kDefaultDamping);

}  // namespace tpo::kin
