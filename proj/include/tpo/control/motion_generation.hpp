#pragma once

#include <span>

#include "tpo/control/virtual_force.hpp"
#include "tpo/kinematics/kinematics.hpp"

namespace tpo::control {

/// Joint-space mass-spring-damper used to turn torques into joint references.
/// M, K, D are diagonal and stored as their diagonals.
struct AdmittanceParams {
  VecX mass;
  VecX stiffness;
  VecX damping;
  VecX q_eq;
  double dt = 0.01;

  static AdmittanceParams uniform(std::size_t n, double m, double k, double d, const VecX& q_eq, double dt = 0.01);
  /// Throws ConfigError unless sizes equal `n`, M > 0, K, D >= 0, dt > 0.
  void validate(std::size_t n) const;
};

struct PosturalReference {
  VecX q_ref;
  VecX qd_ref;
};

enum class BlockingLink { Off, On };

/// Diagonal Cartesian gain (m/s per N).
struct CartesianGain {
  Vec3 diagonal = Vec3::Constant(0.1);
};

/// Sum of J_cp^T f_cp over all forces on `model`. With blocking on, a force
/// at B contributes nothing to joints at or before the link of the nearest
/// ancestor control point A that also carries a force.
VecX joint_torques(const kin::ChainModel& model, const kin::JointState& state,
                   std::span<const VirtualForce> forces, BlockingLink blocking);

/// One semi-implicit Euler step of
///   qdd = M^-1 (K (q_eq - q) - D qd_ref_prev + tau)
/// velocity first, then position; q_ref is clamped to the joint limits.
PosturalReference postural_step(const kin::ChainModel& model, const kin::JointState& state,
                                std::span<const VirtualForce> forces, const AdmittanceParams& params,
                                BlockingLink blocking, const PosturalReference& prev);

/// Same integration for an externally computed torque vector.
PosturalReference admittance_step(const VecX& q, const VecX& tau, const AdmittanceParams& params,
                                  const PosturalReference& prev);

Vec3 cartesian_ref(const Vec3& force, const CartesianGain& gain);

/// Reflection of `f` across the plane through the origin with unit `normal`.
Vec3 mirror_force(const Vec3& f, const Vec3& normal);

}  // namespace tpo::control
