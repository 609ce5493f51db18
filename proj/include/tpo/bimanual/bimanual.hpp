#pragma once

#include <vector>

#include "tpo/common/types.hpp"

namespace tpo::bimanual {

struct MassEstimate {
  double m_bar = 0.0;
  std::size_t samples_used = 0;
  double g = kGravity;
};

/// Vertical lifting force carried by each end-effector, N.
struct LiftSample {
  double f_zl = 0.0;
  double f_zr = 0.0;
};

struct GraspSpec {
  double mu_s = 0.6;
  double k_margin = 1.4;
  double f_bar = 0.0;
  double f_initial = 45.0;

  void validate() const;
};

/// Per end-effector forces in the object frame.
struct EEForce {
  Vec3 left = Vec3::Zero();
  Vec3 right = Vec3::Zero();
};

struct CoopParams {
  Vec3 damping = Vec3::Constant(2500.0);  // diagonal of D
  Vec3 stiffness = Vec3::Constant(200.0);  // diagonal of K
  Mat3 r_b = Mat3::Identity();             // world <- object
  Vec3 p_offset_t0 = Vec3::Zero();         // right EE relative to left at grasp time

  void validate() const;
};

struct CoopVelocity {
  Vec3 left = Vec3::Zero();
  Vec3 right = Vec3::Zero();
};

MassEstimate estimate_mass(const std::vector<LiftSample>& samples, double g = kGravity);

/// f = k m g / (2 mu).
double grasp_force(double m_bar, double mu_s, double k_margin, double g = kGravity);

/// Replaces the squeezing (y) component by +f_bar on the left and -f_bar on the right.
EEForce desired_forces(const EEForce& sensed, double f_bar);

CoopVelocity coop_step(const Vec3& xdot_cmd, const EEForce& sensed, const EEForce& desired,
                       const Vec3& p_left, const Vec3& p_right, const CoopParams& params);

/// Object frame from the two contact points: y from right to left contact, x the
/// world x axis made orthogonal to y (world z if degenerate), z = x cross y.
Mat3 object_frame(const Vec3& p_left, const Vec3& p_right);

}  // namespace tpo::bimanual
