#include "tpo/control/motion_generation.hpp"

#include <cmath>
#include <optional>

namespace tpo::control {

AdmittanceParams AdmittanceParams::uniform(std::size_t n, double m, double k, double d, const VecX& q_eq,
                                           double dt) {
  const auto sz = static_cast<Eigen::Index>(n);
  return {VecX::Constant(sz, m), VecX::Constant(sz, k), VecX::Constant(sz, d), q_eq, dt};
}

void AdmittanceParams::validate(std::size_t n) const {
  const auto sz = static_cast<Eigen::Index>(n);
  if (mass.size() != sz || stiffness.size() != sz || damping.size() != sz || q_eq.size() != sz) {
    throw ConfigError("admittance parameters do not match the chain dimension");
  }
  if (!(mass.array() > 0.0).all()) throw ConfigError("admittance mass must be strictly positive");
  if ((stiffness.array() < 0.0).any() || (damping.array() < 0.0).any()) {
    throw ConfigError("admittance stiffness and damping must be non-negative");
  }
  if (!(dt > 0.0)) throw ConfigError("admittance dt must be positive");
}

VecX joint_torques(const kin::ChainModel& model, const kin::JointState& state,
                   std::span<const VirtualForce> forces, BlockingLink blocking) {
  std::vector<std::size_t> link_of;
  link_of.reserve(forces.size());
  for (const auto& f : forces) {
    if (f.control_point.chain != model.name) {
      throw Error("virtual force on chain '" + f.control_point.chain + "' applied to chain '" + model.name + "'");
    }
    link_of.push_back(model.link_index(f.control_point.link));
  }

  VecX tau = VecX::Zero(static_cast<Eigen::Index>(model.dof()));
  for (std::size_t i = 0; i < forces.size(); ++i) {
    const auto jac = kin::point_jacobian(model, state, forces[i].control_point.link, forces[i].control_point.local_point);
    VecX contribution = jac.matrix.transpose() * forces[i].vector;
    if (blocking == BlockingLink::On) {
      std::optional<std::size_t> ancestor;
      for (std::size_t k = 0; k < forces.size(); ++k) {
        if (link_of[k] < link_of[i] && (!ancestor || link_of[k] > *ancestor)) ancestor = link_of[k];
      }
      if (ancestor) contribution.head(static_cast<Eigen::Index>(*ancestor + 1)).setZero();
    }
    tau += contribution;
  }
  return tau;
}

PosturalReference admittance_step(const VecX& q, const VecX& tau, const AdmittanceParams& params,
                                  const PosturalReference& prev) {
  const VecX qdd = (params.stiffness.cwiseProduct(params.q_eq - q) - params.damping.cwiseProduct(prev.qd_ref) + tau)
                       .cwiseQuotient(params.mass);
  PosturalReference next;
  next.qd_ref = prev.qd_ref + qdd * params.dt;
  next.q_ref = prev.q_ref + next.qd_ref * params.dt;
  return next;
}

PosturalReference postural_step(const kin::ChainModel& model, const kin::JointState& state,
                                std::span<const VirtualForce> forces, const AdmittanceParams& params,
                                BlockingLink blocking, const PosturalReference& prev) {
  params.validate(model.dof());
  const VecX tau = joint_torques(model, state, forces, blocking);
  PosturalReference next = admittance_step(state.q, tau, params, prev);
  next.q_ref = kin::clamp_to_limits(model, next.q_ref);
  return next;
}

Vec3 cartesian_ref(const Vec3& force, const CartesianGain& gain) {
  return gain.diagonal.cwiseProduct(force);
}

Vec3 mirror_force(const Vec3& f, const Vec3& normal) {
  return f - 2.0 * f.dot(normal) * normal;
}

}  // namespace tpo::control
