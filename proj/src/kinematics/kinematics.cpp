#include "tpo/kinematics/kinematics.hpp"

#include <algorithm>
#include <cmath>

namespace tpo::kin {
namespace {

void check_dimension(const ChainModel& model, const VecX& q) {
  if (static_cast<std::size_t>(q.size()) != model.dof()) {
    throw DimensionError("chain '" + model.name + "' expects " + std::to_string(model.dof()) +
                         " coordinates, got " + std::to_string(q.size()));
  }
}

RigidTransform joint_motion(const Joint& joint, double q) {
  if (joint.kind == JointKind::Revolute) {
    return RigidTransform::from_axis_angle(joint.axis, q);
  }
  return RigidTransform::from_translation(joint.axis * q);
}

}  // namespace

std::vector<RigidTransform> link_transforms(const ChainModel& model, const VecX& q) {
  check_dimension(model, q);
  std::vector<RigidTransform> frames;
  frames.reserve(model.dof());
  RigidTransform current = model.base_mount;
  for (std::size_t i = 0; i < model.dof(); ++i) {
    current = current * model.joints[i].origin * joint_motion(model.joints[i], q[i]);
    frames.push_back(current);
  }
  return frames;
}

std::map<std::string, RigidTransform> forward_kinematics(const ChainModel& model, const JointState& state) {
  const auto frames = link_transforms(model, state.q);
  std::map<std::string, RigidTransform> out;
  for (std::size_t i = 0; i < frames.size(); ++i) out.emplace(model.joints[i].link, frames[i]);
  return out;
}

Vec3 point_position(const ChainModel& model, const VecX& q, const std::string& link, const Vec3& local_point) {
  const std::size_t idx = model.link_index(link);
  return link_transforms(model, q)[idx].apply(local_point);
}

Vec3 tip_position(const ChainModel& model, const VecX& q) {
  return point_position(model, q, model.tip_link(), model.tip);
}

PointJacobian point_jacobian(const ChainModel& model, const JointState& state, const std::string& link,
                             const Vec3& local_point) {
  const std::size_t idx = model.link_index(link);
  const auto frames = link_transforms(model, state.q);
  const Vec3 p = frames[idx].apply(local_point);

  PointJacobian out;
  out.link = link;
  out.local_point = local_point;
  out.matrix = Mat3X::Zero(3, static_cast<Eigen::Index>(model.dof()));
  for (std::size_t j = 0; j <= idx; ++j) {
    const Vec3 axis = frames[j].rotation * model.joints[j].axis;
    if (model.joints[j].kind == JointKind::Revolute) {
      out.matrix.col(static_cast<Eigen::Index>(j)) = axis.cross(p - frames[j].translation);
    } else {
      out.matrix.col(static_cast<Eigen::Index>(j)) = axis;
    }
  }
  return out;
}

VecX dls_solve(const MatX& jacobian, const VecX& xdot, double lambda) {
  if (lambda < 0.0) throw Error("dls_solve: damping must be non-negative");
  if (jacobian.rows() != xdot.size()) throw DimensionError("dls_solve: task dimension mismatch");
  if (xdot.isZero(0.0)) return VecX::Zero(jacobian.cols());

  const auto m = jacobian.rows();
  const MatX gram = jacobian * jacobian.transpose() + lambda * lambda * MatX::Identity(m, m);
  if (lambda == 0.0) {
    Eigen::FullPivLU<MatX> lu(gram);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) throw SingularityError("dls_solve: J J^T is singular and damping is zero");
    return jacobian.transpose() * lu.solve(xdot);
  }
  return jacobian.transpose() * gram.ldlt().solve(xdot);
}

VecX dls_ik_step(const ChainModel& model, const JointState& state, const CartesianTask& task, double lambda) {
  const PointJacobian jac = point_jacobian(model, state, task.link, task.local_point);
  VecX qd = dls_solve(jac.matrix, task.desired_velocity, lambda);
  for (std::size_t i = 0; i < model.dof(); ++i) {
    const double lim = model.joints[i].vel_limit;
    qd[static_cast<Eigen::Index>(i)] = std::clamp(qd[static_cast<Eigen::Index>(i)], -lim, lim);
  }
  return qd;
}

}  // namespace tpo::kin
