#include "tpo/kinematics/chain_model.hpp"

#include <cmath>
#include <limits>
#include <set>

namespace tpo::kin {

std::size_t ChainModel::link_index(const std::string& link) const {
  for (std::size_t i = 0; i < joints.size(); ++i) {
    if (joints[i].link == link) return i;
  }
  throw LookupError("chain '" + name + "' has no link '" + link + "'");
}

bool ChainModel::has_link(const std::string& link) const {
  for (const auto& j : joints) {
    if (j.link == link) return true;
  }
  return false;
}

VecX ChainModel::lower_limits() const {
  VecX out(dof());
  for (std::size_t i = 0; i < dof(); ++i) out[i] = joints[i].min;
  return out;
}

VecX ChainModel::upper_limits() const {
  VecX out(dof());
  for (std::size_t i = 0; i < dof(); ++i) out[i] = joints[i].max;
  return out;
}

VecX ChainModel::velocity_limits() const {
  VecX out(dof());
  for (std::size_t i = 0; i < dof(); ++i) out[i] = joints[i].vel_limit;
  return out;
}

void ChainModel::validate() const {
  if (joints.empty()) throw ConfigError("chain '" + name + "' has no joints");
  if (!base_mount.is_valid()) throw ConfigError("chain '" + name + "' has an invalid base mount");
  std::set<std::string> links;
  for (const auto& j : joints) {
    if (std::abs(j.axis.norm() - 1.0) > 1e-9) {
      throw ConfigError("joint '" + j.name + "' axis is not unit-norm");
    }
    if (!(j.min < j.max)) throw ConfigError("joint '" + j.name + "' has min >= max");
    if (!(j.vel_limit > 0.0)) throw ConfigError("joint '" + j.name + "' needs a positive velocity limit");
    if (!j.origin.is_valid()) throw ConfigError("joint '" + j.name + "' has an invalid origin");
    if (!links.insert(j.link).second) throw ConfigError("duplicate link '" + j.link + "'");
  }
}

VecX clamp_to_limits(const ChainModel& model, const VecX& q) {
  if (static_cast<std::size_t>(q.size()) != model.dof()) {
    throw DimensionError("clamp_to_limits: state dimension does not match chain");
  }
  VecX out = q;
  for (std::size_t i = 0; i < model.dof(); ++i) {
    out[i] = std::min(std::max(out[i], model.joints[i].min), model.joints[i].max);
  }
  return out;
}

ChainModel with_mobile_base(const ChainModel& arm, double squat_min, double squat_max,
                            double planar_vel_limit, double yaw_vel_limit, double squat_vel_limit) {
  constexpr double kUnbounded = 1e6;
  ChainModel out;
  out.name = arm.name;
  out.tip = arm.tip;

  Joint bx{"base_x", "base_x_link", JointKind::Prismatic, Vec3::UnitX(), {}, -kUnbounded, kUnbounded, planar_vel_limit};
  Joint by{"base_y", "base_y_link", JointKind::Prismatic, Vec3::UnitY(), {}, -kUnbounded, kUnbounded, planar_vel_limit};
  // Yaw is continuous; the wide range keeps the limit clamp inactive.
  Joint byaw{"base_yaw", "base_link", JointKind::Revolute, Vec3::UnitZ(), {}, -kUnbounded, kUnbounded, yaw_vel_limit};
  Joint squat{"squat", "pelvis", JointKind::Prismatic, Vec3::UnitZ(), {}, squat_min, squat_max, squat_vel_limit};
  out.joints = {bx, by, byaw, squat};

  for (std::size_t i = 0; i < arm.joints.size(); ++i) {
    Joint j = arm.joints[i];
    if (i == 0) j.origin = arm.base_mount * j.origin;
    out.joints.push_back(j);
  }
  return out;
}

}  // namespace tpo::kin
