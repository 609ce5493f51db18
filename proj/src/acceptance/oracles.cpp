#include "tpo/acceptance/oracles.hpp"

#include "tpo/kinematics/kinematics.hpp"

namespace tpo::oracle {

Mat3X finite_difference_jacobian(const kin::ChainModel& model, const VecX& q, const std::string& link,
                                 const Vec3& local_point, double h) {
  Mat3X jac(3, q.size());
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    VecX plus = q;
    VecX minus = q;
    plus[i] += h;
    minus[i] -= h;
    jac.col(i) = (kin::point_position(model, plus, link, local_point) -
                  kin::point_position(model, minus, link, local_point)) /
                 (2.0 * h);
  }
  return jac;
}

kin::ChainModel random_chain(std::mt19937_64& rng, std::size_t max_dof) {
  std::uniform_int_distribution<std::size_t> dof_dist(1, max_dof);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> offset(-0.5, 0.5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  auto random_unit = [&] {
    Vec3 v(gauss(rng), gauss(rng), gauss(rng));
    while (v.norm() < 1e-3) v = Vec3(gauss(rng), gauss(rng), gauss(rng));
    return Vec3(v.normalized());
  };

  kin::ChainModel model;
  model.name = "random";
  model.base_mount = kin::RigidTransform::from_axis_angle(random_unit(), unit(rng) * kPi,
                                                         Vec3(offset(rng), offset(rng), offset(rng)));
  const std::size_t dof = dof_dist(rng);
  for (std::size_t i = 0; i < dof; ++i) {
    kin::Joint j;
    j.name = "j" + std::to_string(i);
    j.link = "l" + std::to_string(i);
    j.kind = unit(rng) < 0.8 ? kin::JointKind::Revolute : kin::JointKind::Prismatic;
    j.axis = random_unit();
    j.origin = kin::RigidTransform::from_axis_angle(random_unit(), unit(rng) * kPi,
                                                    Vec3(offset(rng), offset(rng), offset(rng)));
    j.min = j.kind == kin::JointKind::Revolute ? -kPi : -0.5;
    j.max = -j.min;
    j.vel_limit = 1.0;
    model.joints.push_back(j);
  }
  model.tip = Vec3(offset(rng), offset(rng), offset(rng));
  return model;
}

VecX random_configuration(const kin::ChainModel& model, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  VecX q(model.dof());
  for (std::size_t i = 0; i < model.dof(); ++i) {
    const auto& j = model.joints[i];
    q[static_cast<Eigen::Index>(i)] = j.min + unit(rng) * (j.max - j.min);
  }
  return q;
}

kin::ChainModel planar_chain(std::size_t links, double link_length) {
  kin::ChainModel model;
  model.name = "planar";
  for (std::size_t i = 0; i < links; ++i) {
    kin::Joint j;
    j.name = "j" + std::to_string(i + 1);
    j.link = "link" + std::to_string(i + 1);
    j.axis = Vec3::UnitZ();
    if (i > 0) j.origin = kin::RigidTransform::from_translation(Vec3(link_length, 0, 0));
    j.min = -kPi;
    j.max = kPi;
    j.vel_limit = 10.0;
    model.joints.push_back(j);
  }
  model.tip = Vec3(link_length, 0, 0);
  return model;
}

kin::ChainModel cartesian_chain() {
  kin::ChainModel model;
  model.name = "cartesian";
  const Vec3 axes[3] = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
  for (int i = 0; i < 3; ++i) {
    kin::Joint j;
    j.name = "p" + std::to_string(i);
    j.link = "slide" + std::to_string(i);
    j.kind = kin::JointKind::Prismatic;
    j.axis = axes[i];
    j.min = -1.0;
    j.max = 1.0;
    j.vel_limit = 1.0;
    model.joints.push_back(j);
  }
  return model;
}

}  // namespace tpo::oracle
