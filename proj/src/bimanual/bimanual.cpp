#include "tpo/bimanual/bimanual.hpp"

#include <cmath>

namespace tpo::bimanual {

void GraspSpec::validate() const {
  if (!(mu_s > 0.0)) throw ConfigError("mu_s must be positive");
  if (!(k_margin > 1.0)) throw ConfigError("k_margin must be greater than 1");
  if (f_bar < 0.0) throw ConfigError("f_bar must be non-negative");
}

void CoopParams::validate() const {
  if (!(damping.array() > 0.0).all()) throw ConfigError("damping diagonal must be strictly positive");
  if (!(r_b.transpose() * r_b).isIdentity(1e-9) || r_b.determinant() < 0.0)
    throw ConfigError("R_b must be a rotation");
}

MassEstimate estimate_mass(const std::vector<LiftSample>& samples, double g) {
  if (samples.empty()) throw Error("estimate_mass: no force samples");
  if (!(g > 0.0)) throw Error("estimate_mass: gravity must be positive");
  double sum = 0.0;
  for (const auto& s : samples) sum += (s.f_zl + s.f_zr) / g;
  MassEstimate out;
  out.m_bar = sum / static_cast<double>(samples.size());
  out.samples_used = samples.size();
  out.g = g;
  return out;
}

double grasp_force(double m_bar, double mu_s, double k_margin, double g) {
  if (!(mu_s > 0.0)) throw Error("grasp_force: mu_s must be positive");
  return k_margin * m_bar * g / (2.0 * mu_s);
}

EEForce desired_forces(const EEForce& sensed, double f_bar) {
  EEForce out = sensed;
  out.left.y() = f_bar;
  out.right.y() = -f_bar;
  return out;
}

CoopVelocity coop_step(const Vec3& xdot_cmd, const EEForce& sensed, const EEForce& desired,
                       const Vec3& p_left, const Vec3& p_right, const CoopParams& params) {
  if (!(params.damping.array() > 0.0).all()) throw Error("coop_step: singular damping");
  const Vec3 d_inv = params.damping.cwiseInverse();
  const Vec3 target_left = p_left;
  const Vec3 target_right = p_left + params.p_offset_t0;

  CoopVelocity out;
  out.left = xdot_cmd + d_inv.cwiseProduct(params.r_b * (sensed.left - desired.left) +
                                           params.stiffness.cwiseProduct(target_left - p_left));
  out.right = xdot_cmd + d_inv.cwiseProduct(params.r_b * (sensed.right - desired.right) +
                                            params.stiffness.cwiseProduct(target_right - p_right));
  return out;
}

Mat3 object_frame(const Vec3& p_left, const Vec3& p_right) {
  const Vec3 span = p_left - p_right;
  const double len = span.norm();
  if (!(len > 1e-9)) throw Error("object_frame: coincident contact points");
  const Vec3 y = span / len;
  Vec3 x = Vec3::UnitX() - Vec3::UnitX().dot(y) * y;
  if (x.norm() < 1e-6) x = Vec3::UnitZ() - Vec3::UnitZ().dot(y) * y;
  x.normalize();
  Mat3 r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = x.cross(y);
  return r;
}

}  // namespace tpo::bimanual
