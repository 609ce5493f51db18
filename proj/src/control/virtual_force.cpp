#include "tpo/control/virtual_force.hpp"

namespace tpo::control {

Vec3 apply_deadzone(const Vec3& r, double radius) {
  const double n = r.norm();
  if (n <= radius) return Vec3::Zero();
  return r * ((n - radius) / n);
}

Vec3 tracker_displacement(const TrackerInput& input) {
  return (input.reference_pose.inverse() * input.pose_in_origin).translation;
}

Vec3 virtual_force(TrackerInput& input) {
  const Vec3 shrunk = apply_deadzone(tracker_displacement(input), input.deadzone_radius);
  return input.k_cam * input.filter.update(shrunk, input.dt);
}

TrackerInput reset_reference(TrackerInput input) {
  input.reference_pose = input.pose_in_origin;
  input.filter.reset();
  return input;
}

}  // namespace tpo::control
