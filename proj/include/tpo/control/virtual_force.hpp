#pragma once

#include <string>

#include "tpo/common/filter.hpp"
#include "tpo/kinematics/rigid_transform.hpp"

namespace tpo::control {

/// Where a virtual force acts: a point rigidly attached to a link of a chain.
struct ControlPoint {
  std::string chain;
  std::string link;
  Vec3 local_point = Vec3::Zero();

  bool operator==(const ControlPoint&) const = default;
};

struct VirtualForce {
  Vec3 vector = Vec3::Zero();  // N
  ControlPoint control_point;
  std::string source;
};

/// One tracked operator wrist. `filter` carries the smoothing state between
/// samples, so a TrackerInput is a stream processor, not a plain value.
struct TrackerInput {
  kin::RigidTransform pose_in_origin;
  kin::RigidTransform reference_pose;
  double k_cam = 1.8;             // N/m
  double deadzone_radius = 0.03;  // m
  double dt = 0.01;               // s between samples
  LowPassFilter3 filter{5.0};
};

/// Radial shrink: zero inside the ball, otherwise the magnitude is reduced by
/// `radius` along the same direction. Continuous at the boundary.
Vec3 apply_deadzone(const Vec3& r, double radius);

/// Displacement of the current pose relative to the reference.
Vec3 tracker_displacement(const TrackerInput& input);

/// f = k_cam * lowpass(deadzone(r)); advances the filter state.
Vec3 virtual_force(TrackerInput& input);

/// Makes the current pose the new zero and clears the filter.
TrackerInput reset_reference(TrackerInput input);

}  // namespace tpo::control
