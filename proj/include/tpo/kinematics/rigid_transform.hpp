#pragma once

#include "tpo/common/types.hpp"

namespace tpo::kin {

/// Proper rigid motion: x' = rotation * x + translation.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidTransform identity() { return {}; }
  static RigidTransform from_translation(const Vec3& t);
  static RigidTransform from_axis_angle(const Vec3& axis, double angle, const Vec3& t = Vec3::Zero());
  /// Fixed-axis roll/pitch/yaw (R = Rz(yaw) Ry(pitch) Rx(roll)).
  static RigidTransform from_rpy(double roll, double pitch, double yaw, const Vec3& t = Vec3::Zero());

  RigidTransform operator*(const RigidTransform& rhs) const;
  Vec3 apply(const Vec3& point) const { return rotation * point + translation; }
  RigidTransform inverse() const;

  /// True when R^T R = I and det(R) = +1 within `tol`.
  bool is_valid(double tol = 1e-9) const;

  bool operator==(const RigidTransform&) const = default;
};

/// Rotation whose first column is `forward` (normalized); used to aim emitters.
Mat3 rotation_looking_along(const Vec3& forward);

}  // namespace tpo::kin
