#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tpo/common/types.hpp"

namespace tpo::perception {

/// Bounded planar rectangle. The in-plane axes are `u_axis` and normal x u_axis.
struct Surface {
  std::string label;
  Vec3 center = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  Vec3 u_axis = Vec3::UnitX();
  double half_u = 1.0;
  double half_v = 1.0;

  Vec3 v_axis() const { return normal.cross(u_axis); }
};

/// Axis-aligned box.
struct Box {
  std::string label;
  Vec3 center = Vec3::Zero();
  Vec3 half_extents = Vec3::Constant(0.1);
};

struct Scene {
  std::vector<Surface> surfaces;
  std::vector<Box> boxes;

  /// Unit normals, u orthogonal to the normal, positive extents.
  void validate() const;
};

struct Hit {
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  std::string label;
  double t = 0.0;
};

/// Nearest intersection with t > 0 along origin + t * direction.
std::optional<Hit> raycast(const Scene& scene, const Vec3& origin, const Vec3& direction);

}  // namespace tpo::perception
