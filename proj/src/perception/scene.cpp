#include "tpo/perception/scene.hpp"

#include <cmath>
#include <limits>

namespace tpo::perception {

namespace {

constexpr double kParallelTol = 1e-12;
constexpr double kMinT = 1e-9;

std::optional<Hit> hit_surface(const Surface& s, const Vec3& origin, const Vec3& dir) {
  const double denom = s.normal.dot(dir);
  if (std::abs(denom) < kParallelTol) return std::nullopt;
  const double t = s.normal.dot(s.center - origin) / denom;
  if (!(t > kMinT)) return std::nullopt;
  const Vec3 p = origin + t * dir;
  const Vec3 d = p - s.center;
  if (std::abs(d.dot(s.u_axis)) > s.half_u || std::abs(d.dot(s.v_axis())) > s.half_v) return std::nullopt;
  // Re-project so the point sits on the plane to rounding precision.
  return Hit{p - s.normal.dot(d) * s.normal, s.normal, s.label, t};
}

std::optional<Hit> hit_box(const Box& b, const Vec3& origin, const Vec3& dir) {
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  int axis = -1;
  double sign = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double lo = b.center[i] - b.half_extents[i];
    const double hi = b.center[i] + b.half_extents[i];
    if (std::abs(dir[i]) < kParallelTol) {
      if (origin[i] < lo || origin[i] > hi) return std::nullopt;
      continue;
    }
    double t0 = (lo - origin[i]) / dir[i];
    double t1 = (hi - origin[i]) / dir[i];
    double face = -1.0;
    if (t0 > t1) {
      std::swap(t0, t1);
      face = 1.0;
    }
    if (t0 > t_near) {
      t_near = t0;
      axis = i;
      sign = face;
    }
    t_far = std::min(t_far, t1);
  }
  // Rays starting inside a box do not hit it.
  if (axis < 0 || t_near > t_far || !(t_near > kMinT)) return std::nullopt;
  Vec3 p = origin + t_near * dir;
  p[axis] = b.center[axis] + sign * b.half_extents[axis];
  Vec3 n = Vec3::Zero();
  n[axis] = sign;
  return Hit{p, n, b.label, t_near};
}

}  // namespace

void Scene::validate() const {
  for (const auto& s : surfaces) {
    if (std::abs(s.normal.norm() - 1.0) > 1e-9) throw ConfigError("surface '" + s.label + "' normal is not unit");
    if (std::abs(s.u_axis.norm() - 1.0) > 1e-9 || std::abs(s.u_axis.dot(s.normal)) > 1e-9)
      throw ConfigError("surface '" + s.label + "' u axis must be unit and orthogonal to the normal");
    if (!(s.half_u > 0.0) || !(s.half_v > 0.0)) throw ConfigError("surface '" + s.label + "' has degenerate bounds");
  }
  for (const auto& b : boxes)
    if (!(b.half_extents.array() > 0.0).all()) throw ConfigError("box '" + b.label + "' has degenerate extents");
}

std::optional<Hit> raycast(const Scene& scene, const Vec3& origin, const Vec3& direction) {
  const double len = direction.norm();
  if (!(len > 0.0)) return std::nullopt;
  const Vec3 dir = direction / len;
  std::optional<Hit> best;
  auto consider = [&](std::optional<Hit> h) {
    if (h && (!best || h->t < best->t)) best = std::move(h);
  };
  for (const auto& s : scene.surfaces) consider(hit_surface(s, origin, dir));
  for (const auto& b : scene.boxes) consider(hit_box(b, origin, dir));
  return best;
}

}  // namespace tpo::perception
