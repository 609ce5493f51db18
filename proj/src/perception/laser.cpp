#include "tpo/perception/laser.hpp"

namespace tpo::perception {

std::optional<LaserSpot> laser_raycast(const Scene& scene, const kin::RigidTransform& emitter, double timestamp) {
  const auto hit = raycast(scene, emitter.translation, emitter.rotation.col(0));
  if (!hit) return std::nullopt;
  return LaserSpot{hit->point, hit->normal, hit->label, timestamp};
}

LaserSpot SpotNoise::apply(LaserSpot spot) {
  if (sigma_ <= 0.0) return spot;
  const Vec3 helper = std::abs(spot.normal.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 a = spot.normal.cross(helper).normalized();
  const Vec3 b = spot.normal.cross(a);
  const double da = sigma_ * normal_(rng_);
  const double db = sigma_ * normal_(rng_);
  spot.position += da * a + db * b;
  return spot;
}

Vec3 SpotSmoother::update(const Vec3& position, double timestamp) {
  if (filter_.initialized() && timestamp - last_t_ > max_gap_ + 1e-9) filter_.reset();
  const double dt = filter_.initialized() ? timestamp - last_t_ : 0.0;
  last_t_ = timestamp;
  return filter_.update(position, dt);
}

DwellSelector::DwellSelector(double radius, double required) : radius_(radius), required_(required) {
  if (!(radius > 0.0) || !(required > 0.0)) throw ConfigError("dwell radius and time must be positive");
}

std::optional<Vec3> DwellSelector::update(const Vec3& position, double timestamp) {
  if (!have_anchor_ || (position - anchor_).norm() > radius_) {
    have_anchor_ = true;
    latched_ = false;
    anchor_ = position;
    start_ = timestamp;
    elapsed_ = 0.0;
    return std::nullopt;
  }
  elapsed_ = timestamp - start_;
  if (latched_ || elapsed_ < required_ - 1e-9) return std::nullopt;
  latched_ = true;
  return anchor_;
}

void DwellSelector::reset() {
  have_anchor_ = false;
  latched_ = false;
  elapsed_ = 0.0;
}

}  // namespace tpo::perception
