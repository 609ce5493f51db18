#pragma once

#include <optional>
#include <random>
#include <string>

#include "tpo/common/filter.hpp"
#include "tpo/kinematics/rigid_transform.hpp"
#include "tpo/perception/scene.hpp"

namespace tpo::perception {

struct LaserSpot {
  Vec3 position = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  std::string surface;
  double timestamp = 0.0;
};

/// Spot where the emitter's +x axis meets the scene, or nullopt.
std::optional<LaserSpot> laser_raycast(const Scene& scene, const kin::RigidTransform& emitter, double timestamp);

/// Zero-mean Gaussian displacement in the plane of the hit surface.
class SpotNoise {
 public:
  SpotNoise(double sigma, std::uint64_t seed) : sigma_(sigma), rng_(seed) {}
  LaserSpot apply(LaserSpot spot);

 private:
  double sigma_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// First-order low-pass on the spot stream. A gap longer than `max_gap`
/// between samples restarts the filter from the new sample.
class SpotSmoother {
 public:
  explicit SpotSmoother(double cutoff_hz = 5.0, double max_gap = 0.033) : filter_(cutoff_hz), max_gap_(max_gap) {}

  Vec3 update(const Vec3& position, double timestamp);
  void reset() { filter_.reset(); }

 private:
  LowPassFilter3 filter_;
  double max_gap_;
  double last_t_ = 0.0;
};

/// Dwell-based selection with a rolling anchor: a goal is emitted once every
/// sample stayed within `radius` of the anchor for `required` seconds. After an
/// emission the selector stays quiet until the spot leaves the ball.
class DwellSelector {
 public:
  DwellSelector(double radius = 0.04, double required = 3.0);

  std::optional<Vec3> update(const Vec3& position, double timestamp);
  /// Spot lost or claimed by another consumer.
  void reset();

  double elapsed() const { return elapsed_; }
  const Vec3& anchor() const { return anchor_; }

 private:
  double radius_;
  double required_;
  bool have_anchor_ = false;
  bool latched_ = false;
  Vec3 anchor_ = Vec3::Zero();
  double start_ = 0.0;
  double elapsed_ = 0.0;
};

}  // namespace tpo::perception
