#pragma once

#include "tpo/common/types.hpp"

namespace tpo {

/// First-order low-pass on a 3-vector, discretized exactly for a step of
/// `dt`: y += (1 - exp(-dt / tau)) * (x - y), tau = 1 / (2 pi cutoff).
/// The first sample after construction or reset passes through unchanged.
class LowPassFilter3 {
 public:
  LowPassFilter3() = default;
  explicit LowPassFilter3(double cutoff_hz);

  Vec3 update(const Vec3& x, double dt);
  void reset() { initialized_ = false; }

  bool initialized() const { return initialized_; }
  const Vec3& value() const { return value_; }
  double cutoff_hz() const { return cutoff_hz_; }
  double time_constant() const;

 private:
  double cutoff_hz_ = 5.0;
  bool initialized_ = false;
  Vec3 value_ = Vec3::Zero();
};

}  // namespace tpo
