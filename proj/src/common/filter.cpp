#include "tpo/common/filter.hpp"

#include <cmath>

namespace tpo {

LowPassFilter3::LowPassFilter3(double cutoff_hz) : cutoff_hz_(cutoff_hz) {
  if (!(cutoff_hz > 0.0)) {
    throw ConfigError("low-pass cutoff must be positive");
  }
}

double LowPassFilter3::time_constant() const {
  return 1.0 / (2.0 * kPi * cutoff_hz_);
}

Vec3 LowPassFilter3::update(const Vec3& x, double dt) {
  if (!initialized_) {
    value_ = x;
    initialized_ = true;
    return value_;
  }
  const double alpha = 1.0 - std::exp(-dt / time_constant());
  value_ += alpha * (x - value_);
  return value_;
}

}  // namespace tpo
