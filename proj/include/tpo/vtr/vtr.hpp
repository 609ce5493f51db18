#pragma once

#include <array>

#include "tpo/common/types.hpp"

namespace tpo::vtr {

/// Per-axis weight thresholds. Axis i blends between d_i - delta_i (w = 0)
/// and d_i + delta_i (w = 1). A disabled axis always has w = 1, i.e. the arm
/// keeps full authority along it.
struct Thresholds {
  Vec3 d = Vec3::Constant(0.25);
  Vec3 delta = Vec3::Constant(0.1);
  std::array<bool, 3> enabled{true, true, true};

  /// Throws ConfigError unless delta_i > 0 and d_i - delta_i >= 0 on enabled axes.
  void validate() const;
};

struct Weights {
  Vec3 beta = Vec3::Zero();
  Vec3 w = Vec3::Ones();

  Mat3 matrix() const { return w.asDiagonal(); }
};

struct BaseGain {
  Vec3 diagonal = Vec3::Ones();
};

struct CartesianSplit {
  Vec3 arm = Vec3::Zero();   // x* = W xdot
  Vec3 base = Vec3::Zero();  // nu = (I - W) xdot
};

struct PosturalSplit {
  VecX tau;
  Vec3 base = Vec3::Zero();
};

/// Singular-direction tolerance relative to the largest singular value of J.
inline constexpr double kSingularEpsilon = 1e-8;

/// Virtual transmission ratio along x, y, z:
///   beta_i = ([(J J^T)^-1]_ii)^(-1/2).
/// Computed from the SVD of J. An axis with a non-negligible component along a
/// singular direction of J J^T gets beta_i = 0.
Vec3 transmission_ratios(const Mat3X& jacobian);

/// Cubic smoothstep between d - delta and d + delta.
double axis_weight(double beta, double d, double delta);

Weights vtr_weight(const Vec3& beta, const Thresholds& thresholds);

CartesianSplit split_cartesian(const Vec3& xdot, const Weights& weights);

/// tau = J^T W f, nu = K_nu (I - W) f.
PosturalSplit split_postural(const Vec3& force, const Mat3X& jacobian, const Weights& weights,
                             const BaseGain& gain);

/// Per-axis minimum of two weight sets (the arm in the worse condition wins).
Weights worst_of(const Weights& a, const Weights& b);

}  // namespace tpo::vtr
