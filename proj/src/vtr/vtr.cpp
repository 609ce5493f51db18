#include "tpo/vtr/vtr.hpp"

#include <algorithm>
#include <cmath>

namespace tpo::vtr {

void Thresholds::validate() const {
  for (int i = 0; i < 3; ++i) {
    if (!enabled[static_cast<std::size_t>(i)]) continue;
    if (!(delta[i] > 0.0)) throw ConfigError("VTR threshold delta must be positive on enabled axes");
    if (d[i] - delta[i] < 0.0) throw ConfigError("VTR threshold d - delta must be non-negative");
  }
}

Vec3 transmission_ratios(const Mat3X& jacobian) {
  Eigen::JacobiSVD<MatX> svd(MatX(jacobian), Eigen::ComputeFullU);
  const VecX& sigma = svd.singularValues();
  const MatX& u = svd.matrixU();
  const double sigma_max = sigma.size() > 0 ? sigma[0] : 0.0;
  if (!(sigma_max > 0.0)) return Vec3::Zero();

  // Singular values beyond min(3, N) are implicitly zero.
  std::array<double, 3> s{0.0, 0.0, 0.0};
  for (Eigen::Index k = 0; k < std::min<Eigen::Index>(3, sigma.size()); ++k) s[static_cast<std::size_t>(k)] = sigma[k];

  constexpr double kComponentTol = 1e-8;  // squared direction cosine
  Vec3 beta;
  for (int i = 0; i < 3; ++i) {
    double inv_diag = 0.0;
    double singular_share = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double c2 = u(i, k) * u(i, k);
      if (s[static_cast<std::size_t>(k)] <= kSingularEpsilon * sigma_max) {
        singular_share += c2;
      } else {
        inv_diag += c2 / (s[static_cast<std::size_t>(k)] * s[static_cast<std::size_t>(k)]);
      }
    }
    const bool singular = singular_share > kComponentTol ||
                          inv_diag > 1.0 / (kSingularEpsilon * kSingularEpsilon) || inv_diag <= 0.0;
    beta[i] = singular ? 0.0 : 1.0 / std::sqrt(inv_diag);
  }
  return beta;
}

double axis_weight(double beta, double d, double delta) {
  const double lo = d - delta;
  const double hi = d + delta;
  if (beta >= hi) return 1.0;
  if (beta <= lo) return 0.0;
  const double t = (beta - lo) / (2.0 * delta);
  return t * t * (3.0 - 2.0 * t);
}

Weights vtr_weight(const Vec3& beta, const Thresholds& thresholds) {
  Weights out;
  out.beta = beta;
  for (int i = 0; i < 3; ++i) {
    out.w[i] = thresholds.enabled[static_cast<std::size_t>(i)]
                   ? axis_weight(beta[i], thresholds.d[i], thresholds.delta[i])
                   : 1.0;
  }
  return out;
}

CartesianSplit split_cartesian(const Vec3& xdot, const Weights& weights) {
  CartesianSplit out;
  out.arm = weights.w.cwiseProduct(xdot);
  out.base = (Vec3::Ones() - weights.w).cwiseProduct(xdot);
  return out;
}

PosturalSplit split_postural(const Vec3& force, const Mat3X& jacobian, const Weights& weights,
                             const BaseGain& gain) {
  PosturalSplit out;
  out.tau = jacobian.transpose() * weights.w.cwiseProduct(force);
  out.base = gain.diagonal.cwiseProduct((Vec3::Ones() - weights.w).cwiseProduct(force));
  return out;
}

Weights worst_of(const Weights& a, const Weights& b) {
  Weights out;
  out.beta = a.beta.cwiseMin(b.beta);
  out.w = a.w.cwiseMin(b.w);
  return out;
}

}  // namespace tpo::vtr
