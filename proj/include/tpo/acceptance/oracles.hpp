#pragma once

#include <random>

#include "tpo/kinematics/chain_model.hpp"

// Reference computations kept independent of the code paths they check.
namespace tpo::oracle {

/// Central finite differences of forward kinematics for a point on `link`.
Mat3X finite_difference_jacobian(const kin::ChainModel& model, const VecX& q, const std::string& link,
                                 const Vec3& local_point, double h = 1e-6);

/// Random serial chain with 1..max_dof joints: random axes, offsets, and
/// revolute/prismatic mix.
kin::ChainModel random_chain(std::mt19937_64& rng, std::size_t max_dof = 7);

/// Random configuration strictly inside the joint limits.
VecX random_configuration(const kin::ChainModel& model, std::mt19937_64& rng);

/// Planar chain of revolute z joints with unit links along x; tip at the end
/// of the last link.
kin::ChainModel planar_chain(std::size_t links, double link_length = 1.0);

/// Three orthogonal prismatic joints (J = I).
kin::ChainModel cartesian_chain();

}  // namespace tpo::oracle
