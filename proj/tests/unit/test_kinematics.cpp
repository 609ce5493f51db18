#include <gtest/gtest.h>

#include <random>

#include "tpo/acceptance/oracles.hpp"
#include "tpo/kinematics/kinematics.hpp"

using namespace tpo;
using namespace tpo::kin;

namespace {

JointState state_of(std::initializer_list<double> q) {
  VecX v(static_cast<Eigen::Index>(q.size()));
  Eigen::Index i = 0;
  for (double x : q) v[i++] = x;
  return {v, VecX::Zero(v.size())};
}

}  // namespace

TEST(ForwardKinematics, StraightPlanarChainTip) {
  const auto model = oracle::planar_chain(2);
  const Vec3 tip = tip_position(model, state_of({0, 0}).q);
  EXPECT_TRUE(tip.isApprox(Vec3(2, 0, 0), 1e-12));
}

TEST(ForwardKinematics, RotatedShoulder) {
  const auto model = oracle::planar_chain(2);
  const Vec3 tip = tip_position(model, state_of({kPi / 2, 0}).q);
  EXPECT_NEAR((tip - Vec3(0, 2, 0)).norm(), 0.0, 1e-12);
}

TEST(ForwardKinematics, BentElbowMatchesHandComposedTransforms) {
  const auto model = oracle::planar_chain(2);
  // T1 = Rz(0), T2 = T1 * Trans(1,0,0) * Rz(pi/2); tip = T2 * (1,0,0).
  const RigidTransform t2 = RigidTransform::from_translation(Vec3(1, 0, 0)) *
                            RigidTransform::from_axis_angle(Vec3::UnitZ(), kPi / 2);
  const Vec3 expected = t2.apply(Vec3(1, 0, 0));
  const Vec3 tip = tip_position(model, state_of({0, kPi / 2}).q);
  EXPECT_NEAR((tip - expected).norm(), 0.0, 1e-12);
  EXPECT_NEAR((tip - Vec3(1, 1, 0)).norm(), 0.0, 1e-12);
}

TEST(ForwardKinematics, DimensionMismatchThrows) {
  const auto model = oracle::planar_chain(2);
  EXPECT_THROW(forward_kinematics(model, state_of({0, 0, 0})), DimensionError);
}

TEST(ForwardKinematics, FramesAreRigidAndCompose) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto model = oracle::random_chain(rng);
    const VecX q = oracle::random_configuration(model, rng);
    const auto frames = link_transforms(model, q);
    RigidTransform composed = model.base_mount;
    for (std::size_t i = 0; i < model.dof(); ++i) {
      ASSERT_TRUE(frames[i].is_valid(1e-9));
      const auto& j = model.joints[i];
      const RigidTransform motion = j.kind == JointKind::Revolute
                                        ? RigidTransform::from_axis_angle(j.axis, q[static_cast<Eigen::Index>(i)])
                                        : RigidTransform::from_translation(j.axis * q[static_cast<Eigen::Index>(i)]);
      composed = composed * j.origin * motion;
      EXPECT_LT((composed.translation - frames[i].translation).norm(), 1e-12);
    }
  }
}

TEST(PointJacobian, PlanarBentElbowMatchesFiniteDifferences) {
  const auto model = oracle::planar_chain(2);
  const auto state = state_of({0, kPi / 2});
  const auto jac = point_jacobian(model, state, "link2", model.tip);
  Mat3X expected(3, 2);
  expected << -1, -1, 1, 0, 0, 0;
  EXPECT_LT((jac.matrix - expected).cwiseAbs().maxCoeff(), 1e-12);
  const Mat3X fd = oracle::finite_difference_jacobian(model, state.q, "link2", model.tip);
  EXPECT_LT((jac.matrix - fd).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(PointJacobian, PlanarStraight) {
  const auto model = oracle::planar_chain(2);
  const auto jac = point_jacobian(model, state_of({0, 0}), "link2", model.tip);
  Mat3X expected(3, 2);
  expected << 0, 0, 2, 1, 0, 0;
  EXPECT_LT((jac.matrix - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(PointJacobian, ControlPointOnFirstLinkHasZeroDistalColumn) {
  const auto model = oracle::planar_chain(2);
  const auto jac = point_jacobian(model, state_of({0.3, -0.7}), "link1", Vec3(0.5, 0, 0));
  EXPECT_TRUE(jac.matrix.col(1).isZero(0.0));
  EXPECT_FALSE(jac.matrix.col(0).isZero(0.0));
}

TEST(PointJacobian, UnknownLinkThrows) {
  const auto model = oracle::planar_chain(2);
  EXPECT_THROW(point_jacobian(model, state_of({0, 0}), "forearm", Vec3::Zero()), LookupError);
}

TEST(PointJacobian, DistalColumnsZeroForEveryInteriorLink) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto model = oracle::random_chain(rng);
    const JointState state{oracle::random_configuration(model, rng), VecX::Zero(model.dof())};
    for (std::size_t l = 0; l < model.dof(); ++l) {
      const auto jac = point_jacobian(model, state, model.joints[l].link, Vec3(0.1, -0.2, 0.3));
      for (std::size_t c = l + 1; c < model.dof(); ++c) {
        EXPECT_TRUE(jac.matrix.col(static_cast<Eigen::Index>(c)).isZero(0.0));
      }
    }
  }
}

TEST(PointJacobian, RandomChainsMatchFiniteDifferences) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto model = oracle::random_chain(rng);
    const JointState state{oracle::random_configuration(model, rng), VecX::Zero(model.dof())};
    const auto jac = point_jacobian(model, state, model.tip_link(), model.tip);
    const Mat3X fd = oracle::finite_difference_jacobian(model, state.q, model.tip_link(), model.tip);
    const double scale = std::max(1.0, fd.cwiseAbs().maxCoeff());
    EXPECT_LE((jac.matrix - fd).cwiseAbs().maxCoeff() / scale, 1e-6);
  }
}

TEST(DlsIk, ZeroTaskGivesZeroVelocity) {
  const auto model = oracle::planar_chain(2);
  const VecX qd = dls_ik_step(model, state_of({0.1, 0.2}), {"link2", model.tip, Vec3::Zero()});
  EXPECT_TRUE(qd.isZero(0.0));
}

TEST(DlsIk, IdentityJacobianUndamped) {
  const auto model = oracle::cartesian_chain();
  const VecX qd = dls_ik_step(model, state_of({0, 0, 0}), {"slide2", Vec3::Zero(), Vec3(0.1, 0, 0)}, 0.0);
  EXPECT_NEAR(qd[0], 0.1, 1e-15);
  EXPECT_NEAR(qd[1], 0.0, 1e-15);
  EXPECT_NEAR(qd[2], 0.0, 1e-15);
}

TEST(DlsIk, ScalarClosedForm) {
  MatX j(1, 1);
  j << 1e-6;
  VecX x(1);
  x << 1.0;
  // 1e-6 / (1e-12 + 0.01)
  EXPECT_NEAR(dls_solve(j, x, 0.1)[0], 1e-6 / (1e-12 + 0.01), 1e-18);
  EXPECT_NEAR(dls_solve(j, x, 0.1)[0], 1e-4, 1e-9);
}

TEST(DlsIk, SingularWithoutDampingThrows) {
  const auto model = oracle::planar_chain(2);
  EXPECT_THROW(dls_ik_step(model, state_of({0, 0}), {"link2", model.tip, Vec3(0.1, 0, 0)}, 0.0),
               SingularityError);
  EXPECT_NO_THROW(dls_ik_step(model, state_of({0, 0}), {"link2", model.tip, Vec3(0.1, 0, 0)}, 0.05));
}

TEST(DlsIk, VelocityClampApplied) {
  auto model = oracle::cartesian_chain();
  model.joints[0].vel_limit = 0.05;
  const VecX qd = dls_ik_step(model, state_of({0, 0, 0}), {"slide2", Vec3::Zero(), Vec3(0.1, 0.02, 0)}, 0.0);
  EXPECT_DOUBLE_EQ(qd[0], 0.05);
  EXPECT_NEAR(qd[1], 0.02, 1e-15);
}

TEST(DlsIk, NormNonIncreasingInDamping) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 300; ++trial) {
    const auto model = oracle::random_chain(rng);
    const JointState state{oracle::random_configuration(model, rng), VecX::Zero(model.dof())};
    const auto jac = point_jacobian(model, state, model.tip_link(), model.tip);
    const Vec3 xd(g(rng), g(rng), g(rng));
    double prev = std::numeric_limits<double>::infinity();
    for (double lambda : {1e-3, 0.01, 0.05, 0.1, 0.5, 1.0, 5.0}) {
      const double n = dls_solve(jac.matrix, xd, lambda).norm();
      EXPECT_LE(n, prev * (1.0 + 1e-9));
      prev = n;
    }
  }
}

TEST(ChainModel, ValidateRejectsBadAxisAndLimits) {
  auto model = oracle::planar_chain(2);
  EXPECT_NO_THROW(model.validate());
  model.joints[0].axis = Vec3(1, 1, 0);
  EXPECT_THROW(model.validate(), ConfigError);
  model = oracle::planar_chain(2);
  model.joints[1].min = 1.0;
  model.joints[1].max = 1.0;
  EXPECT_THROW(model.validate(), ConfigError);
  ChainModel empty;
  EXPECT_THROW(empty.validate(), ConfigError);
}

TEST(ChainModel, MobileBaseCompositionMatchesManualTransform) {
  auto arm = oracle::planar_chain(2, 0.4);
  arm.base_mount = RigidTransform::from_translation(Vec3(0.1, 0.2, 0.5));
  const auto whole = with_mobile_base(arm, 0.0, 0.5);
  ASSERT_EQ(whole.dof(), 6u);
  VecX q(6);
  q << 1.0, -0.5, 0.3, 0.2, 0.4, -0.6;
  const Vec3 p = tip_position(whole, q);
  const RigidTransform base = RigidTransform::from_axis_angle(Vec3::UnitZ(), 0.3, Vec3(1.0, -0.5, 0.2));
  const Vec3 expected = base.apply(tip_position(arm, q.tail(2)));
  EXPECT_LT((p - expected).norm(), 1e-12);
}
