#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "tpo/acceptance/oracles.hpp"
#include "tpo/control/motion_generation.hpp"

using namespace tpo;
using namespace tpo::control;

namespace {

TrackerInput tracker_at(const Vec3& r, double deadzone = 0.03, double k = 1.8) {
  TrackerInput in;
  in.pose_in_origin = kin::RigidTransform::from_translation(r);
  in.deadzone_radius = deadzone;
  in.k_cam = k;
  return in;
}

VirtualForce force_on(const std::string& chain, const std::string& link, const Vec3& f,
                      const Vec3& local = Vec3(0.5, 0, 0)) {
  return {f, {chain, link, local}, "test"};
}

}  // namespace

TEST(VirtualForce, InsideDeadzoneIsZero) {
  auto in = tracker_at(Vec3(0.02, 0, 0));
  EXPECT_TRUE(virtual_force(in).isZero(0.0));
}

TEST(VirtualForce, RadialShrinkAlongX) {
  auto in = tracker_at(Vec3(0.1, 0, 0));
  const Vec3 f = virtual_force(in);
  EXPECT_NEAR(f.x(), 1.8 * (0.1 - 0.03), 1e-12);
  EXPECT_NEAR(f.x(), 0.126, 1e-12);
  EXPECT_EQ(f.y(), 0.0);
  EXPECT_EQ(f.z(), 0.0);
}

TEST(VirtualForce, RadialShrinkAlongY) {
  auto in = tracker_at(Vec3(0, 0.5, 0));
  EXPECT_NEAR(virtual_force(in).y(), 0.846, 1e-12);
}

TEST(VirtualForce, ReferenceIsRelativeFrame) {
  auto in = tracker_at(Vec3(1.0, 1.0, 0.0));
  in.reference_pose = kin::RigidTransform::from_axis_angle(Vec3::UnitZ(), kPi / 2, Vec3(1.0, 0.9, 0.0));
  // ref^-1 * pose: displacement (0, 0.1, 0) in world is (0.1, 0, 0) in the rotated reference.
  const Vec3 f = virtual_force(in);
  EXPECT_NEAR(f.x(), 1.8 * 0.07, 1e-12);
  EXPECT_NEAR(f.y(), 0.0, 1e-12);
}

TEST(VirtualForce, ContinuousAtDeadzoneBoundary) {
  const double radius = 0.03;
  for (double eps : {1e-3, 1e-6, 1e-9}) {
    const Vec3 inside = apply_deadzone(Vec3(radius - eps, 0, 0), radius);
    const Vec3 outside = apply_deadzone(Vec3(radius + eps, 0, 0), radius);
    EXPECT_LE((outside - inside).norm(), eps * 1.0000001);
  }
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 0.05);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 a(g(rng), g(rng), g(rng));
    const Vec3 b = a + Vec3(g(rng), g(rng), g(rng)) * 1e-3;
    // r - proj_ball(r) is nonexpansive
    EXPECT_LE((apply_deadzone(a, radius) - apply_deadzone(b, radius)).norm(), (a - b).norm() + 1e-15);
  }
}

TEST(VirtualForce, ResetZeroesAndIsIdempotent) {
  auto in = tracker_at(Vec3(0.3, -0.2, 0.1));
  virtual_force(in);
  auto once = reset_reference(in);
  auto twice = reset_reference(once);
  EXPECT_TRUE(once.reference_pose == twice.reference_pose);
  EXPECT_TRUE(virtual_force(once).isZero(0.0));
  EXPECT_TRUE(virtual_force(twice).isZero(0.0));
}

TEST(VirtualForce, ResetThenMoveAlongX) {
  auto in = reset_reference(tracker_at(Vec3(0.3, -0.2, 0.1)));
  in.pose_in_origin = kin::RigidTransform::from_translation(Vec3(0.35, -0.2, 0.1));
  const Vec3 f = virtual_force(in);
  EXPECT_NEAR(f.x(), 1.8 * 0.02, 1e-12);
  EXPECT_NEAR(f.y(), 0.0, 1e-15);
  EXPECT_NEAR(f.z(), 0.0, 1e-15);
}

TEST(VirtualForce, FilterSmoothsSteps) {
  auto in = tracker_at(Vec3::Zero());
  virtual_force(in);
  in.pose_in_origin = kin::RigidTransform::from_translation(Vec3(0.13, 0, 0));
  const double first = virtual_force(in).x();
  EXPECT_GT(first, 0.0);
  EXPECT_LT(first, 1.8 * 0.1);
  double value = first;
  for (int i = 0; i < 200; ++i) value = virtual_force(in).x();
  EXPECT_NEAR(value, 1.8 * 0.1, 1e-9);
}

TEST(Postural, EquilibriumUnchanged) {
  const auto model = oracle::planar_chain(3);
  kin::JointState state{VecX::Constant(3, 0.2), VecX::Zero(3)};
  const auto params = AdmittanceParams::uniform(3, 1.0, 0.0, 5.0, VecX::Zero(3));
  const PosturalReference prev{state.q, VecX::Zero(3)};
  const auto next = postural_step(model, state, {}, params, BlockingLink::Off, prev);
  EXPECT_TRUE(next.q_ref.isApprox(prev.q_ref, 0.0));
  EXPECT_TRUE(next.qd_ref.isZero(0.0));
}

TEST(Postural, ConstantTorqueStepResponseMatchesFirstOrderSolution) {
  // M qdd = tau - D qd  ->  qd(t) = tau/D (1 - exp(-D t / M)).
  const double m = 1.0, d = 10.0, tau = 2.0, dt = 0.01;
  AdmittanceParams params{VecX::Constant(1, m), VecX::Zero(1), VecX::Constant(1, d), VecX::Zero(1), dt};
  PosturalReference ref{VecX::Zero(1), VecX::Zero(1)};
  const double time_constant = m / d;
  const int steps = static_cast<int>(std::lround(5.0 * time_constant / dt));
  for (int i = 0; i < steps; ++i) ref = admittance_step(ref.q_ref, VecX::Constant(1, tau), params, ref);
  const double analytic = tau / d * (1.0 - std::exp(-d * steps * dt / m));
  EXPECT_LE(std::abs(ref.qd_ref[0] - analytic) / analytic, 0.01);
  EXPECT_LE(std::abs(ref.qd_ref[0] - tau / d) / (tau / d), 0.01);
}

TEST(Postural, ForceOnMiddleLinkLeavesDistalJointAlone) {
  const auto model = oracle::planar_chain(3);
  kin::JointState state{Vec3(0.3, 0.4, -0.2), VecX::Zero(3)};
  const VirtualForce f = force_on("planar", "link2", Vec3(0, 1, 0));
  const VecX tau = joint_torques(model, state, std::span(&f, 1), BlockingLink::Off);
  EXPECT_EQ(tau[2], 0.0);
  EXPECT_NE(tau[1], 0.0);
}

TEST(Postural, ChainMismatchThrows) {
  const auto model = oracle::planar_chain(3);
  kin::JointState state{VecX::Zero(3), VecX::Zero(3)};
  const VirtualForce f = force_on("left_arm", "link2", Vec3(0, 1, 0));
  const auto params = AdmittanceParams::uniform(3, 1.0, 0.0, 5.0, VecX::Zero(3));
  EXPECT_THROW(postural_step(model, state, std::span(&f, 1), params, BlockingLink::Off, {state.q, state.qd}),
               Error);
}

TEST(Postural, BlockingLinkZeroesAncestorJointsForDescendantForce) {
  const auto model = oracle::planar_chain(4);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 200; ++trial) {
    kin::JointState state{oracle::random_configuration(model, rng), VecX::Zero(4)};
    const VirtualForce a = force_on("planar", "link2", Vec3(g(rng), g(rng), g(rng)));
    const VirtualForce b = force_on("planar", "link4", Vec3(g(rng), g(rng), g(rng)));
    const VirtualForce both[] = {a, b};
    const VecX tau_a = joint_torques(model, state, std::span(&a, 1), BlockingLink::Off);
    const VecX tau_b = joint_torques(model, state, std::span(&b, 1), BlockingLink::Off);
    const VecX blocked = joint_torques(model, state, both, BlockingLink::On);
    // joints 1..2 (at or before A's link) only see A
    EXPECT_NEAR(blocked[0], tau_a[0], 1e-12);
    EXPECT_NEAR(blocked[1], tau_a[1], 1e-12);
    // joints strictly between A and B get B's unmodified contribution
    EXPECT_NEAR(blocked[2], tau_b[2], 1e-12);
    EXPECT_NEAR(blocked[3], tau_b[3], 1e-12);
    const VecX free = joint_torques(model, state, both, BlockingLink::Off);
    EXPECT_LT((free - tau_a - tau_b).norm(), 1e-12);
  }
}

TEST(Postural, AggregationIsLinear) {
  const auto model = oracle::planar_chain(3);
  kin::JointState state{Vec3(0.1, -0.5, 0.9), VecX::Zero(3)};
  const VirtualForce f1 = force_on("planar", "link3", Vec3(1, 2, 0.5));
  const VirtualForce f2 = force_on("planar", "link3", Vec3(-0.3, 0.7, 2));
  const VirtualForce sum = force_on("planar", "link3", f1.vector + f2.vector);
  const VecX t1 = joint_torques(model, state, std::span(&f1, 1), BlockingLink::Off);
  const VecX t2 = joint_torques(model, state, std::span(&f2, 1), BlockingLink::Off);
  const VecX ts = joint_torques(model, state, std::span(&sum, 1), BlockingLink::Off);
  EXPECT_LT((ts - t1 - t2).norm(), 1e-12);
}

TEST(Postural, ZeroForceConvergesMonotonicallyToEquilibrium) {
  const auto model = oracle::planar_chain(3);
  const VecX q_eq = Vec3(0.2, -0.3, 0.4);
  // overdamped per joint: D^2 > 4 M K
  const auto params = AdmittanceParams::uniform(3, 1.0, 4.0, 10.0, q_eq, 0.01);
  kin::JointState state{Vec3(1.0, 0.5, -0.6), VecX::Zero(3)};
  PosturalReference ref{state.q, VecX::Zero(3)};
  double prev = (ref.q_ref - q_eq).norm();
  for (int i = 0; i < 2000; ++i) {
    ref = postural_step(model, state, {}, params, BlockingLink::Off, ref);
    state.q = ref.q_ref;
    const double dist = (ref.q_ref - q_eq).norm();
    ASSERT_LE(dist, prev + 1e-12);
    prev = dist;
  }
  EXPECT_LT(prev, 1e-3);
}

TEST(Postural, ReferenceClampedToLimits) {
  auto model = oracle::planar_chain(1);
  model.joints[0].max = 0.1;
  kin::JointState state{VecX::Constant(1, 0.099), VecX::Zero(1)};
  const VirtualForce f = force_on("planar", "link1", Vec3(0, 100, 0));
  const auto params = AdmittanceParams::uniform(1, 1.0, 0.0, 1.0, VecX::Zero(1));
  const auto next = postural_step(model, state, std::span(&f, 1), params, BlockingLink::Off, {state.q, VecX::Zero(1)});
  EXPECT_DOUBLE_EQ(next.q_ref[0], 0.1);
}

TEST(Postural, InvalidParamsRejected) {
  auto params = AdmittanceParams::uniform(2, 0.0, 0.0, 1.0, VecX::Zero(2));
  EXPECT_THROW(params.validate(2), ConfigError);
  params = AdmittanceParams::uniform(2, 1.0, -1.0, 1.0, VecX::Zero(2));
  EXPECT_THROW(params.validate(2), ConfigError);
  params = AdmittanceParams::uniform(2, 1.0, 0.0, 1.0, VecX::Zero(2));
  EXPECT_THROW(params.validate(3), ConfigError);
}

TEST(CartesianRef, DiagonalScaling) {
  EXPECT_TRUE(cartesian_ref(Vec3::Zero(), CartesianGain{}).isZero(0.0));
  const Vec3 v = cartesian_ref(Vec3(1, 2, 0), CartesianGain{Vec3::Constant(0.1)});
  EXPECT_NEAR((v - Vec3(0.1, 0.2, 0)).norm(), 0.0, 1e-15);
}

TEST(CartesianRef, PlanarBaseIgnoresVerticalForce) {
  const Vec3 v = cartesian_ref(Vec3(0, 0, 5), CartesianGain{Vec3(0.1, 0.1, 0.0)});
  EXPECT_TRUE(v.isZero(0.0));
}

TEST(Mirror, SagittalReflection) {
  EXPECT_EQ(mirror_force(Vec3(1, 2, 3), Vec3::UnitY()), Vec3(1, -2, 3));
  EXPECT_EQ(mirror_force(Vec3(1, 0, 3), Vec3::UnitY()), Vec3(1, 0, 3));
}

TEST(Mirror, Involution) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  for (int i = 0; i < 500; ++i) {
    const Vec3 n = Vec3(g(rng), g(rng), g(rng)).normalized();
    const Vec3 f(g(rng), g(rng), g(rng));
    EXPECT_LT((mirror_force(mirror_force(f, n), n) - f).norm(), 1e-12);
    EXPECT_NEAR(mirror_force(f, n).norm(), f.norm(), 1e-12);
  }
}
