#include <cmath>

#include <gtest/gtest.h>

#include "tpo/acceptance/oracles.hpp"
#include "tpo/bt/parser.hpp"
#include "tpo/sim/controllers.hpp"
#include "tpo/sim/world.hpp"

using namespace tpo;
using namespace tpo::sim;

namespace {

RobotModel standard_model() { return RobotModel(RobotConfig::standard()); }

WorldState initial_state(const RobotModel& model) {
  WorldState s;
  s.robot = model.home_state();
  return s;
}

World quiet_world(double noise = 0.0, std::uint64_t seed = 1) {
  RobotModel model = standard_model();
  WorldConfig cfg;
  cfg.force_noise = noise;
  cfg.seed = seed;
  WorldState s = initial_state(model);
  return World(model, cfg, s);
}

ObjectState box_between_hands(const World& w, double half_y, double mass) {
  const Vec3 pl = w.model().ee_position(w.state().robot, Side::Left);
  const Vec3 pr = w.model().ee_position(w.state().robot, Side::Right);
  ObjectState box;
  box.name = "box";
  box.position = 0.5 * (pl + pr);
  box.half_extents = Vec3(0.1, half_y, 0.1);
  box.mass = mass;
  box.support_z = box.position.z();
  return box;
}

}  // namespace

TEST(Robot, EeJacobianMatchesFiniteDifference) {
  const RobotModel model = standard_model();
  RobotState s = model.home_state();
  s.base = {0.3, -0.2, 0.7};
  s.pelvis_z = 0.8;
  for (Side side : {Side::Left, Side::Right}) {
    const Mat3X j = model.arm_jacobian(s, side);
    for (Eigen::Index i = 0; i < j.cols(); ++i) {
      RobotState a = s, b = s;
      const double h = 1e-6;
      (side == Side::Left ? a.q_left : a.q_right)[i] += h;
      (side == Side::Left ? b.q_left : b.q_right)[i] -= h;
      const Vec3 fd = (model.ee_position(a, side) - model.ee_position(b, side)) / (2 * h);
      EXPECT_LT((fd - j.col(i)).norm(), 1e-6);
    }
  }
}

TEST(Robot, ArmsAreMirrored) {
  const RobotModel model = standard_model();
  const RobotState s = model.home_state();
  const Vec3 l = model.ee_position(s, Side::Left);
  const Vec3 r = model.ee_position(s, Side::Right);
  EXPECT_NEAR(l.x(), r.x(), 1e-12);
  EXPECT_NEAR(l.y(), -r.y(), 1e-12);
  EXPECT_NEAR(l.z(), r.z(), 1e-12);
  EXPECT_THROW(side_from_string("middle"), ConfigError);
}

TEST(GazeRef, Examples) {
  const RobotModel model = standard_model();
  const RobotState s = model.home_state();
  const Vec3 cam = model.camera_position(s);
  EXPECT_NEAR(gaze_ref(model, s, cam + Vec3(2.0, 0.0, 0.0)), 0.0, 1e-12);

  // Camera at height h, goal on the floor h metres ahead.
  const double h = cam.z();
  EXPECT_NEAR(gaze_ref(model, s, Vec3(cam.x() + h, cam.y(), 0.0)), -kPi / 4.0, 1e-12);

  const double behind = gaze_ref(model, s, cam + Vec3(-1.0, 0.0, 0.0));
  EXPECT_TRUE(behind == model.config().pitch_min || behind == model.config().pitch_max);
  EXPECT_EQ(gaze_ref(model, s, cam + Vec3(0.1, 0.0, -5.0)), model.config().pitch_min);
}

TEST(WorldStep, ZeroCommandsOnlyAdvanceClock) {
  World w = quiet_world();
  ObjectState box;
  box.name = "b";
  box.position = Vec3(2, 0, 0.1);
  w.mutable_state().objects.push_back(box);
  const WorldState before = w.state();
  w.step(Commands{});
  EXPECT_DOUBLE_EQ(w.state().clock, 0.01);
  EXPECT_EQ(w.state().robot.base, before.robot.base);
  EXPECT_EQ(w.state().robot.q_left, before.robot.q_left);
  EXPECT_EQ(w.state().robot.q_right, before.robot.q_right);
  EXPECT_EQ(w.state().robot.pelvis_z, before.robot.pelvis_z);
  EXPECT_EQ(w.state().objects[0].position, before.objects[0].position);
}

TEST(WorldStep, ConstantTwistEulerSum) {
  World w = quiet_world();
  Commands c;
  c.base_twist = Vec3(0.1, 0.0, 0.0);
  double expected = 0.0;
  for (int i = 0; i < 100; ++i) {
    w.step(c);
    expected += 0.1 * 0.01;
  }
  EXPECT_NEAR(w.state().robot.base.x, expected, 1e-12);
  EXPECT_NEAR(w.state().robot.base.x, 0.1, 1e-12);
  EXPECT_NEAR(w.state().clock, 1.0, 1e-9);
}

TEST(WorldStep, LimitsClamp) {
  World w = quiet_world();
  Commands c;
  c.base_twist = Vec3(10.0, 0.0, 10.0);
  c.squat_rate = -10.0;
  c.qd_right = VecX::Constant(4, 100.0);
  for (int i = 0; i < 500; ++i) w.step(c);
  const RobotConfig& rc = w.model().config();
  EXPECT_NEAR(w.state().robot.pelvis_z, rc.squat_min, 1e-12);
  for (std::size_t i = 0; i < 4; ++i)
    EXPECT_LE(w.state().robot.q_right[static_cast<Eigen::Index>(i)], rc.right_arm.joints[i].max);
  EXPECT_THROW(
      {
        Commands bad;
        bad.qd_left = VecX::Zero(3);
        w.step(bad);
      },
      DimensionError);
}

TEST(GraspCheck, Examples) {
  EXPECT_EQ(grasp_check(1.958, 24.16, 24.16, 0.6), GraspResult::Holds);
  EXPECT_EQ(grasp_check(2.0, 10.0, 10.0, 0.6), GraspResult::Slips);
  EXPECT_EQ(grasp_check(1.0, 0.0, 0.0, 0.6), GraspResult::Slips);
  // Boundary: equality holds.
  EXPECT_EQ(grasp_check(1.0, 0.5 * kGravity / 0.6, 0.5 * kGravity / 0.6, 0.6), GraspResult::Holds);
}

TEST(SenseForces, SymmetricHoldWithoutNoise) {
  World w = quiet_world();
  w.mutable_state().objects.push_back(box_between_hands(w, 0.2, 2.0));
  // Width chosen so that f_N = k_c (width - separation) = 24.16 N.
  const double sep = w.contact_separation();
  w.mutable_state().objects[0].half_extents.y() = 0.5 * (sep + 24.16 / w.config().contact_stiffness);
  w.begin_hold(0);
  auto f = w.sense_forces();
  EXPECT_NEAR(f.left.y(), 24.16, 1e-9);
  EXPECT_NEAR(f.right.y(), -24.16, 1e-9);
  EXPECT_NEAR(f.left.z(), 0.0, 1e-12);

  // Lift both hands by 5 cm.
  Commands c;
  c.squat_rate = 0.1;
  for (int i = 0; i < 50; ++i) w.step(c);
  ASSERT_TRUE(w.state().hold.lifted);
  f = w.sense_forces();
  EXPECT_NEAR(f.left.z(), -0.5 * 2.0 * kGravity, 1e-9);
  EXPECT_NEAR(f.right.z(), -0.5 * 2.0 * kGravity, 1e-9);
  EXPECT_NEAR(std::abs(f.left.z()), 9.81, 1e-9);
}

TEST(SenseForces, NoiseMeanWithinCltBound) {
  World w = quiet_world(0.1, 7);
  const double sep = w.contact_separation();
  ObjectState box = box_between_hands(w, 0.5 * (sep + 0.0005), 2.0);
  w.mutable_state().objects.push_back(box);
  w.begin_hold(0);
  const double truth = w.state().normal_force;
  const int n = 10000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += w.sense_forces().left.y();
  EXPECT_LE(std::abs(sum / n - truth), 3.0 * 0.1 / 100.0);
}

TEST(SenseForces, SameSeedSameSamples) {
  World a = quiet_world(0.1, 42), b = quiet_world(0.1, 42), c = quiet_world(0.1, 43);
  for (int i = 0; i < 5; ++i) {
    const auto fa = a.sense_forces(), fb = b.sense_forces(), fc = c.sense_forces();
    EXPECT_EQ(fa.left, fb.left);
    EXPECT_EQ(fa.right, fb.right);
    EXPECT_NE(fa.left, fc.left);
  }
}

TEST(Hold, GraspedObjectFollowsMidpoint) {
  World w = quiet_world();
  const double sep = w.contact_separation();
  w.mutable_state().objects.push_back(box_between_hands(w, 0.5 * (sep + 0.001), 1.0));
  w.begin_hold(0);
  Commands lift;
  lift.squat_rate = 0.1;
  for (int i = 0; i < 10; ++i) w.step(lift);
  ASSERT_TRUE(w.state().hold.lifted);
  const Vec3 before = w.state().objects[0].position;
  const Vec3 mid_before = 0.5 * (w.model().ee_position(w.state().robot, Side::Left) +
                                 w.model().ee_position(w.state().robot, Side::Right));
  Commands move;
  move.base_twist = Vec3(0.2, 0.0, 0.0);
  for (int i = 0; i < 100; ++i) w.step(move);
  const Vec3 mid_after = 0.5 * (w.model().ee_position(w.state().robot, Side::Left) +
                                w.model().ee_position(w.state().robot, Side::Right));
  EXPECT_NEAR((mid_after - mid_before).norm(), 0.2, 1e-9);
  EXPECT_LT(((w.state().objects[0].position - before) - (mid_after - mid_before)).norm(), 1e-9);
}

TEST(Hold, SlipDropsObjectAndIsMonotone) {
  World w = quiet_world();
  const double sep = w.contact_separation();
  // 10 N per side on a 2 kg object cannot hold.
  w.mutable_state().objects.push_back(box_between_hands(w, 0.5 * (sep + 10.0 / 5e4), 2.0));
  w.begin_hold(0);
  const double support = w.state().objects[0].support_z;
  Commands lift;
  lift.squat_rate = 0.1;
  for (int i = 0; i < 30; ++i) w.step(lift);
  EXPECT_EQ(w.state().slip_count, 1);
  EXPECT_FALSE(w.state().hold.active);
  EXPECT_FALSE(w.state().objects[0].grasped);
  EXPECT_DOUBLE_EQ(w.state().objects[0].position.z(), support);
  // No hold is re-established without a new grasp event.
  for (int i = 0; i < 30; ++i) w.step(lift);
  EXPECT_EQ(w.state().slip_count, 1);
  EXPECT_FALSE(w.state().hold.active);
}

TEST(Hold, ConstantContactDistanceUnderRigidMotion) {
  World w = quiet_world();
  const double sep = w.contact_separation();
  w.mutable_state().objects.push_back(box_between_hands(w, 0.5 * (sep + 0.0005), 1.0));
  w.begin_hold(0);
  Commands c;
  c.base_twist = Vec3(0.2, 0.1, 0.3);
  c.squat_rate = 0.05;
  double prev = w.contact_separation();
  for (int i = 0; i < 300; ++i) {
    w.step(c);
    const double d = w.contact_separation();
    EXPECT_LE(std::abs(d - prev), 1e-6);
    prev = d;
  }
}

TEST(Hold, CooperativeLoopDecaysOffsetError) {
  World w = quiet_world();
  const RobotModel& model = w.model();
  const Vec3 offset0 = model.ee_position(w.state().robot, Side::Right) - model.ee_position(w.state().robot, Side::Left);
  // Perturb the right arm so the hold offset is violated by a couple of centimetres.
  w.mutable_state().robot.q_right[1] += 0.05;
  bimanual::CoopParams params;
  params.damping = Vec3::Constant(2500.0);
  params.stiffness = Vec3::Constant(2500.0);
  params.p_offset_t0 = offset0;
  auto error = [&] {
    const RobotState& s = w.state().robot;
    return (model.ee_position(s, Side::Right) - model.ee_position(s, Side::Left) - offset0).norm();
  };
  double prev = error();
  ASSERT_GT(prev, 0.01);
  for (int i = 0; i < 1500; ++i) {
    const RobotState& s = w.state().robot;
    const Vec3 pl = model.ee_position(s, Side::Left), pr = model.ee_position(s, Side::Right);
    params.r_b = bimanual::object_frame(pl, pr);
    const bimanual::EEForce none;
    const auto v = bimanual::coop_step(Vec3::Zero(), none, none, pl, pr, params);
    Commands c;
    c.qd_left = kin::dls_solve(model.arm_jacobian(s, Side::Left), v.left, 1e-3);
    c.qd_right = kin::dls_solve(model.arm_jacobian(s, Side::Right), v.right, 1e-3);
    w.step(c);
    const double e = error();
    EXPECT_LE(e, prev + 1e-12);
    prev = e;
  }
  EXPECT_LT(prev, 1e-3);
}

TEST(Pid, ClampAfterProportionalTerm) {
  ControllerGoal g;
  g.gains = PidGains{};
  g.max_linear = 0.15;
  const CartesianRef ref = pid_cartesian_ref(g, Vec3(0.2, 0, 0), Vec3::Zero(), 0.01);
  EXPECT_NEAR(ref.linear.x(), 0.15, 1e-15);
  EXPECT_EQ(ref.linear.y(), 0.0);
  const CartesianRef at_goal = pid_cartesian_ref(g, Vec3(1, 2, 3), Vec3(1, 2, 3), 0.01);
  EXPECT_EQ(at_goal.linear, Vec3::Zero());
  EXPECT_TRUE(at_goal.converged);
}

TEST(Pid, IntegralAndDerivativeTerms) {
  Pid3 pid(PidGains{Vec3::Zero(), Vec3::Constant(2.0), Vec3::Constant(0.5)}, 100.0);
  const Vec3 e1(0.1, 0, 0);
  Vec3 out = pid.update(e1, 0.01);
  EXPECT_NEAR(out.x(), 2.0 * 0.001, 1e-15);
  out = pid.update(Vec3(0.3, 0, 0), 0.01);
  EXPECT_NEAR(out.x(), 2.0 * 0.004 + 0.5 * 0.2 / 0.01, 1e-12);
  EXPECT_THROW(Pid3(PidGains{}, 0.0), ConfigError);
}

TEST(Pid, ReachLatchesTrackFollows) {
  ControllerGoal g;
  g.max_linear = 10.0;
  g.params.command_mode = bt::CommandMode::Reach;
  CartesianPid reach(g);
  g.params.command_mode = bt::CommandMode::Track;
  CartesianPid track(g);
  reach.update(Vec3(1, 0, 0), Vec3::Zero(), 0, 0, 0.01);
  track.update(Vec3(1, 0, 0), Vec3::Zero(), 0, 0, 0.01);
  const Vec3 r = reach.update(Vec3(5, 0, 0), Vec3::Zero(), 0, 0, 0.01).linear;
  const Vec3 t = track.update(Vec3(5, 0, 0), Vec3::Zero(), 0, 0, 0.01).linear;
  EXPECT_NEAR(r.x(), 1.0, 1e-12);
  EXPECT_NEAR(t.x(), 5.0, 1e-12);
}

TEST(Pid, KeepHoldsStartPoseAndNoneIsSilent) {
  ControllerGoal g;
  g.max_linear = 10.0;
  g.params.linear_mode = bt::AxisMode::Keep;
  CartesianPid keep(g);
  keep.update(Vec3(9, 9, 9), Vec3(1, 1, 1), 0, 0, 0.01);
  const CartesianRef k = keep.update(Vec3(9, 9, 9), Vec3(1.5, 1, 1), 0, 0, 0.01);
  EXPECT_NEAR(k.linear.x(), -0.5, 1e-12);

  g.params.linear_mode = bt::AxisMode::None;
  g.params.angular_mode = bt::AxisMode::Set;
  CartesianPid none(g);
  const CartesianRef n = none.update(Vec3(0, 1, 0), Vec3::Zero(), 0, 0, 0.01);
  EXPECT_EQ(n.linear, Vec3::Zero());
  ASSERT_TRUE(n.yaw_rate.has_value());
  EXPECT_GT(*n.yaw_rate, 0.0);
}

TEST(Pid, OffsetRotatesWithFrame) {
  ControllerGoal g;
  g.max_linear = 10.0;
  g.params.final_goal_distance = Vec3(-1, 0, 0);
  CartesianPid pid(g);
  const CartesianRef r = pid.update(Vec3(2, 0, 0), Vec3::Zero(), 0, kPi / 2, 0.01);
  EXPECT_NEAR(r.linear.x(), 2.0, 1e-12);
  EXPECT_NEAR(r.linear.y(), -1.0, 1e-12);
}

namespace {

struct Loop {
  World world = quiet_world();
  bt::ActionChannel channel;
  bt::Blackboard bb;
  ActionController controller;

  void start(const std::string& doc) {
    const bt::BtNode leaf = bt::parse_tree(doc);
    token = channel.start(leaf);
  }
  std::optional<bt::Status> run(int steps) {
    for (int i = 0; i < steps; ++i) {
      world.step(controller.update(channel, bb, world));
      if (auto r = channel.take_reply(token)) return r;
    }
    return std::nullopt;
  }
  std::uint64_t token = 0;
};

}  // namespace

TEST(ActionController, BaseYawTurnsTowardGoal) {
  Loop l;
  l.bb.set("goal", Vec3(0.0, 3.0, 0.0));
  l.start("action(base_yaw_tracking, angular_error_norm = 0.02)");
  ASSERT_EQ(l.run(1000), bt::Status::Success);
  EXPECT_NEAR(l.world.state().robot.base.yaw, kPi / 2, 0.02 + 1e-9);
  EXPECT_NEAR(l.world.state().robot.base.x, 0.0, 1e-12);
}

TEST(ActionController, BasePlanarReachesOffsetTarget) {
  Loop l;
  l.bb.set("goal", Vec3(2.0, 0.5, 0.0));
  l.start("action(base_planar_tracking, final_goal_distance = \"-0.6;0;0\", linear_error_norm = 0.02)");
  ASSERT_EQ(l.run(2000), bt::Status::Success);
  const PlanarPose& p = l.world.state().robot.base;
  EXPECT_LE(std::hypot(p.x - 1.4, p.y - 0.5), 0.02);
}

TEST(ActionController, ArmReachesGoalAndRelativeMove) {
  Loop l;
  const Vec3 ee0 = l.world.model().ee_position(l.world.state().robot, Side::Right);
  l.bb.set("goal", Vec3(ee0 + Vec3(0.08, 0.05, 0.05)));
  l.start("action(arm_tracking, linear_error_norm = 0.005)");
  ASSERT_EQ(l.run(2000), bt::Status::Success);
  EXPECT_LE((l.world.model().ee_position(l.world.state().robot, Side::Right) - (ee0 + Vec3(0.08, 0.05, 0.05))).norm(),
            0.005);

  const Vec3 ee1 = l.world.model().ee_position(l.world.state().robot, Side::Left);
  l.start("action(arm_tracking, arm = left, goal_frame = left_ee, command_mode = Reach, "
          "final_goal_distance = \"0.05;0;0\", linear_error_norm = 0.005)");
  ASSERT_EQ(l.run(2000), bt::Status::Success);
  const Vec3 ee2 = l.world.model().ee_position(l.world.state().robot, Side::Left);
  EXPECT_NEAR((ee2 - ee1).x(), 0.05, 0.006);
}

TEST(ActionController, MissingGoalFails) {
  Loop l;
  l.start("action(base_planar_tracking, goal_frame = nowhere)");
  EXPECT_EQ(l.run(5), bt::Status::Failure);
}

TEST(ActionController, GazeSucceedsAtOnceAndKeepsTracking) {
  Loop l;
  const Vec3 cam = l.world.model().camera_position(l.world.state().robot);
  l.bb.set("goal", Vec3(cam + Vec3(1.0, 0.0, -1.0)));
  l.start("action(gaze_tracking)");
  EXPECT_EQ(l.run(3), bt::Status::Success);
  for (int i = 0; i < 300; ++i) l.world.step(l.controller.update(l.channel, l.bb, l.world));
  EXPECT_NEAR(l.world.state().robot.head_pitch, -kPi / 4, 1e-3);
  EXPECT_EQ(l.controller.active_modules().count("gaze_tracking"), 1u);
}

TEST(ActionController, GripperAndSquat) {
  Loop l;
  l.start("action(gripper_close)");
  ASSERT_EQ(l.run(200), bt::Status::Success);
  EXPECT_DOUBLE_EQ(l.world.state().robot.gripper, 1.0);

  l.bb.set("goal", Vec3(0, 0, 0.75));
  l.start("action(squat_tracking, linear_error_norm = 0.01)");
  ASSERT_EQ(l.run(1000), bt::Status::Success);
  EXPECT_NEAR(l.world.state().robot.pelvis_z, 0.75, 0.01);

  l.bb.set("goal", Vec3(0, 0, 0.2));
  l.start("action(squat_tracking, linear_error_norm = 0.01)");
  EXPECT_EQ(l.run(1000), bt::Status::Failure);
  EXPECT_NEAR(l.world.state().robot.pelvis_z, l.world.model().config().squat_min, 0.01);
}

TEST(ActionController, AbortStopsCommands) {
  Loop l;
  l.bb.set("goal", Vec3(5.0, 0.0, 0.0));
  l.start("action(base_planar_tracking)");
  l.run(10);
  l.channel.abort(l.token);
  const Commands c = l.controller.update(l.channel, l.bb, l.world);
  EXPECT_EQ(c.base_twist, Vec3::Zero());
  EXPECT_TRUE(l.controller.active_modules().empty());
}

TEST(WorldDeterminism, SameSeedSameTrajectory) {
  auto run = [](std::uint64_t seed) {
    World w = quiet_world(0.1, seed);
    const double sep = w.contact_separation();
    w.mutable_state().objects.push_back(box_between_hands(w, 0.5 * (sep + 0.0006), 1.5));
    w.begin_hold(0);
    std::vector<double> trace;
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-0.2, 0.2);
    for (int i = 0; i < 200; ++i) {
      Commands c;
      c.base_twist = Vec3(u(rng), u(rng), u(rng));
      c.squat_rate = u(rng);
      w.step(c);
      const auto f = w.sense_forces();
      trace.push_back(w.state().robot.base.x);
      trace.push_back(f.left.y());
      trace.push_back(w.state().objects[0].position.z());
    }
    return trace;
  };
  EXPECT_EQ(run(5), run(5));
  EXPECT_NE(run(5), run(6));
}
