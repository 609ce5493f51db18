#include "tpo/sim/world.hpp"

#include <algorithm>
#include <cmath>

namespace tpo::sim {

namespace {

double clamp_abs(double v, double limit) { return std::clamp(v, -limit, limit); }

void integrate_arm(const kin::ChainModel& arm, VecX& q, const VecX& qd, double dt) {
  if (qd.size() == 0) return;
  if (qd.size() != q.size()) throw DimensionError("arm velocity command has the wrong size");
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    const auto& j = arm.joints[static_cast<std::size_t>(i)];
    q[i] = std::clamp(q[i] + clamp_abs(qd[i], j.vel_limit) * dt, j.min, j.max);
  }
}

}  // namespace

GraspResult grasp_check(double mass, double f_nl, double f_nr, double mu_s, double g) {
  return mu_s * (f_nl + f_nr) >= mass * g ? GraspResult::Holds : GraspResult::Slips;
}

World::World(RobotModel model, WorldConfig config, WorldState initial)
    : model_(std::move(model)), config_(config), state_(std::move(initial)), rng_(config.seed) {
  if (!(config_.dt > 0.0)) throw ConfigError("world dt must be positive");
  if (!(config_.mu_s > 0.0)) throw ConfigError("mu_s must be positive");
  if (state_.robot.q_left.size() == 0) state_.robot.q_left = model_.config().home_left;
  if (state_.robot.q_right.size() == 0) state_.robot.q_right = model_.config().home_right;
}

void World::step(const Commands& c) {
  const RobotConfig& rc = model_.config();
  const double dt = config_.dt;
  RobotState& r = state_.robot;

  Vec3 twist = c.base_twist;
  const double planar = twist.head<2>().norm();
  if (planar > rc.planar_vel) twist.head<2>() *= rc.planar_vel / planar;
  twist.z() = clamp_abs(twist.z(), rc.yaw_vel);
  const double cy = std::cos(r.base.yaw), sy = std::sin(r.base.yaw);
  r.base.x += (cy * twist.x() - sy * twist.y()) * dt;
  r.base.y += (sy * twist.x() + cy * twist.y()) * dt;
  r.base.yaw = wrap_angle(r.base.yaw + twist.z() * dt);
  r.pelvis_z = std::clamp(r.pelvis_z + clamp_abs(c.squat_rate, rc.squat_vel) * dt, rc.squat_min, rc.squat_max);

  integrate_arm(rc.left_arm, r.q_left, c.qd_left, dt);
  integrate_arm(rc.right_arm, r.q_right, c.qd_right, dt);
  r.head_pitch = std::clamp(r.head_pitch + clamp_abs(c.head_rate, rc.pitch_vel) * dt, rc.pitch_min, rc.pitch_max);

  const double previous_gripper = r.gripper;
  if (c.gripper_target) {
    const double target = std::clamp(*c.gripper_target, 0.0, 1.0);
    const double max_step = rc.gripper_speed * dt;
    r.gripper += std::clamp(target - r.gripper, -max_step, max_step);
  }

  update_hold();
  update_gripper(previous_gripper);
  state_.clock += dt;
}

void World::begin_hold(int object) {
  if (object < 0 || object >= static_cast<int>(state_.objects.size())) throw Error("begin_hold: no such object");
  const Vec3 pl = model_.ee_position(state_.robot, Side::Left);
  const Vec3 pr = model_.ee_position(state_.robot, Side::Right);
  const Mat3 rb = bimanual::object_frame(pl, pr);
  const Vec3 mid = 0.5 * (pl + pr);
  ObjectState& obj = state_.objects[static_cast<std::size_t>(object)];
  BimanualHold h;
  h.active = true;
  h.object = object;
  // The contacts squeeze the object along its own y axis.
  h.width = 2.0 * obj.half_extents.y();
  h.offset = rb.transpose() * (obj.position - mid);
  h.yaw_offset = wrap_angle(obj.yaw - std::atan2(rb(1, 0), rb(0, 0)));
  state_.hold = h;
  obj.grasped = true;
  update_hold();
}

void World::end_hold() {
  if (state_.hold.object >= 0) {
    ObjectState& obj = state_.objects[static_cast<std::size_t>(state_.hold.object)];
    obj.grasped = false;
    obj.position.z() = obj.support_z;
  }
  state_.hold = BimanualHold{};
  state_.normal_force = 0.0;
}

double World::contact_separation() const {
  return (model_.ee_position(state_.robot, Side::Left) - model_.ee_position(state_.robot, Side::Right)).norm();
}

void World::update_hold() {
  BimanualHold& h = state_.hold;
  if (!h.active) {
    state_.normal_force = 0.0;
    return;
  }
  const Vec3 pl = model_.ee_position(state_.robot, Side::Left);
  const Vec3 pr = model_.ee_position(state_.robot, Side::Right);
  state_.normal_force = config_.contact_stiffness * std::max(0.0, h.width - (pl - pr).norm());
  ObjectState& obj = state_.objects[static_cast<std::size_t>(h.object)];

  const Mat3 rb = bimanual::object_frame(pl, pr);
  const Vec3 carried = 0.5 * (pl + pr) + rb * h.offset;
  const bool wants_lift = carried.z() > obj.support_z + 1e-4;
  if (wants_lift) {
    if (grasp_check(obj.mass, state_.normal_force, state_.normal_force, config_.mu_s) == GraspResult::Slips) {
      h.slipped = true;
      ++state_.slip_count;
      end_hold();
      return;
    }
    h.lifted = true;
    obj.position = carried;
    obj.yaw = wrap_angle(std::atan2(rb(1, 0), rb(0, 0)) + h.yaw_offset);
  } else {
    h.lifted = false;
    obj.position.z() = obj.support_z;
  }
}

void World::update_gripper(double previous) {
  RobotState& r = state_.robot;
  const Vec3 ee = model_.ee_position(r, Side::Right);
  if (state_.gripper_object >= 0) {
    ObjectState& obj = state_.objects[static_cast<std::size_t>(state_.gripper_object)];
    if (r.gripper < 0.5) {
      obj.grasped = false;
      obj.position.z() = obj.support_z;
      state_.gripper_object = -1;
    } else {
      obj.position = ee + state_.gripper_offset;
    }
    return;
  }
  // Attach on the step the gripper finishes closing.
  if (previous < 1.0 && r.gripper >= 1.0) {
    int best = -1;
    double best_d = config_.gripper_reach;
    for (std::size_t i = 0; i < state_.objects.size(); ++i) {
      if (state_.objects[i].grasped) continue;
      const double d = (state_.objects[i].position - ee).norm();
      if (d <= best_d) {
        best_d = d;
        best = static_cast<int>(i);
      }
    }
    if (best >= 0) {
      state_.gripper_object = best;
      state_.gripper_offset = state_.objects[static_cast<std::size_t>(best)].position - ee;
      state_.objects[static_cast<std::size_t>(best)].grasped = true;
    }
  }
}

bimanual::EEForce World::sense_forces() {
  bimanual::EEForce f;
  const BimanualHold& h = state_.hold;
  if (h.active) {
    const double fn = state_.normal_force;
    f.left.y() = fn;
    f.right.y() = -fn;
    if (h.lifted) {
      // Weight carried symmetrically, pushing each hand down.
      const Vec3 load(0.0, 0.0, -0.5 * state_.objects[static_cast<std::size_t>(h.object)].mass * kGravity);
      const Mat3 rb = bimanual::object_frame(model_.ee_position(state_.robot, Side::Left),
                                             model_.ee_position(state_.robot, Side::Right));
      f.left += rb.transpose() * load;
      f.right += rb.transpose() * load;
    }
  }
  const double s = config_.force_noise;
  if (s > 0.0) {
    for (int i = 0; i < 3; ++i) f.left[i] += s * noise_(rng_);
    for (int i = 0; i < 3; ++i) f.right[i] += s * noise_(rng_);
  }
  state_.sensed = f;
  return f;
}

}  // namespace tpo::sim
