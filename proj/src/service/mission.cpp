#include "tpo/service/mission.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace tpo::service {

namespace {

using sim::Side;

Vec3 clamp_norm(const Vec3& v, double max) {
  const double n = v.norm();
  return n > max ? Vec3(v * (max / n)) : v;
}

Vec3 world_to_body(const Vec3& v, double yaw) {
  const double c = std::cos(yaw), s = std::sin(yaw);
  return Vec3(c * v.x() + s * v.y(), -s * v.x() + c * v.y(), v.z());
}

Vec3 body_to_world(const Vec3& v, double yaw) {
  const double c = std::cos(yaw), s = std::sin(yaw);
  return Vec3(c * v.x() - s * v.y(), s * v.x() + c * v.y(), v.z());
}

Side side_of(const TraceEvent& e) { return sim::side_from_string(e.data.value("side", std::string("right"))); }

std::string join(const std::set<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : "+") + s;
  return out;
}

constexpr int kSettleSteps = 20;

}  // namespace

Mission::Mission(Scenario scenario, std::optional<bt::BtNode> tree, OperatorTrace trace,
                 std::optional<std::uint64_t> seed)
    : scenario_(std::move(scenario)),
      seed_(seed.value_or(scenario_.seed)),
      trace_(std::move(trace)),
      cursor_(trace_),
      controller_(scenario_.gains),
      spot_noise_(scenario_.perception.spot_noise, seed_ ^ 0x9e3779b97f4a7c15ULL),
      smoother_(scenario_.perception.smoothing_hz),
      dwell_(scenario_.perception.dwell_radius, scenario_.perception.dwell_time),
      keyboard_selector_(scenario_.perception.keyboard_dwell) {
  trace_.validate();
  sim::RobotModel model(scenario_.robot);
  sim::WorldState ws;
  ws.robot = model.home_state();
  ws.robot.base = scenario_.base;
  if (scenario_.pelvis_z) ws.robot.pelvis_z = *scenario_.pelvis_z;
  ws.objects = scenario_.objects;
  sim::WorldConfig wc;
  wc.dt = scenario_.dt;
  wc.contact_stiffness = scenario_.contact_stiffness;
  wc.mu_s = scenario_.mu_s;
  wc.force_noise = scenario_.force_noise;
  wc.seed = seed_;
  world_ = std::make_unique<sim::World>(model, wc, ws);

  for (const TraceEvent& e : trace_.events) {
    if (e.type == "emitter")
      emitter_keys_.push_back({e.t, vec3_from_json(e.data.at("position")), vec3_from_json(e.data.at("target"))});
    if (e.type == "object_velocity") transport_events_.push_back(e);
  }

  if (tree) {
    env_ = std::make_unique<bt::StandardEnvironment>(
        [this] {
          const sim::RobotState& r = world_->state().robot;
          return bt::BaseState{r.base, r.pelvis_z};
        },
        scenario_.arm_range, sim::action_modules());
    tree_ = std::make_unique<bt::Tree>(std::move(*tree), *env_, channel_);
  }

  for (SideInput* s : {&left_, &right_}) {
    s->tracker.k_cam = scenario_.tpo.k_cam;
    s->tracker.deadzone_radius = scenario_.tpo.deadzone;
    s->tracker.dt = scenario_.dt;
  }
  left_.control_point = "left_ee";
  right_.control_point = scenario_.tpo.control_point;
  right_.active = scenario_.mode == MissionMode::Tpo;
  const VecX& q = world_->state().robot.q_right;
  arm_ref_ = {q, VecX::Zero(q.size())};

  if (scenario_.mode == MissionMode::Bimanual) {
    sim::WorldState& s = world_->mutable_state();
    const Vec3 pl = model.ee_position(s.robot, Side::Left);
    const Vec3 pr = model.ee_position(s.robot, Side::Right);
    sim::ObjectState& obj = s.objects.at(static_cast<std::size_t>(scenario_.bimanual.object));
    obj.position = 0.5 * (pl + pr);
    obj.support_z = obj.position.z();
    world_->begin_hold(scenario_.bimanual.object);
    phase_ = "squeeze";
  }
}

Mission::~Mission() = default;

void Mission::inject(TraceEvent event) {
  if (!is_known_event_type(event.type)) throw ConfigError("unknown event type '" + event.type + "'");
  injected_.push_back(std::move(event));
}

std::optional<kin::RigidTransform> Mission::emitter_pose(double t) const {
  if (live_emitter_) return live_emitter_;
  auto after = std::upper_bound(emitter_keys_.begin(), emitter_keys_.end(), t + 1e-9,
                                [](double v, const EmitterKey& k) { return v < k.t; });
  if (after == emitter_keys_.begin()) return std::nullopt;
  const EmitterKey& a = *std::prev(after);
  Vec3 position = a.position, target = a.target;
  if (after != emitter_keys_.end() && after->t > a.t) {
    const double s = std::clamp((t - a.t) / (after->t - a.t), 0.0, 1.0);
    position = a.position + s * (after->position - a.position);
    target = a.target + s * (after->target - a.target);
  }
  if ((target - position).norm() < 1e-9) return std::nullopt;
  kin::RigidTransform pose;
  pose.rotation = kin::rotation_looking_along(target - position);
  pose.translation = position;
  return pose;
}

void Mission::apply(const TraceEvent& e) {
  const Json& d = e.data;
  if (e.type == "request") {
    bb_.set(bt::kPendingRequestKey, d.at("value").get<std::string>());
  } else if (e.type == "emitter") {
    const Vec3 p = vec3_from_json(d.at("position")), target = vec3_from_json(d.at("target"));
    if ((target - p).norm() < 1e-9) throw ConfigError("emitter target coincides with its position");
    kin::RigidTransform pose;
    pose.rotation = kin::rotation_looking_along(target - p);
    pose.translation = p;
    live_emitter_ = pose;
  } else if (e.type == "laser") {
    laser_on_ = d.at("on").get<bool>();
  } else if (e.type == "tracker") {
    SideInput& s = side_of(e) == Side::Left ? left_ : right_;
    s.tracker.pose_in_origin = kin::RigidTransform::from_translation(vec3_from_json(d.at("position")));
    s.tracker_seen = true;
  } else if (e.type == "reset_reference") {
    SideInput& s = side_of(e) == Side::Left ? left_ : right_;
    s.tracker = control::reset_reference(s.tracker);
  } else if (e.type == "force") {
    SideInput& s = side_of(e) == Side::Left ? left_ : right_;
    s.direct_force = vec3_from_json(d.at("vector"));
  } else if (e.type == "toggle") {
    const Side side = side_of(e);
    SideInput& s = side == Side::Left ? left_ : right_;
    s.active = d.at("on").get<bool>();
    pending_toggle_ = std::make_pair(std::string(sim::to_string(side)), s.active);
  } else if (e.type == "gripper") {
    const std::string action = d.at("action").get<std::string>();
    if (action != "open" && action != "close") throw ConfigError("gripper action must be 'open' or 'close'");
    manual_gripper_ = action == "close" ? 1.0 : 0.0;
  } else if (e.type == "control_point") {
    SideInput& s = side_of(e) == Side::Left ? left_ : right_;
    const std::string link = d.at("link").get<std::string>();
    if (!world_->model().link_position(world_->state().robot, link))
      throw ConfigError("unknown control point '" + link + "'");
    if (link != s.control_point) {
      s.control_point = link;
      ++control_point_switches_;
    }
  } else if (e.type == "object_velocity") {
    object_velocity_ = vec3_from_json(d.at("linear"));
    object_yaw_rate_ = d.value("yaw_rate", 0.0);
  }
}

void Mission::perceive(double t) {
  spot_.reset();
  const auto pose = emitter_pose(t);
  sim::WorldState& ws = world_->mutable_state();
  ws.laser_on = laser_on_ && pose.has_value();
  if (pose) ws.emitter = *pose;
  std::optional<perception::LaserSpot> hit;
  if (ws.laser_on) hit = perception::laser_raycast(scenario_.scene, *pose, t);
  if (!hit) {
    keyboard_command_ = keyboard_selector_.update(std::nullopt, t);
    dwell_.reset();
    return;
  }
  perception::LaserSpot s = scenario_.perception.spot_noise > 0.0 ? spot_noise_.apply(*hit) : *hit;
  spot_ = s;

  if (scenario_.keyboard && scenario_.keyboard->contains(s.position)) {
    keyboard_command_ = keyboard_selector_.update(perception::keyboard_hit(s.position, *scenario_.keyboard), t);
    if (keyboard_selector_.just_pressed() && keyboard_command_)
      goal_events_.push_back({t, s.position, "keyboard", *keyboard_command_});
    dwell_.reset();
    smoother_.reset();
    return;
  }
  keyboard_command_ = keyboard_selector_.update(std::nullopt, t);
  const Vec3 p = smoother_.update(s.position, t);
  if (scenario_.perception.goal_source == "spot") {
    bb_.set("goal", p);
    last_goal_ = p;
  } else if (auto g = dwell_.update(p, t)) {
    bb_.set("goal", *g);
    last_goal_ = *g;
    goal_events_.push_back({t, *g, "dwell", ""});
  }
}

void Mission::track_tree_metrics() {
  bool yaw = false, planar = false, arm = false;
  for (const std::string& a : tree_->running_actions()) {
    yaw = yaw || a == "base_yaw_tracking";
    planar = planar || a == "base_planar_tracking";
    arm = arm || a == "arm_tracking";
  }
  if (yaw && planar) ++base_overlap_steps_;
  const std::string current = yaw ? "yaw" : planar ? "planar" : "";
  if (!current.empty()) {
    if (!last_base_action_.empty() && current != last_base_action_) ++base_alternations_;
    last_base_action_ = current;
  }
  if (arm) {
    ++arm_active_steps_;
    const auto goal = bb_.vec3("goal");
    const sim::RobotState& r = world_->state().robot;
    if (!goal || !bt::goal_in_arm_range(bt::goal_in_base(*goal, {r.base, r.pelvis_z}), scenario_.arm_range, "xyz"))
      ++arm_outside_range_steps_;
  }
}

void Mission::keyboard_commands(sim::Commands& cmd) {
  if (!keyboard_command_) return;
  const perception::KeyboardCommand kc = perception::command_for(*keyboard_command_);
  if (kc.gripper_close) {
    cmd.gripper_target = *kc.gripper_close ? 1.0 : 0.0;
    return;
  }
  if (controller_.arm_active(Side::Right)) return;
  const sim::RobotState& r = world_->state().robot;
  const Vec3 v = body_to_world(kc.linear, r.base.yaw);
  cmd.qd_right = kin::dls_solve(world_->model().arm_jacobian(r, Side::Right), v, kin::kDefaultDamping);
  cmd.base_twist.z() += kc.yaw_rate;
}

Vec3 Mission::operator_force(Side side) {
  SideInput& s = side == Side::Left ? left_ : right_;
  if (!s.active) return Vec3::Zero();
  if (s.direct_force) return *s.direct_force;
  if (s.tracker_seen) return control::virtual_force(s.tracker);
  const auto& goals = scenario_.tpo.goals;
  if (side == Side::Right && goal_index_ < goals.size()) {
    const Vec3 ee = world_->model().ee_position(world_->state().robot, Side::Right);
    const Vec3 r = clamp_norm(scenario_.tpo.operator_gain * (goals[goal_index_] - ee), scenario_.tpo.operator_max);
    s.tracker.pose_in_origin = kin::RigidTransform::from_translation(r);
    return control::virtual_force(s.tracker);
  }
  return Vec3::Zero();
}

void Mission::tpo_commands(sim::Commands& cmd) {
  const TpoConfig& cfg = scenario_.tpo;
  const sim::RobotState& r = world_->state().robot;
  const Mat3X j = world_->model().arm_jacobian(r, Side::Right);
  vtr::Weights weights;
  weights.beta = vtr::transmission_ratios(j);
  if (cfg.vtr_enabled) weights = vtr::vtr_weight(weights.beta, cfg.thresholds);
  beta_ = weights.beta;
  w_ = weights.w;

  right_.force = operator_force(Side::Right);
  left_.force = operator_force(Side::Left);
  const Vec3& f = right_.force;
  VecX tau = VecX::Zero(j.cols());
  Vec3 nu = Vec3::Zero();
  if (right_.control_point == "pelvis") {
    nu = cfg.base_gain * f;
  } else if (right_.control_point == "right_ee") {
    const vtr::PosturalSplit split = vtr::split_postural(f, j, weights, vtr::BaseGain{Vec3::Constant(cfg.base_gain)});
    tau = split.tau;
    nu = split.base;
  }
  const control::AdmittanceParams p = control::AdmittanceParams::uniform(
      static_cast<std::size_t>(j.cols()), cfg.arm_mass, 0.0, cfg.arm_damping, r.q_right, scenario_.dt);
  arm_ref_ = control::admittance_step(r.q_right, tau, p, arm_ref_);
  cmd.qd_right = arm_ref_.qd_ref;
  const Vec3 body = world_to_body(nu, r.base.yaw);
  cmd.base_twist.x() += body.x();
  cmd.base_twist.y() += body.y();
  cmd.squat_rate += nu.z();
}

void Mission::bimanual_commands(sim::Commands& cmd) {
  sim::World& w = *world_;
  const BimanualConfig& cfg = scenario_.bimanual;
  if (!w.state().hold.active) {
    phase_ = "dropped";
    return;
  }
  const bimanual::EEForce sensed = w.sense_forces();
  const sim::RobotState& r = w.state().robot;
  const sim::RobotModel& model = w.model();
  const Vec3 pl = model.ee_position(r, Side::Left), pr = model.ee_position(r, Side::Right);
  const Mat3 rb = bimanual::object_frame(pl, pr);
  const sim::ObjectState& obj = w.state().objects[static_cast<std::size_t>(cfg.object)];
  const double fn = 0.5 * (sensed.left.y() - sensed.right.y());
  const auto settled = [&](double target) {
    phase_steps_ = std::abs(fn - target) <= cfg.squeeze_tolerance ? phase_steps_ + 1 : 0;
    return phase_steps_ >= kSettleSteps;
  };

  Vec3 xdot = Vec3::Zero();
  double yaw_rate = 0.0;
  Vec3 stiffness = Vec3::Zero();
  double target = cfg.grasp.f_initial;

  if (phase_ == "squeeze") {
    if (settled(target)) {
      phase_ = "lift";
      phase_steps_ = 0;
    }
  } else if (phase_ == "lift") {
    if (w.state().hold.lifted && obj.position.z() - obj.support_z >= cfg.lift_height - 1e-9) {
      phase_ = "estimate";
    } else {
      xdot.z() = cfg.lift_speed;
    }
  } else if (phase_ == "estimate") {
    lift_samples_.push_back({-sensed.left.z(), -sensed.right.z()});
    if (static_cast<int>(lift_samples_.size()) >= cfg.mass_samples) {
      mass_ = bimanual::estimate_mass(lift_samples_);
      f_bar_ = bimanual::grasp_force(mass_->m_bar, cfg.grasp.mu_s, cfg.grasp.k_margin);
      phase_ = "regulate";
      phase_steps_ = 0;
    }
  } else if (phase_ == "regulate") {
    target = f_bar_;
    if (settled(target)) {
      phase_ = "transport";
      transport_start_ = w.state().clock;
      d0_ = (pr - pl).norm();
      offset_b_ = rb.transpose() * (pr - pl);
      object_start_ = obj.position;
      yaw_start_ = r.base.yaw;
    }
  } else if (phase_ == "transport") {
    target = f_bar_;
    stiffness = cfg.stiffness;
    const double since = w.state().clock - transport_start_;
    while (transport_next_ < transport_events_.size() && transport_events_[transport_next_].t <= since + 1e-9)
      apply(transport_events_[transport_next_++]);
    xdot = object_velocity_;
    yaw_rate = object_yaw_rate_;
    max_drift_ = std::max(max_drift_, std::abs((pr - pl).norm() - d0_));
    max_force_error_ = std::max({max_force_error_, std::abs(sensed.left.y() - f_bar_), std::abs(sensed.right.y() + f_bar_)});
  }

  const Mat3X jl = model.arm_jacobian(r, Side::Left), jr = model.arm_jacobian(r, Side::Right);
  vtr::Weights weights = vtr::worst_of(vtr::vtr_weight(vtr::transmission_ratios(jl), cfg.thresholds),
                                       vtr::vtr_weight(vtr::transmission_ratios(jr), cfg.thresholds));
  beta_ = weights.beta;
  w_ = weights.w;
  Vec3 arm_xdot = xdot, nu = Vec3::Zero();
  if (phase_ == "transport") {
    const vtr::CartesianSplit split = vtr::split_cartesian(xdot, weights);
    arm_xdot = split.arm;
    nu = split.base;
  }

  bimanual::CoopParams p;
  p.damping = cfg.damping;
  p.stiffness = stiffness;
  p.r_b = rb;
  p.p_offset_t0 = rb * offset_b_;
  const bimanual::CoopVelocity v =
      bimanual::coop_step(arm_xdot, sensed, bimanual::desired_forces(sensed, target), pl, pr, p);
  cmd.qd_left = kin::dls_solve(jl, v.left, cfg.ik_damping);
  cmd.qd_right = kin::dls_solve(jr, v.right, cfg.ik_damping);
  const Vec3 body = world_to_body(nu, r.base.yaw);
  cmd.base_twist += Vec3(body.x(), body.y(), yaw_rate);
  cmd.squat_rate += nu.z();
  record_.f_bar = target;
}

void Mission::step() {
  const double t = world_->state().clock;
  pending_toggle_.reset();
  record_.f_bar = 0.0;
  for (const TraceEvent& e : cursor_.due(t)) {
    if (e.type == "emitter") continue;
    if (e.type == "object_velocity" && scenario_.mode == MissionMode::Bimanual) continue;
    apply(e);
  }
  while (!injected_.empty()) {
    const TraceEvent e = std::move(injected_.front());
    injected_.pop_front();
    apply(e);
  }

  if (!emitter_keys_.empty() || live_emitter_) perceive(t);
  if (tree_) {
    tree_->tick(bb_);
    track_tree_metrics();
  }
  sim::Commands cmd = tree_ ? controller_.update(channel_, bb_, *world_) : sim::Commands{};
  switch (scenario_.mode) {
    case MissionMode::Bt:
      keyboard_commands(cmd);
      beta_ = vtr::transmission_ratios(world_->model().arm_jacobian(world_->state().robot, Side::Right));
      break;
    case MissionMode::Tpo:
      tpo_commands(cmd);
      break;
    case MissionMode::Bimanual:
      bimanual_commands(cmd);
      break;
  }
  if (manual_gripper_ && !cmd.gripper_target) cmd.gripper_target = manual_gripper_;
  world_->step(cmd);
  ++steps_;
  finish_step();
}

void Mission::finish_step() {
  const sim::WorldState& s = world_->state();
  const sim::RobotModel& model = world_->model();

  switch (scenario_.mode) {
    case MissionMode::Bt:
      if (scenario_.tracking && last_goal_) {
        const TrackingGoal& tg = *scenario_.tracking;
        const Vec3 target = *last_goal_ + body_to_world(tg.base_offset, s.robot.base.yaw);
        final_base_error_ = std::hypot(s.robot.base.x - target.x(), s.robot.base.y - target.y());
        final_ee_error_ = (model.ee_position(s.robot, Side::Right) - *last_goal_).norm();
        const bool ee_ok = !tg.ee_tolerance || final_ee_error_ <= *tg.ee_tolerance;
        if (cursor_.exhausted() && final_base_error_ <= tg.base_tolerance && ee_ok) completed_ = true;
      }
      break;
    case MissionMode::Tpo: {
      const auto& goals = scenario_.tpo.goals;
      if (goal_index_ < goals.size() &&
          (model.ee_position(s.robot, Side::Right) - goals[goal_index_]).norm() <= scenario_.tpo.goal_tolerance) {
        goal_times_.push_back(s.clock);
        ++goal_index_;
        arm_ref_.qd_ref.setZero();
        right_.tracker.filter.reset();
        if (goal_index_ == goals.size()) completed_ = true;
      }
      break;
    }
    case MissionMode::Bimanual:
      if (s.hold.slipped || !s.hold.active) failed_ = true;
      if (phase_ == "transport" && s.clock - transport_start_ >= scenario_.bimanual.transport_time - 1e-9)
        completed_ = !failed_;
      break;
  }
  if (!completed_ && !failed_ && s.clock >= scenario_.duration - 1e-9) {
    const bool has_criterion = scenario_.mode != MissionMode::Bt || scenario_.tracking.has_value();
    if (!has_criterion) completed_ = true;
  }

  record_.t = s.clock;
  record_.q_left = s.robot.q_left;
  record_.q_right = s.robot.q_right;
  record_.base = s.robot.base;
  record_.pelvis_z = s.robot.pelvis_z;
  record_.beta = beta_;
  record_.w = w_;
  record_.f_left = s.sensed.left;
  record_.f_right = s.sensed.right;
  record_.bt_status = tree_ ? tree_->status_code() : "";
  switch (scenario_.mode) {
    case MissionMode::Bt: record_.active = join(controller_.active_modules()); break;
    case MissionMode::Tpo: record_.active = right_.active ? "tpo:" + right_.control_point : "idle"; break;
    case MissionMode::Bimanual: record_.active = phase_; break;
  }

  FeedbackInputs fi;
  fi.f_cp_left = left_.force;
  fi.f_cp_right = right_.force;
  fi.gripper_force = s.gripper_object >= 0 ? scenario_.feedback.max_grip_force * s.robot.gripper : 0.0;
  fi.left_external = s.sensed.left;
  fi.toggle = pending_toggle_;
  feedback_ = map_feedback(fi, FeedbackScale{scenario_.feedback.max_force, scenario_.feedback.max_grip_force,
                                             scenario_.feedback.max_external_force});
}

bool Mission::done() const {
  return completed_ || failed_ || world_->state().clock >= scenario_.duration - 1e-9;
}

std::vector<GoalEvent> Mission::take_goal_events() {
  goal_event_count_ += goal_events_.size();
  std::vector<GoalEvent> out;
  out.swap(goal_events_);
  return out;
}

Snapshot Mission::snapshot() const {
  const sim::WorldState& s = world_->state();
  const sim::RobotModel& model = world_->model();
  Snapshot out;
  out.step = steps_;
  out.t = s.clock;
  out.mode = to_string(scenario_.mode);
  out.base = s.robot.base;
  out.pelvis_z = s.robot.pelvis_z;
  out.q_left = s.robot.q_left;
  out.q_right = s.robot.q_right;
  out.head_pitch = s.robot.head_pitch;
  out.gripper = s.robot.gripper;
  out.ee_left = model.ee_position(s.robot, Side::Left);
  out.ee_right = model.ee_position(s.robot, Side::Right);
  for (const sim::ObjectState& o : s.objects) out.objects.push_back({o.name, o.position, o.yaw, o.grasped});
  out.beta = beta_;
  out.w = w_;
  out.f_cp_left = left_.force;
  out.f_cp_right = right_.force;
  out.sensed_left = s.sensed.left;
  out.sensed_right = s.sensed.right;
  out.f_bar = record_.f_bar;
  if (tree_) {
    out.bt_labels = tree_->labels();
    out.bt_status = tree_->status_code();
  }
  out.active = record_.active;
  out.control_point = right_.control_point;
  out.phase = phase_;
  if (spot_) out.spot = spot_->position;
  if (auto g = bb_.vec3("goal")) out.goal = *g;
  out.feedback = feedback_;
  return out;
}

Json Mission::metrics() const {
  const sim::WorldState& s = world_->state();
  Json m;
  m["scenario"] = scenario_.name;
  m["mode"] = to_string(scenario_.mode);
  m["seed"] = seed_;
  m["steps"] = steps_;
  m["sim_time"] = s.clock;
  m["completed"] = completed_;
  m["completion_time"] = completed_ ? Json(s.clock) : Json(nullptr);
  m["slip_count"] = s.slip_count;
  m["control_point_switches"] = control_point_switches_;
  m["goal_events"] = goal_event_count_ + goal_events_.size();
  switch (scenario_.mode) {
    case MissionMode::Bt:
      m["base_alternations"] = base_alternations_;
      m["base_overlap_steps"] = base_overlap_steps_;
      m["arm_active_steps"] = arm_active_steps_;
      m["arm_outside_range_steps"] = arm_outside_range_steps_;
      m["final_base_error"] = final_base_error_ >= 0 ? Json(final_base_error_) : Json(nullptr);
      m["final_ee_error"] = final_ee_error_ >= 0 ? Json(final_ee_error_) : Json(nullptr);
      break;
    case MissionMode::Tpo:
      m["vtr"] = scenario_.tpo.vtr_enabled;
      m["goals_total"] = scenario_.tpo.goals.size();
      m["goals_reached"] = goal_index_;
      m["goal_times"] = goal_times_;
      break;
    case MissionMode::Bimanual: {
      const sim::ObjectState& obj = s.objects[static_cast<std::size_t>(scenario_.bimanual.object)];
      m["phase"] = phase_;
      m["m_bar"] = mass_ ? Json(mass_->m_bar) : Json(nullptr);
      if (mass_ && lift_samples_.size() > 1) {
        double ss = 0.0;
        for (const auto& ls : lift_samples_) {
          const double mi = (ls.f_zl + ls.f_zr) / mass_->g;
          ss += (mi - mass_->m_bar) * (mi - mass_->m_bar);
        }
        m["mass_sample_std"] = std::sqrt(ss / static_cast<double>(lift_samples_.size() - 1));
      }
      m["f_bar"] = f_bar_;
      m["max_drift"] = max_drift_;
      m["max_force_error"] = max_force_error_;
      m["object_displacement"] = phase_ == "transport" ? Json((obj.position - object_start_).head<2>().norm()) : Json(nullptr);
      m["base_yaw_change"] = phase_ == "transport" ? Json(wrap_angle(s.robot.base.yaw - yaw_start_)) : Json(nullptr);
      m["transport_duration"] = phase_ == "transport" ? s.clock - transport_start_ : 0.0;
      break;
    }
  }
  return m;
}

MissionReport run_mission(const RunOptions& options) {
  Scenario scenario = load_scenario(options.scenario);
  const std::string tree_path = options.tree.empty() ? scenario.tree : options.tree;
  const std::string trace_path = options.trace.empty() ? scenario.trace : options.trace;
  std::optional<bt::BtNode> tree;
  if (!tree_path.empty()) {
    try {
      tree = bt::load_tree(tree_path);
    } catch (const Error& e) {
      const std::string what = e.what();
      throw ConfigError(what.find(tree_path) == std::string::npos ? tree_path + ": " + what : what);
    }
  }
  OperatorTrace trace = trace_path.empty() ? OperatorTrace{} : load_trace(trace_path);

  Mission mission(std::move(scenario), std::move(tree), std::move(trace), options.seed);
  std::ostringstream csv, jsonl;
  LogWriter log(&csv, &jsonl);
  while (!mission.done()) {
    mission.step();
    log.write(mission.last_record());
  }

  MissionReport report;
  report.completed = mission.completed();
  report.rows = log.rows();
  report.metrics = mission.metrics();
  report.metrics["log_rows"] = report.rows;
  report.csv = csv.str();
  report.jsonl = jsonl.str();
  if (!options.out_dir.empty()) {
    std::filesystem::create_directories(options.out_dir);
    const auto write = [&](const char* name, const std::string& text) {
      std::ofstream out(options.out_dir / name, std::ios::binary);
      if (!out) throw ConfigError("cannot write '" + (options.out_dir / name).string() + "'");
      out << text;
    };
    write("log.csv", report.csv);
    write("log.jsonl", report.jsonl);
    write("report.json", report.metrics.dump(2) + "\n");
  }
  return report;
}

}  // namespace tpo::service
