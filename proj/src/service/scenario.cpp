#include "tpo/service/scenario.hpp"

#include <fstream>

namespace tpo::service {

namespace {

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  auto it = j.find(key);
  return it == j.end() ? fallback : it->get<T>();
}

Vec3 vec3_or(const Json& j, const char* key, const Vec3& fallback) {
  auto it = j.find(key);
  return it == j.end() ? fallback : vec3_from_json(*it);
}

VecX vecx_from_json(const Json& j) {
  if (!j.is_array()) throw ConfigError("expected a number array");
  VecX v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

kin::RigidTransform transform_from_json(const Json& j) {
  const Vec3 rpy = vec3_or(j, "rpy", Vec3::Zero());
  return kin::RigidTransform::from_rpy(rpy.x(), rpy.y(), rpy.z(), vec3_or(j, "xyz", Vec3::Zero()));
}

Json transform_to_json(const kin::RigidTransform& t) {
  const Vec3 ypr = t.rotation.eulerAngles(2, 1, 0);
  return Json{{"xyz", vec3_to_json(t.translation)}, {"rpy", vec3_to_json(Vec3(ypr[2], ypr[1], ypr[0]))}};
}

vtr::Thresholds thresholds_from_json(const Json& j) {
  vtr::Thresholds t;
  t.d = vec3_or(j, "d", t.d);
  t.delta = vec3_or(j, "delta", t.delta);
  if (auto it = j.find("enabled"); it != j.end()) {
    if (!it->is_array() || it->size() != 3) throw ConfigError("thresholds.enabled needs three booleans");
    for (std::size_t i = 0; i < 3; ++i) t.enabled[i] = (*it)[i].get<bool>();
  }
  t.validate();
  return t;
}

MissionMode mode_from_string(const std::string& s) {
  if (s == "bt") return MissionMode::Bt;
  if (s == "tpo") return MissionMode::Tpo;
  if (s == "bimanual") return MissionMode::Bimanual;
  throw ConfigError("unknown mission mode '" + s + "'");
}

std::string resolve(const std::filesystem::path& base, const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->get<std::string>().empty()) return {};
  std::filesystem::path p(it->get<std::string>());
  return (p.is_absolute() ? p : base / p).lexically_normal().string();
}

}  // namespace

const char* to_string(MissionMode mode) {
  switch (mode) {
    case MissionMode::Bt: return "bt";
    case MissionMode::Tpo: return "tpo";
    case MissionMode::Bimanual: return "bimanual";
  }
  return "?";
}

Vec3 vec3_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw ConfigError("expected a 3-vector, got " + j.dump());
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

Json vec3_to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

kin::ChainModel chain_from_json(const Json& j) {
  kin::ChainModel c;
  c.name = j.at("name").get<std::string>();
  if (auto it = j.find("base_mount"); it != j.end()) c.base_mount = transform_from_json(*it);
  c.tip = vec3_or(j, "tip", Vec3::Zero());
  for (const Json& jj : j.at("joints")) {
    kin::Joint joint;
    joint.name = jj.at("name").get<std::string>();
    joint.link = jj.at("link").get<std::string>();
    const std::string type = get_or<std::string>(jj, "type", "revolute");
    if (type == "revolute") {
      joint.kind = kin::JointKind::Revolute;
    } else if (type == "prismatic") {
      joint.kind = kin::JointKind::Prismatic;
    } else {
      throw ConfigError("joint '" + joint.name + "': unknown type '" + type + "'");
    }
    joint.axis = vec3_or(jj, "axis", Vec3::UnitZ());
    joint.origin = transform_from_json(jj);
    joint.min = get_or(jj, "min", joint.min);
    joint.max = get_or(jj, "max", joint.max);
    joint.vel_limit = get_or(jj, "vel", joint.vel_limit);
    c.joints.push_back(joint);
  }
  c.validate();
  return c;
}

Json chain_to_json(const kin::ChainModel& c) {
  Json joints = Json::array();
  for (const kin::Joint& j : c.joints) {
    Json jj = transform_to_json(j.origin);
    jj["name"] = j.name;
    jj["link"] = j.link;
    jj["type"] = j.kind == kin::JointKind::Revolute ? "revolute" : "prismatic";
    jj["axis"] = vec3_to_json(j.axis);
    jj["min"] = j.min;
    jj["max"] = j.max;
    jj["vel"] = j.vel_limit;
    joints.push_back(jj);
  }
  return Json{{"name", c.name}, {"base_mount", transform_to_json(c.base_mount)}, {"tip", vec3_to_json(c.tip)},
              {"joints", joints}};
}

Scenario parse_scenario(const Json& doc, const std::filesystem::path& base_dir) {
  try {
    if (!doc.is_object()) throw ConfigError("scenario must be a JSON object");
    Scenario s;
    s.base_dir = base_dir;
    s.name = get_or<std::string>(doc, "name", "unnamed");
    s.mode = mode_from_string(get_or<std::string>(doc, "mode", "bt"));
    s.tree = resolve(base_dir, doc, "tree");
    s.trace = resolve(base_dir, doc, "trace");
    s.duration = get_or(doc, "duration", s.duration);
    s.dt = get_or(doc, "dt", s.dt);
    s.seed = get_or<std::uint64_t>(doc, "seed", s.seed);
    if (!(s.duration > 0.0) || !(s.dt > 0.0)) throw ConfigError("duration and dt must be positive");

    if (auto it = doc.find("robot"); it != doc.end()) {
      const Json& r = *it;
      if (auto b = r.find("base"); b != r.end()) {
        const Vec3 v = vec3_from_json(*b);
        s.base = {v.x(), v.y(), v.z()};
      }
      if (auto p = r.find("pelvis_z"); p != r.end()) s.pelvis_z = p->get<double>();
      if (auto arms = r.find("arms"); arms != r.end()) {
        s.robot.left_arm = chain_from_json(arms->at("left"));
        s.robot.right_arm = chain_from_json(arms->at("right"));
      }
      if (auto h = r.find("home_left"); h != r.end()) s.robot.home_left = vecx_from_json(*h);
      if (auto h = r.find("home_right"); h != r.end()) s.robot.home_right = vecx_from_json(*h);
      if (auto q = r.find("squat"); q != r.end()) {
        s.robot.squat_min = q->at(0).get<double>();
        s.robot.squat_max = q->at(1).get<double>();
      }
      s.robot.planar_vel = get_or(r, "planar_vel", s.robot.planar_vel);
      s.robot.yaw_vel = get_or(r, "yaw_vel", s.robot.yaw_vel);
    }
    s.robot.validate();

    if (auto it = doc.find("scene"); it != doc.end()) {
      for (const Json& j : it->value("surfaces", Json::array())) {
        perception::Surface f;
        f.label = j.at("label").get<std::string>();
        f.center = vec3_from_json(j.at("center"));
        f.normal = vec3_or(j, "normal", f.normal);
        f.u_axis = vec3_or(j, "u_axis", f.u_axis);
        f.half_u = j.at("half_u").get<double>();
        f.half_v = j.at("half_v").get<double>();
        s.scene.surfaces.push_back(f);
      }
      for (const Json& j : it->value("boxes", Json::array())) {
        perception::Box b;
        b.label = j.at("label").get<std::string>();
        b.center = vec3_from_json(j.at("center"));
        b.half_extents = vec3_from_json(j.at("half_extents"));
        s.scene.boxes.push_back(b);
      }
      s.scene.validate();
    }

    for (const Json& j : doc.value("objects", Json::array())) {
      sim::ObjectState o;
      o.name = j.at("name").get<std::string>();
      o.position = vec3_from_json(j.at("position"));
      o.yaw = get_or(j, "yaw", 0.0);
      o.half_extents = vec3_or(j, "half_extents", o.half_extents);
      o.mass = get_or(j, "mass", o.mass);
      o.support_z = get_or(j, "support_z", o.position.z());
      if (!(o.mass > 0.0)) throw ConfigError("object '" + o.name + "' needs a positive mass");
      s.objects.push_back(o);
    }

    if (auto it = doc.find("keyboard"); it != doc.end()) {
      const double yaw = get_or(*it, "yaw", 0.0);
      s.keyboard = perception::KeyboardLayout::standard(
          kin::RigidTransform::from_rpy(0.0, 0.0, yaw, vec3_from_json(it->at("origin"))));
      s.keyboard->validate();
    }
    if (auto it = doc.find("emitter"); it != doc.end()) s.emitter_position = vec3_from_json(it->at("position"));

    if (auto it = doc.find("sensing"); it != doc.end()) {
      s.force_noise = get_or(*it, "force_noise", s.force_noise);
      s.mu_s = get_or(*it, "mu_s", s.mu_s);
      s.contact_stiffness = get_or(*it, "contact_stiffness", s.contact_stiffness);
    }
    if (auto it = doc.find("arm_range"); it != doc.end()) {
      s.arm_range.min = vec3_or(*it, "min", s.arm_range.min);
      s.arm_range.max = vec3_or(*it, "max", s.arm_range.max);
    }
    if (auto it = doc.find("gains"); it != doc.end()) {
      for (const auto& [module, g] : it->items()) {
        sim::ModuleGains mg = s.gains.count(module) ? s.gains.at(module) : sim::ModuleGains{};
        if (g.contains("kp")) mg.linear.kp = Vec3::Constant(g["kp"].get<double>());
        if (g.contains("ki")) mg.linear.ki = Vec3::Constant(g["ki"].get<double>());
        if (g.contains("kd")) mg.linear.kd = Vec3::Constant(g["kd"].get<double>());
        if (g.contains("angular_kp")) mg.angular.kp = Vec3::Constant(g["angular_kp"].get<double>());
        mg.max_linear = get_or(g, "max_linear", mg.max_linear);
        mg.max_angular = get_or(g, "max_angular", mg.max_angular);
        s.gains[module] = mg;
      }
    }

    if (auto it = doc.find("perception"); it != doc.end()) {
      PerceptionConfig& p = s.perception;
      p.goal_source = get_or(*it, "goal_source", p.goal_source);
      if (p.goal_source != "spot" && p.goal_source != "dwell")
        throw ConfigError("perception.goal_source must be 'spot' or 'dwell'");
      p.spot_noise = get_or(*it, "spot_noise", p.spot_noise);
      p.smoothing_hz = get_or(*it, "smoothing_hz", p.smoothing_hz);
      p.dwell_radius = get_or(*it, "dwell_radius", p.dwell_radius);
      p.dwell_time = get_or(*it, "dwell_time", p.dwell_time);
      p.keyboard_dwell = get_or(*it, "keyboard_dwell", p.keyboard_dwell);
    }
    if (auto it = doc.find("tracking"); it != doc.end()) {
      TrackingGoal t;
      t.base_offset = vec3_or(*it, "base_offset", t.base_offset);
      t.base_tolerance = get_or(*it, "base_tolerance", t.base_tolerance);
      if (it->contains("ee_tolerance")) t.ee_tolerance = (*it)["ee_tolerance"].get<double>();
      s.tracking = t;
    }
    if (auto it = doc.find("tpo"); it != doc.end()) {
      TpoConfig& t = s.tpo;
      t.vtr_enabled = get_or(*it, "vtr", t.vtr_enabled);
      if (auto th = it->find("thresholds"); th != it->end()) t.thresholds = thresholds_from_json(*th);
      t.base_gain = get_or(*it, "base_gain", t.base_gain);
      t.k_cam = get_or(*it, "k_cam", t.k_cam);
      t.deadzone = get_or(*it, "deadzone", t.deadzone);
      t.operator_gain = get_or(*it, "operator_gain", t.operator_gain);
      t.operator_max = get_or(*it, "operator_max", t.operator_max);
      t.arm_mass = get_or(*it, "arm_mass", t.arm_mass);
      t.arm_damping = get_or(*it, "arm_damping", t.arm_damping);
      t.goal_tolerance = get_or(*it, "goal_tolerance", t.goal_tolerance);
      t.control_point = get_or(*it, "control_point", t.control_point);
      for (const Json& g : it->value("goals", Json::array())) t.goals.push_back(vec3_from_json(g));
    }
    if (auto it = doc.find("bimanual"); it != doc.end()) {
      BimanualConfig& b = s.bimanual;
      b.object = get_or(*it, "object", b.object);
      b.grasp.mu_s = s.mu_s;
      b.grasp.k_margin = get_or(*it, "k_margin", b.grasp.k_margin);
      b.grasp.f_initial = get_or(*it, "f_initial", b.grasp.f_initial);
      b.damping = vec3_or(*it, "damping", b.damping);
      b.stiffness = vec3_or(*it, "stiffness", b.stiffness);
      if (auto th = it->find("thresholds"); th != it->end()) b.thresholds = thresholds_from_json(*th);
      b.lift_height = get_or(*it, "lift_height", b.lift_height);
      b.lift_speed = get_or(*it, "lift_speed", b.lift_speed);
      b.mass_samples = get_or(*it, "mass_samples", b.mass_samples);
      b.squeeze_tolerance = get_or(*it, "squeeze_tolerance", b.squeeze_tolerance);
      b.transport_time = get_or(*it, "transport_time", b.transport_time);
      b.ik_damping = get_or(*it, "ik_damping", b.ik_damping);
      if (b.object < 0 || b.object >= static_cast<int>(s.objects.size()))
        throw ConfigError("bimanual.object does not name an object");
      if (b.mass_samples < 1) throw ConfigError("bimanual.mass_samples must be positive");
    }
    if (auto it = doc.find("feedback"); it != doc.end()) {
      s.feedback.max_force = get_or(*it, "max_force", s.feedback.max_force);
      s.feedback.max_grip_force = get_or(*it, "max_grip_force", s.feedback.max_grip_force);
      s.feedback.max_external_force = get_or(*it, "max_external_force", s.feedback.max_external_force);
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid scenario: ") + e.what());
  }
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file '" + path.string() + "'");
  try {
    const Json doc = Json::parse(in);
    return parse_scenario(doc, path.parent_path());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace tpo::service
