#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tpo/bimanual/bimanual.hpp"
#include "tpo/bt/conditions.hpp"
#include "tpo/perception/keyboard.hpp"
#include "tpo/perception/scene.hpp"
#include "tpo/sim/controllers.hpp"
#include "tpo/sim/world.hpp"
#include "tpo/vtr/vtr.hpp"

namespace tpo::service {

using Json = nlohmann::json;

enum class MissionMode { Bt, Tpo, Bimanual };

const char* to_string(MissionMode mode);

struct PerceptionConfig {
  std::string goal_source = "spot";  // "spot" follows the smoothed spot, "dwell" needs a 3 s dwell
  double spot_noise = 0.0;           // m, in-plane
  double smoothing_hz = 5.0;
  double dwell_radius = 0.04;
  double dwell_time = 3.0;
  double keyboard_dwell = 1.0;
};

/// Success test for laser-driven missions: the base must stand at the last
/// goal offset by `base_offset` (base frame) once the trace is exhausted.
struct TrackingGoal {
  Vec3 base_offset = Vec3::Zero();
  double base_tolerance = 0.05;
  std::optional<double> ee_tolerance;  // right end-effector to goal, when set
};

struct TpoConfig {
  bool vtr_enabled = true;
  vtr::Thresholds thresholds;
  double base_gain = 0.6;       // m/s per N
  double k_cam = 1.8;           // N/m
  double deadzone = 0.03;       // m
  double operator_gain = 2.0;   // operator arm displacement per metre of EE error
  double operator_max = 0.35;   // m, longest operator arm displacement
  double arm_mass = 0.05;
  double arm_damping = 0.5;
  double goal_tolerance = 0.04;
  std::vector<Vec3> goals;
  std::string control_point = "right_ee";
};

struct BimanualConfig {
  int object = 0;
  bimanual::GraspSpec grasp;
  Vec3 damping = Vec3::Constant(2500.0);
  Vec3 stiffness = Vec3::Constant(200.0);
  vtr::Thresholds thresholds;
  double lift_height = 0.05;
  double lift_speed = 0.05;
  int mass_samples = 100;
  double squeeze_tolerance = 1.0;  // N
  double transport_time = 30.0;    // s, drift window
  double ik_damping = 1e-3;
};

struct FeedbackConfig {
  double max_force = 1.0;          // N, virtual force for full forearm squeeze
  double max_grip_force = 20.0;    // N
  double max_external_force = 50.0;  // N
};

struct Scenario {
  std::string name;
  MissionMode mode = MissionMode::Bt;
  std::filesystem::path base_dir;
  std::string tree;   // resolved path, may be empty
  std::string trace;  // resolved path, may be empty
  double duration = 60.0;
  double dt = 0.01;
  std::uint64_t seed = 1;

  sim::RobotConfig robot = sim::RobotConfig::standard();
  PlanarPose base;
  std::optional<double> pelvis_z;
  std::optional<Vec3> emitter_position;

  perception::Scene scene;
  std::vector<sim::ObjectState> objects;
  std::optional<perception::KeyboardLayout> keyboard;

  double force_noise = 0.1;
  double mu_s = 0.6;
  double contact_stiffness = 5e4;
  bt::ArmRange arm_range;
  std::map<std::string, sim::ModuleGains> gains = sim::default_module_gains();

  PerceptionConfig perception;
  std::optional<TrackingGoal> tracking;
  TpoConfig tpo;
  BimanualConfig bimanual;
  FeedbackConfig feedback;
};

/// Throws ConfigError for malformed content.
Scenario parse_scenario(const Json& doc, const std::filesystem::path& base_dir = ".");
/// Throws ConfigError naming the path when the file is missing or invalid.
Scenario load_scenario(const std::filesystem::path& path);

Vec3 vec3_from_json(const Json& j);
Json vec3_to_json(const Vec3& v);

/// {"name", "base_mount": {"xyz", "rpy"}, "tip", "joints": [{"name", "link",
/// "type": "revolute"|"prismatic", "axis", "xyz", "rpy", "min", "max", "vel"}]}
kin::ChainModel chain_from_json(const Json& j);
Json chain_to_json(const kin::ChainModel& chain);

}  // namespace tpo::service
