#pragma once

#include <deque>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tpo/bt/parser.hpp"
#include "tpo/bt/tree.hpp"
#include "tpo/control/motion_generation.hpp"
#include "tpo/perception/laser.hpp"
#include "tpo/service/feedback.hpp"
#include "tpo/service/log.hpp"
#include "tpo/service/scenario.hpp"
#include "tpo/service/trace.hpp"
#include "tpo/service/wire.hpp"

namespace tpo::service {

/// One closed-loop run: trace events, perception, tree tick, controllers,
/// mode-specific command shaping, then a world step. Fully deterministic for
/// a given scenario, tree, trace and seed.
class Mission {
 public:
  Mission(Scenario scenario, std::optional<bt::BtNode> tree, OperatorTrace trace,
          std::optional<std::uint64_t> seed = std::nullopt);
  ~Mission();
  Mission(const Mission&) = delete;
  Mission& operator=(const Mission&) = delete;

  void step();
  /// Time limit hit or the mode's success condition met.
  bool done() const;
  bool completed() const { return completed_; }

  /// Live input applied at the start of the next step.
  void inject(TraceEvent event);

  const Scenario& scenario() const { return scenario_; }
  const sim::World& world() const { return *world_; }
  const bt::Blackboard& blackboard() const { return bb_; }
  const bt::Tree* tree() const { return tree_.get(); }
  std::size_t steps() const { return steps_; }
  const StepRecord& last_record() const { return record_; }
  const FeedbackFrame& last_feedback() const { return feedback_; }

  Snapshot snapshot() const;
  /// Goal events (dwell goals, keyboard presses) since the last call.
  std::vector<GoalEvent> take_goal_events();
  /// Mode-specific figures of merit.
  Json metrics() const;

 private:
  struct EmitterKey {
    double t;
    Vec3 position;
    Vec3 target;
  };

  void apply(const TraceEvent& e);
  void perceive(double t);
  void keyboard_commands(sim::Commands& cmd);
  void tpo_commands(sim::Commands& cmd);
  void bimanual_commands(sim::Commands& cmd);
  void track_tree_metrics();
  void finish_step();
  std::optional<kin::RigidTransform> emitter_pose(double t) const;
  Vec3 operator_force(sim::Side side);

  Scenario scenario_;
  std::uint64_t seed_;
  OperatorTrace trace_;
  TraceCursor cursor_;
  std::deque<TraceEvent> injected_;
  std::unique_ptr<sim::World> world_;

  bt::Blackboard bb_;
  bt::ActionChannel channel_;
  std::unique_ptr<bt::StandardEnvironment> env_;
  std::unique_ptr<bt::Tree> tree_;
  sim::ActionController controller_;

  std::size_t steps_ = 0;
  bool completed_ = false;
  bool failed_ = false;
  std::optional<std::pair<std::string, bool>> pending_toggle_;
  std::optional<double> manual_gripper_;
  StepRecord record_;
  FeedbackFrame feedback_;
  std::vector<GoalEvent> goal_events_;
  std::size_t goal_event_count_ = 0;

  // Laser and keyboard.
  std::vector<EmitterKey> emitter_keys_;
  std::optional<kin::RigidTransform> live_emitter_;
  bool laser_on_ = true;
  perception::SpotNoise spot_noise_;
  perception::SpotSmoother smoother_;
  perception::DwellSelector dwell_;
  perception::KeyboardSelector keyboard_selector_;
  std::optional<perception::LaserSpot> spot_;
  std::optional<std::string> keyboard_command_;
  std::optional<Vec3> last_goal_;

  // Tree bookkeeping.
  std::string last_base_action_;
  int base_alternations_ = 0;
  int base_overlap_steps_ = 0;
  int arm_active_steps_ = 0;
  int arm_outside_range_steps_ = 0;
  double final_base_error_ = -1.0;
  double final_ee_error_ = -1.0;

  // Teleoperation.
  struct SideInput {
    bool active = false;
    std::string control_point;
    control::TrackerInput tracker;
    bool tracker_seen = false;
    std::optional<Vec3> direct_force;
    Vec3 force = Vec3::Zero();
  };
  SideInput left_;
  SideInput right_;
  control::PosturalReference arm_ref_;
  std::size_t goal_index_ = 0;
  std::vector<double> goal_times_;
  int control_point_switches_ = 0;
  Vec3 beta_ = Vec3::Zero();
  Vec3 w_ = Vec3::Ones();

  // Cooperative transport.
  std::string phase_ = "idle";
  int phase_steps_ = 0;
  std::vector<bimanual::LiftSample> lift_samples_;
  std::optional<bimanual::MassEstimate> mass_;
  double f_bar_ = 0.0;
  double lift_start_z_ = 0.0;
  double transport_start_ = 0.0;
  double d0_ = 0.0;
  Vec3 offset_b_ = Vec3::Zero();
  Vec3 object_start_ = Vec3::Zero();
  double yaw_start_ = 0.0;
  Vec3 object_velocity_ = Vec3::Zero();
  double object_yaw_rate_ = 0.0;
  std::vector<TraceEvent> transport_events_;
  std::size_t transport_next_ = 0;
  double max_drift_ = 0.0;
  double max_force_error_ = 0.0;
};

struct RunOptions {
  std::filesystem::path scenario;
  std::string tree;   // overrides the scenario's tree when set
  std::string trace;  // overrides the scenario's trace when set
  std::optional<std::uint64_t> seed;
  std::filesystem::path out_dir;  // no files written when empty
};

struct MissionReport {
  bool completed = false;
  std::size_t rows = 0;
  Json metrics;
  std::string csv;
  std::string jsonl;
};

/// Loads the inputs, runs to completion and writes log.csv, log.jsonl and
/// report.json into `out_dir`. Throws ConfigError naming the offending path.
MissionReport run_mission(const RunOptions& options);

}  // namespace tpo::service
