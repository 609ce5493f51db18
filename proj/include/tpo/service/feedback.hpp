#pragma once

#include <optional>
#include <string>

#include "tpo/common/types.hpp"

namespace tpo::service {

enum class VibrationPattern { Single, Double };

const char* to_string(VibrationPattern p);

struct Vibration {
  std::string target;  // "left" or "right"
  VibrationPattern pattern = VibrationPattern::Single;

  bool operator==(const Vibration&) const = default;
};

struct SidePair {
  double left = 0.0;
  double right = 0.0;

  bool operator==(const SidePair&) const = default;
};

/// Haptic output for one step. Squeeze values lie in [0, 1].
struct FeedbackFrame {
  SidePair forearm_squeeze;
  SidePair finger_squeeze;
  std::optional<Vibration> vibration;

  bool operator==(const FeedbackFrame&) const = default;
};

struct FeedbackInputs {
  Vec3 f_cp_left = Vec3::Zero();   // virtual force on the left control point
  Vec3 f_cp_right = Vec3::Zero();
  double gripper_force = 0.0;      // N
  Vec3 left_external = Vec3::Zero();  // force sensed at the left end-effector
  /// Activation change this step: side and new state.
  std::optional<std::pair<std::string, bool>> toggle;
};

struct FeedbackScale {
  double max_force = 1.0;
  double max_grip_force = 20.0;
  double max_external_force = 50.0;
};

/// Forearms squeeze with the virtual force of their side, the right finger with
/// the gripper force and the left finger with the left external force, each
/// divided by its maximum and clamped. Activation gives a single vibration,
/// deactivation a double one.
FeedbackFrame map_feedback(const FeedbackInputs& in, const FeedbackScale& scale);

}  // namespace tpo::service
