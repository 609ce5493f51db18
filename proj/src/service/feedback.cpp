#include "tpo/service/feedback.hpp"

#include <algorithm>

namespace tpo::service {

namespace {

double squeeze(double magnitude, double max) {
  if (!(max > 0.0)) throw ConfigError("feedback maxima must be positive");
  return std::clamp(magnitude / max, 0.0, 1.0);
}

}  // namespace

const char* to_string(VibrationPattern p) { return p == VibrationPattern::Single ? "single" : "double"; }

FeedbackFrame map_feedback(const FeedbackInputs& in, const FeedbackScale& scale) {
  FeedbackFrame f;
  f.forearm_squeeze.left = squeeze(in.f_cp_left.norm(), scale.max_force);
  f.forearm_squeeze.right = squeeze(in.f_cp_right.norm(), scale.max_force);
  f.finger_squeeze.right = squeeze(std::abs(in.gripper_force), scale.max_grip_force);
  f.finger_squeeze.left = squeeze(in.left_external.norm(), scale.max_external_force);
  if (in.toggle)
    f.vibration = Vibration{in.toggle->first, in.toggle->second ? VibrationPattern::Single : VibrationPattern::Double};
  return f;
}

}  // namespace tpo::service
