#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tpo/kinematics/rigid_transform.hpp"

namespace tpo::perception {

inline constexpr double kButtonWidth = 0.105;
inline constexpr double kButtonHeight = 0.099;
inline constexpr double kKeyboardLinearSpeed = 0.025;   // m/s
inline constexpr double kKeyboardAngularSpeed = 0.25;  // rad/s

/// One of "+x", "-x", "+y", "-y", "+z", "-z", "+rz", "-rz", "open", "close".
struct KeyboardButton {
  std::string command;
  double u = 0.0;  // center in the keyboard plane
  double v = 0.0;
};

/// What a button asks for: an end-effector twist or a gripper action.
struct KeyboardCommand {
  std::string id;
  Vec3 linear = Vec3::Zero();
  double yaw_rate = 0.0;
  std::optional<bool> gripper_close;
};

KeyboardCommand command_for(const std::string& id);

/// Paper keyboard lying in the x-y plane of `origin`.
struct KeyboardLayout {
  kin::RigidTransform origin;
  std::vector<KeyboardButton> buttons;
  double button_width = kButtonWidth;
  double button_height = kButtonHeight;

  /// 2 x 5 grid centered on `origin`: linear axes on top, yaw and gripper below.
  static KeyboardLayout standard(const kin::RigidTransform& origin);

  /// Throws ConfigError when buttons overlap or a command is unknown.
  void validate() const;
  /// Point inside the keyboard outline (bounding rectangle of all buttons) and on its plane.
  bool contains(const Vec3& point) const;
};

/// Button strictly containing the point; edges and off-plane points give nullopt.
std::optional<std::string> keyboard_hit(const Vec3& point, const KeyboardLayout& layout);

/// Button selection by dwell: the same button must stay hit for `required`
/// seconds. The command then stays active while the spot remains on it.
class KeyboardSelector {
 public:
  explicit KeyboardSelector(double required = 1.0) : required_(required) {}

  /// Returns the active command id, if any.
  std::optional<std::string> update(const std::optional<std::string>& button, double timestamp);
  /// True on the update that activated the current command.
  bool just_pressed() const { return just_pressed_; }

 private:
  double required_;
  std::optional<std::string> current_;
  double since_ = 0.0;
  bool active_ = false;
  bool just_pressed_ = false;
};

}  // namespace tpo::perception
