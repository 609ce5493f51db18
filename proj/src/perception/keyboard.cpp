#include "tpo/perception/keyboard.hpp"

#include <cmath>

namespace tpo::perception {

namespace {

constexpr double kPlaneTol = 1e-6;

const char* const kCommands[] = {"+x", "-x", "+y", "-y", "+z", "-z", "+rz", "-rz", "open", "close"};

Vec3 local_point(const KeyboardLayout& layout, const Vec3& point) {
  return layout.origin.inverse().apply(point);
}

}  // namespace

KeyboardCommand command_for(const std::string& id) {
  KeyboardCommand c;
  c.id = id;
  if (id == "open" || id == "close") {
    c.gripper_close = id == "close";
    return c;
  }
  if (id == "+rz" || id == "-rz") {
    c.yaw_rate = (id[0] == '+' ? 1.0 : -1.0) * kKeyboardAngularSpeed;
    return c;
  }
  if (id.size() == 2 && (id[0] == '+' || id[0] == '-') && id[1] >= 'x' && id[1] <= 'z') {
    c.linear[id[1] - 'x'] = (id[0] == '+' ? 1.0 : -1.0) * kKeyboardLinearSpeed;
    return c;
  }
  throw ConfigError("unknown keyboard command '" + id + "'");
}

KeyboardLayout KeyboardLayout::standard(const kin::RigidTransform& origin) {
  KeyboardLayout k;
  k.origin = origin;
  for (int i = 0; i < 10; ++i) {
    const int row = i / 5, col = i % 5;
    k.buttons.push_back({kCommands[i], (col - 2) * kButtonWidth, (0.5 - row) * kButtonHeight});
  }
  return k;
}

void KeyboardLayout::validate() const {
  if (!(button_width > 0.0) || !(button_height > 0.0)) throw ConfigError("keyboard buttons need a positive size");
  if (!origin.is_valid()) throw ConfigError("keyboard origin is not a rigid transform");
  for (std::size_t i = 0; i < buttons.size(); ++i) {
    command_for(buttons[i].command);
    for (std::size_t j = i + 1; j < buttons.size(); ++j) {
      const bool overlap_u = std::abs(buttons[i].u - buttons[j].u) < button_width - 1e-12;
      const bool overlap_v = std::abs(buttons[i].v - buttons[j].v) < button_height - 1e-12;
      if (overlap_u && overlap_v)
        throw ConfigError("keyboard buttons '" + buttons[i].command + "' and '" + buttons[j].command + "' overlap");
    }
  }
}

bool KeyboardLayout::contains(const Vec3& point) const {
  if (buttons.empty()) return false;
  const Vec3 p = local_point(*this, point);
  if (std::abs(p.z()) > kPlaneTol) return false;
  double umin = buttons[0].u, umax = umin, vmin = buttons[0].v, vmax = vmin;
  for (const auto& b : buttons) {
    umin = std::min(umin, b.u);
    umax = std::max(umax, b.u);
    vmin = std::min(vmin, b.v);
    vmax = std::max(vmax, b.v);
  }
  return p.x() >= umin - button_width / 2 && p.x() <= umax + button_width / 2 && p.y() >= vmin - button_height / 2 &&
         p.y() <= vmax + button_height / 2;
}

std::optional<std::string> keyboard_hit(const Vec3& point, const KeyboardLayout& layout) {
  const Vec3 p = local_point(layout, point);
  if (std::abs(p.z()) > kPlaneTol) return std::nullopt;
  for (const auto& b : layout.buttons) {
    if (std::abs(p.x() - b.u) < layout.button_width / 2 && std::abs(p.y() - b.v) < layout.button_height / 2)
      return b.command;
  }
  return std::nullopt;
}

std::optional<std::string> KeyboardSelector::update(const std::optional<std::string>& button, double timestamp) {
  just_pressed_ = false;
  if (button != current_) {
    current_ = button;
    since_ = timestamp;
    active_ = false;
    return std::nullopt;
  }
  if (!current_) return std::nullopt;
  if (!active_ && timestamp - since_ >= required_ - 1e-9) {
    active_ = true;
    just_pressed_ = true;
  }
  return active_ ? current_ : std::nullopt;
}

}  // namespace tpo::perception
