#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>

#include "tpo/common/types.hpp"

namespace tpo::bt {

using BbValue = std::variant<bool, double, std::string, Vec3>;

/// Shared key/value memory of a tree.
class Blackboard {
 public:
  void set(const std::string& key, BbValue value) { values_[key] = std::move(value); }
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void erase(const std::string& key) { values_.erase(key); }
  const BbValue* find(const std::string& key) const;

  /// Missing keys, false, zero and empty strings are false.
  bool truthy(const std::string& key) const;
  std::optional<Vec3> vec3(const std::string& key) const;
  std::optional<double> number(const std::string& key) const;
  std::optional<std::string> text(const std::string& key) const;

  /// Applies "key = value". The value is read as bool, number, 3-vector or text.
  void apply(const std::string& assignment);
  /// Evaluates "key" or "!key".
  bool test(const std::string& predicate) const;

  const std::map<std::string, BbValue>& values() const { return values_; }

 private:
  std::map<std::string, BbValue> values_;
};

BbValue parse_bb_value(const std::string& text);
std::string format_bb_value(const BbValue& value);

}  // namespace tpo::bt
