#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tpo/common/types.hpp"

namespace tpo::bt {

enum class NodeKind { Sequence, Fallback, Parallel, ReactiveSequence, Condition, Action, InfiniteLoop };

enum class Status { Success, Failure, Running };

const char* to_string(NodeKind kind);
const char* to_string(Status status);
std::optional<NodeKind> kind_from_string(const std::string& token);

class ParseError : public Error {
 public:
  using Error::Error;
};

/// Ordered key/value parameters as written in the tree document. Values keep
/// their source text; typed accessors interpret them on demand.
class Params {
 public:
  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;
  const std::string& raw(const std::string& key) const;
  std::optional<std::string> find(const std::string& key) const;

  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  std::vector<double> vector(const std::string& key) const;
  Vec3 vec3(const std::string& key) const;
  Vec3 vec3_or(const std::string& key, const Vec3& fallback) const;
  std::string text_or(const std::string& key, const std::string& fallback) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  bool operator==(const Params&) const = default;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

double parse_number(const std::string& text);
/// Semicolon-separated numbers, e.g. "-1;0;0".
std::vector<double> parse_vector(const std::string& text);

struct BtNode {
  NodeKind kind = NodeKind::Sequence;
  std::string name;
  std::string leaf_id;  // condition predicate or action module
  int threshold = 0;    // parallel M
  Params params;
  std::vector<BtNode> children;
  std::string pre_while;        // "key" or "!key"
  std::string post_on_success;  // "key = value"

  bool is_leaf() const { return kind == NodeKind::Condition || kind == NodeKind::Action; }
  /// Checks structural invariants recursively; throws ParseError.
  void validate() const;
  std::size_t size() const;
  bool operator==(const BtNode&) const = default;
};

enum class CommandMode { Track, Reach };
enum class AxisMode { Set, Keep, None };

struct ActionParams {
  CommandMode command_mode = CommandMode::Track;
  AxisMode linear_mode = AxisMode::Set;
  AxisMode angular_mode = AxisMode::None;
  std::string goal_frame = "goal";
  Vec3 final_goal_distance = Vec3::Zero();
  Vec3 final_ref_orientation = Vec3::Zero();  // roll, pitch, yaw
  double linear_error_norm = 0.05;
  double angular_error_norm = 0.1;

  /// Reads the typed fields from a parameter list; unknown keys are left for the module.
  static ActionParams from(const Params& params);
  void validate() const;
};

}  // namespace tpo::bt
